import math

import numpy as np
import pytest

from treelocate import (
    AbsoluteCauchy,
    Exponential,
    Observation,
    PositiveNormal,
    Uniform,
    candidate_laplace,
    check_statistic,
    conditional_laplace_exponential,
    empirical_laplace,
    hajek_combine,
    incidence_matrix,
    observe,
    path_tree,
    simulate_tree,
    simulate_tree_batch,
    trial_rng,
)
from treelocate.errors import (
    CandidateIsObserverError,
    DegenerateTimeError,
    DimensionMismatchError,
    NegativeArgumentError,
    NoSamplesError,
    UnsupportedDelayModelError,
)
from treelocate.hypoexp import conditional_tilt_factor
from treelocate.transforms import CandidateTransform, CheckTransform

from conftest import EDGE_A, EDGE_B, EDGE_C, EDGE_D, EDGE_E, THREE_LEAF_OBSERVERS

OBS = list(THREE_LEAF_OBSERVERS)
U, V, W = 0, 4, 5


class TestIncidenceMatrix:
    def test_rows_for_candidate_u(self, three_leaf_tree):
        inc = incidence_matrix(three_leaf_tree, OBS, U)
        assert inc.observers == (1, 2, 3)
        assert np.flatnonzero(inc.row(1)).tolist() == [EDGE_A]
        assert np.flatnonzero(inc.row(2)).tolist() == [EDGE_E]
        assert np.flatnonzero(inc.row(3)).tolist() == sorted([EDGE_B, EDGE_D])

    def test_row_sums_are_distances(self, three_leaf_tree):
        inc = incidence_matrix(three_leaf_tree, OBS, W)
        assert inc.matrix.sum(axis=1).tolist() == [3.0, 3.0, 2.0]

    def test_single_observer_adjacent(self):
        t = path_tree(2 + 1)
        inc = incidence_matrix(t, [0], 1)
        assert inc.matrix.sum() == 1.0

    def test_path_column_sums_single_observer(self):
        t = path_tree(11)
        inc = incidence_matrix(t, [0], 10)
        assert np.all(inc.matrix.sum(axis=0) == 1.0)

    def test_candidate_is_observer(self, three_leaf_tree):
        with pytest.raises(CandidateIsObserverError):
            incidence_matrix(three_leaf_tree, OBS, 1)


class TestCandidateLaplace:
    def phi(self, model, x):
        return model.laplace(x)

    @pytest.mark.parametrize(
        "model", [Exponential(1.0), Uniform(0.0, 2.0), PositiveNormal(1.0, 0.5), AbsoluteCauchy(1.0)]
    )
    def test_factorization_all_sources(self, three_leaf_tree, model):
        t1, t2, t3 = 0.6, 0.25, 1.4
        p = self.phi
        want_u = p(model, t1) * p(model, t3) * p(model, t3) * p(model, t2)
        want_v = p(model, t1) * p(model, t1 + t2) * p(model, t3) * p(model, t2)
        want_w = (
            p(model, t1) * p(model, t1 + t2) * p(model, t1 + t2 + t3)
            * p(model, t3) * p(model, t2)
        )
        arg = [t1, t2, t3]
        assert candidate_laplace(three_leaf_tree, OBS, model, U, arg) == pytest.approx(want_u, rel=1e-12)
        assert candidate_laplace(three_leaf_tree, OBS, model, V, arg) == pytest.approx(want_v, rel=1e-12)
        assert candidate_laplace(three_leaf_tree, OBS, model, W, arg) == pytest.approx(want_w, rel=1e-12)

    def test_one_at_zero(self, three_leaf_tree):
        assert candidate_laplace(three_leaf_tree, OBS, Exponential(1.0), V, [0.0, 0.0, 0.0]) == 1.0

    def test_per_edge_heterogeneous(self, three_leaf_tree):
        models = [Exponential(1.0), Uniform(0, 1), Exponential(2.0), PositiveNormal(1, 1), Exponential(0.5)]
        t1, t2, t3 = 0.3, 0.8, 0.5
        # candidate u: edge a -> t1, e -> t2, b -> t3, d -> t3
        want = (
            models[EDGE_A].laplace(t1) * models[EDGE_E].laplace(t2)
            * models[EDGE_B].laplace(t3) * models[EDGE_D].laplace(t3)
        )
        got = candidate_laplace(three_leaf_tree, OBS, models, U, [t1, t2, t3])
        assert got == pytest.approx(want, rel=1e-12)

    def test_monte_carlo_oracle(self, three_leaf_tree):
        # quick version of the acceptance check: 2e5 outbreaks from w
        n = 200_000
        times = simulate_tree_batch(three_leaf_tree, Exponential(1.0), W, trial_rng(9, 0), n)
        tvec = np.array([1.0, 1.0, 1.0])
        draws = np.exp(-(times[:, OBS] @ tvec))
        mc, se = draws.mean(), draws.std(ddof=1) / math.sqrt(n)
        analytic = candidate_laplace(three_leaf_tree, OBS, Exponential(1.0), W, tvec)
        assert abs(mc - analytic) < 4 * se

    def test_monotone_in_each_coordinate(self, three_leaf_tree):
        fn = CandidateTransform(three_leaf_tree, OBS, Exponential(1.0), V)
        base = np.array([0.4, 0.4, 0.4])
        v0 = fn(base)
        for i in range(3):
            bumped = base.copy()
            bumped[i] += 0.3
            assert fn(bumped) < v0

    def test_batched_evaluation(self, three_leaf_tree):
        fn = CandidateTransform(three_leaf_tree, OBS, Exponential(1.0), V)
        pts = np.array([[0.0, 0.0, 0.0], [1.0, 0.5, 0.2], [2.0, 2.0, 2.0]])
        vals = fn(pts)
        assert vals.shape == (3,)
        assert vals[0] == 1.0
        assert vals[1] == pytest.approx(fn(pts[1]), rel=1e-14)

    def test_negative_argument(self, three_leaf_tree):
        with pytest.raises(NegativeArgumentError):
            candidate_laplace(three_leaf_tree, OBS, Exponential(1.0), V, [0.1, -0.2, 0.3])

    def test_dimension_mismatch(self, three_leaf_tree):
        with pytest.raises(DimensionMismatchError):
            candidate_laplace(three_leaf_tree, OBS, Exponential(1.0), V, [0.1, 0.2])


class TestEmpiricalLaplace:
    def test_single_sample_at_zero(self):
        obs = Observation(times={1: 0.5, 2: 1.5})
        assert empirical_laplace([obs], [0.0, 0.0]) == 1.0

    def test_unit_vector_reads_one_time(self):
        obs = Observation(times={1: 0.5, 2: 1.5})
        assert empirical_laplace([obs], [1.0, 0.0]) == pytest.approx(math.exp(-0.5))
        assert empirical_laplace([obs], [0.0, 1.0]) == pytest.approx(math.exp(-1.5))

    def test_average_over_samples(self):
        a = Observation(times={0: 1.0})
        b = Observation(times={0: 3.0})
        want = (math.exp(-1.0) + math.exp(-3.0)) / 2
        assert empirical_laplace([a, b], [1.0]) == pytest.approx(want)

    def test_no_samples(self):
        with pytest.raises(NoSamplesError):
            empirical_laplace([], [0.0])

    def test_clt_closeness_to_candidate_transform(self, three_leaf_tree):
        k = 100_000
        times = simulate_tree_batch(three_leaf_tree, Exponential(1.0), V, trial_rng(9, 1), k)
        tau = times[:, OBS]
        rng = np.random.default_rng(3)
        grid = rng.uniform(0.0, 2.0, size=(20, 3))
        fn = CandidateTransform(three_leaf_tree, OBS, Exponential(1.0), V)
        emp = np.exp(-(grid @ tau.T)).mean(axis=1)
        assert np.max(np.abs(emp - fn(grid))) <= 4.0 / math.sqrt(k)


class TestConditionalLaplace:
    def test_identity_candidate_u(self, three_leaf_tree):
        # paths from u: edges b,d to observer 3 share the coefficient t3,
        # so conditioning collapses to exp(-t3 tau3) exactly
        m = Exponential(1.0)
        t1, t2, t3, tau3 = 0.6, 0.25, 1.4, 1.9
        want = m.laplace(t1) * m.laplace(t2) * math.exp(-t3 * tau3)
        got = conditional_laplace_exponential(three_leaf_tree, OBS, m, U, 3, tau3, [t1, t2, t3])
        assert got == pytest.approx(want, rel=1e-12)

    def test_identity_candidate_v(self, three_leaf_tree):
        # single-edge path [v,3]: conditioning pins the edge delay
        m = Exponential(1.0)
        t1, t2, t3, tau3 = 0.6, 0.25, 1.4, 1.9
        want = m.laplace(t1) * m.laplace(t1 + t2) * m.laplace(t2) * math.exp(-t3 * tau3)
        got = conditional_laplace_exponential(three_leaf_tree, OBS, m, V, 3, tau3, [t1, t2, t3])
        assert got == pytest.approx(want, rel=1e-12)

    def test_identity_candidate_w_ratio_form(self, three_leaf_tree):
        # path [w,3] = {c, d} with coefficients (t1+t2+t3, t3)
        m = Exponential(1.0)
        t1, t2, t3, tau3 = 0.6, 0.25, 1.4, 1.9
        factor = conditional_tilt_factor([1.0, 1.0], [t1 + t2 + t3, t3], tau3)
        want = m.laplace(t1) * m.laplace(t1 + t2) * m.laplace(t2) * factor
        got = conditional_laplace_exponential(three_leaf_tree, OBS, m, W, 3, tau3, [t1, t2, t3])
        assert got == pytest.approx(want, rel=1e-12)

    def test_all_zero_coefficients(self, three_leaf_tree):
        got = conditional_laplace_exponential(
            three_leaf_tree, OBS, Exponential(1.0), U, 3, 1.0, [0.0, 0.0, 0.0]
        )
        assert got == 1.0

    def test_heterogeneous_rates(self, three_leaf_tree):
        models = [Exponential(r) for r in (1.0, 2.0, 0.5, 3.0, 1.5)]
        t1, t2, t3, tau3 = 0.3, 0.6, 0.9, 1.2
        factor = conditional_tilt_factor(
            [models[EDGE_B].rate, models[EDGE_D].rate], [t3, t3], tau3
        )
        want = models[EDGE_A].laplace(t1) * models[EDGE_E].laplace(t2) * factor
        got = conditional_laplace_exponential(three_leaf_tree, OBS, models, U, 3, tau3, [t1, t2, t3])
        assert got == pytest.approx(want, rel=1e-12)

    def test_rejection_window_monte_carlo(self, three_leaf_tree):
        # windowed conditioning oracle, small version of the acceptance run
        rng = trial_rng(9, 2)
        m = Exponential(1.0)
        t1, t2, t3, tau3 = 0.5, 0.3, 0.8, 1.6
        n, delta = 2_000_000, 0.02
        d_b = rng.exponential(1.0, n)
        d_d = rng.exponential(1.0, n)
        keep = np.abs(d_b + d_d - tau3) < delta
        draws = np.exp(-t3 * (d_b[keep] + d_d[keep]))
        mc = draws.mean()
        se = draws.std(ddof=1) / math.sqrt(keep.sum())
        got = conditional_laplace_exponential(three_leaf_tree, OBS, m, U, 3, tau3, [0.0, 0.0, t3])
        assert abs(got - mc) < max(3 * se, 1e-4)

    def test_non_exponential_on_path(self, three_leaf_tree):
        models = [Exponential(1.0)] * 5
        models[EDGE_D] = Uniform(0.0, 2.0)
        with pytest.raises(UnsupportedDelayModelError):
            conditional_laplace_exponential(three_leaf_tree, OBS, models, U, 3, 1.0, [0.1, 0.1, 0.1])

    def test_non_exponential_off_path_allowed_unless_strict(self, three_leaf_tree):
        models = [Exponential(1.0)] * 5
        models[EDGE_C] = Uniform(0.0, 2.0)  # off every path to observer 3 from u
        val = conditional_laplace_exponential(three_leaf_tree, OBS, models, U, 3, 1.0, [0.1, 0.1, 0.1])
        assert 0 < val <= 1
        with pytest.raises(UnsupportedDelayModelError):
            conditional_laplace_exponential(
                three_leaf_tree, OBS, models, U, 3, 1.0, [0.1, 0.1, 0.1], strict=True
            )

    def test_degenerate_time(self, three_leaf_tree):
        with pytest.raises(DegenerateTimeError):
            conditional_laplace_exponential(three_leaf_tree, OBS, Exponential(1.0), U, 3, 0.0, [0.1, 0.1, 0.1])


class TestHajekCombine:
    def test_d1_ignores_raw(self):
        assert hajek_combine(123.0, [0.7], 1) == 0.7

    def test_constants_fixed_point(self):
        assert hajek_combine(1.0, [1.0, 1.0, 1.0], 3) == 1.0

    def test_weights_sum_to_one(self):
        d = 4
        val = hajek_combine(1.0, [1.0] * d, d)
        assert val == pytest.approx(1.0)

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatchError):
            hajek_combine(1.0, [1.0, 2.0], 3)


class TestCheckStatistic:
    def test_one_at_zero(self, three_leaf_tree):
        obs = Observation(times={1: 0.8, 2: 1.1, 3: 2.3})
        got = check_statistic(three_leaf_tree, OBS, Exponential(1.0), U, obs, [0.0, 0.0, 0.0])
        assert got == 1.0

    def test_single_observer_reduces_to_raw_statistic(self):
        # d=1: the raw weight vanishes and every coefficient on the path
        # equals the single coordinate, so the value is exp(-t tau)
        t = path_tree(4)
        obs = Observation(times={0: 1.3})
        for v in (1, 2, 3):
            got = check_statistic(t, [0], Exponential(1.0), v, obs, [0.7])
            assert got == pytest.approx(math.exp(-0.7 * 1.3), rel=1e-12)

    def test_unbiased_and_variance_reduced(self, three_leaf_tree):
        # small version of the acceptance criterion: mean matches phi_v,
        # variance no worse than the raw statistic
        n = 4000
        observers = OBS
        times = simulate_tree_batch(three_leaf_tree, Exponential(1.0), U, trial_rng(9, 3), n)
        tvec = np.array([0.7, 0.4, 1.1])
        target = candidate_laplace(three_leaf_tree, observers, Exponential(1.0), U, tvec)
        raw = np.exp(-(times[:, observers] @ tvec))
        checked = np.empty(n)
        for i in range(n):
            obs = Observation(times={o: float(times[i, o]) for o in observers})
            checked[i] = check_statistic(three_leaf_tree, observers, Exponential(1.0), U, obs, tvec)
        for sample in (raw, checked):
            se = sample.std(ddof=1) / math.sqrt(n)
            assert abs(sample.mean() - target) < 4 * se
        assert checked.var(ddof=1) <= 1.05 * raw.var(ddof=1)

    def test_requires_exponential(self, three_leaf_tree):
        obs = Observation(times={1: 0.8, 2: 1.1, 3: 2.3})
        with pytest.raises(UnsupportedDelayModelError):
            check_statistic(three_leaf_tree, OBS, Uniform(0.0, 2.0), U, obs, [0.1, 0.1, 0.1])
