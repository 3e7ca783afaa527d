import numpy as np
import pytest

from treelocate import (
    Exponential,
    Observation,
    build_tree,
    equivalence_classes,
    feasible_candidates,
    feasible_classes,
    observe,
    path_tree,
    random_tree_prufer,
    simulate_tree,
    star_arrangement_of,
    sufficient_observers,
    trial_rng,
)
from treelocate.errors import (
    EmptyObserversError,
    NotAStarError,
    ObserversCoverAllNodesError,
    TiedMinimumError,
)
from treelocate.reduction import EquivalenceClass, feasible_classes_definitional

from conftest import NINE_OBSERVERS


def observation_with_min(observers, winner):
    """Observation whose unique minimum sits at ``winner``."""
    times = {o: 5.0 + o for o in observers}
    times[winner] = 1.0
    return Observation(times=times)


class TestEquivalenceClasses:
    def test_nine_observer_fixture(self, nine_observer_tree):
        classes = equivalence_classes(nine_observer_tree, NINE_OBSERVERS)
        got = {cls.members: cls.boundary for cls in classes}
        assert got == {
            frozenset({10, 11, 12, 13, 14, 15}): frozenset({7, 8, 9}),
            frozenset({0, 16}): frozenset({2, 3, 4, 5}),
            frozenset({17, 18, 19}): frozenset({2}),
            frozenset({20, 21, 22, 23}): frozenset({1, 2}),
        }

    def test_partition(self, nine_observer_tree):
        classes = equivalence_classes(nine_observer_tree, NINE_OBSERVERS)
        union = set()
        for cls in classes:
            assert not (union & cls.members)
            union |= cls.members
        assert union == set(range(24)) - NINE_OBSERVERS

    def test_single_nonobserver(self):
        t = path_tree(4)
        classes = equivalence_classes(t, [0, 1, 3])
        assert len(classes) == 1
        assert classes[0].members == frozenset({2})
        assert classes[0].boundary == frozenset({1, 3})

    def test_short_path(self):
        t = path_tree(3)
        classes = equivalence_classes(t, [0, 2])
        assert classes == [EquivalenceClass(members=frozenset({1}), boundary=frozenset({0, 2}))]

    def test_empty_observers(self):
        with pytest.raises(EmptyObserversError):
            equivalence_classes(path_tree(3), [])

    def test_cover_all(self):
        with pytest.raises(ObserversCoverAllNodesError):
            equivalence_classes(path_tree(3), [0, 1, 2])


class TestFeasibleClasses:
    def test_observer2_first(self, nine_observer_tree):
        obs = observation_with_min(NINE_OBSERVERS, winner=2)
        feas = feasible_classes(nine_observer_tree, NINE_OBSERVERS, obs)
        assert {cls.members for cls in feas} == {
            frozenset({0, 16}),
            frozenset({17, 18, 19}),
            frozenset({20, 21, 22, 23}),
        }

    def test_observer3_first(self, nine_observer_tree):
        obs = observation_with_min(NINE_OBSERVERS, winner=3)
        feas = feasible_classes(nine_observer_tree, NINE_OBSERVERS, obs)
        assert [cls.members for cls in feas] == [frozenset({0, 16})]

    def test_single_class_always_feasible(self):
        t = path_tree(3)
        obs = Observation(times={0: 0.4, 2: 2.0})
        feas = feasible_classes(t, [0, 2], obs)
        assert len(feas) == 1

    def test_tied_minimum(self):
        t = path_tree(4)
        with pytest.raises(TiedMinimumError):
            feasible_classes(t, [0, 3], Observation(times={0: 1.0, 3: 1.0}))

    def test_observation_mismatch(self):
        t = path_tree(4)
        with pytest.raises(ValueError):
            feasible_classes(t, [0, 3], Observation(times={0: 1.0, 2: 2.0}))


class TestStarArrangement:
    def test_fixture_center(self, nine_observer_tree):
        obs = observation_with_min(NINE_OBSERVERS, winner=2)
        feas = feasible_classes(nine_observer_tree, NINE_OBSERVERS, obs)
        star = star_arrangement_of(feas)
        assert star.center == 2

    def test_single_class_no_center(self, nine_observer_tree):
        obs = observation_with_min(NINE_OBSERVERS, winner=3)
        star = star_arrangement_of(feasible_classes(nine_observer_tree, NINE_OBSERVERS, obs))
        assert star.center is None

    def test_leaf_chain_center(self, star3_tree):
        # observers are 0..4, non-observers ell=5 and r=6; observer 0 first
        observers = [0, 1, 2, 3, 4]
        times = {o: 3.0 + o for o in observers}
        times[0] = 0.5
        feas = feasible_classes(star3_tree, observers, Observation(times=times))
        star = star_arrangement_of(feas)
        assert {cls.members for cls in star.classes} == {frozenset({5}), frozenset({6})}
        assert star.center == 0

    def test_not_a_star(self):
        a = EquivalenceClass(members=frozenset({1}), boundary=frozenset({0}))
        b = EquivalenceClass(members=frozenset({2}), boundary=frozenset({3}))
        with pytest.raises(NotAStarError):
            star_arrangement_of([a, b])


class TestSufficientObservers:
    def test_observer2_first(self, nine_observer_tree):
        obs = observation_with_min(NINE_OBSERVERS, winner=2)
        assert sufficient_observers(nine_observer_tree, NINE_OBSERVERS, obs) == frozenset({1, 2, 3, 4, 5})

    def test_observer3_first(self, nine_observer_tree):
        obs = observation_with_min(NINE_OBSERVERS, winner=3)
        assert sufficient_observers(nine_observer_tree, NINE_OBSERVERS, obs) == frozenset({2, 3, 4, 5})

    def test_boundary_equals_full_observer_set(self):
        t = path_tree(3)
        obs = Observation(times={0: 0.4, 2: 2.0})
        assert sufficient_observers(t, [0, 2], obs) == frozenset({0, 2})


class TestSimulationProperties:
    def test_theorem_properties_on_random_outbreaks(self):
        # 200 outbreaks here; the acceptance suite runs the full 10^3
        rng = trial_rng(77)
        violations = 0
        for trial in range(200):
            t_rng = trial_rng(77, trial)
            tree = random_tree_prufer(30, t_rng)
            nodes = np.arange(30)
            observers = t_rng.choice(nodes, size=5, replace=False)
            non_obs = sorted(set(range(30)) - set(observers.tolist()))
            source = int(t_rng.choice(non_obs))
            full = simulate_tree(tree, Exponential(1.0), source, t_rng)
            obs = observe(full, observers)

            fast = feasible_classes(tree, observers, obs)
            slow = feasible_classes_definitional(tree, observers, obs)
            assert fast == slow
            assert len(fast) >= 1
            assert any(source in cls.members for cls in fast)
            star = star_arrangement_of(fast)  # must not raise
            assert source in feasible_candidates(tree, observers, obs)
        assert violations == 0
