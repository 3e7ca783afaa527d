"""Benchmark experiments, each a pure function of (config, seed).

Every trial draws its generator from (seed, cell, trial) through a
counter-based stream, so reruns are identical for any worker count; the
``threads`` knob only parallelizes the trial loop.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np
from scipy import stats

from .delays import DelayModel, Exponential, PositiveNormal, delay_from_spec, per_edge_models
from .errors import ConfigInvalidError, NotEnoughLeavesError
from .estimate import GridSpec, check_estimate, edge_distance_error, hat_estimate
from .reduction import feasible_candidates
from .rng import trial_rng
from .simulate import (
    observe,
    simulate_tree,
    simulate_tree_batch,
    triangle_census,
    triangle_conditional_mean_times,
    triangle_tree_probabilities,
)
from .tree import (
    EdgeListData,
    Tree,
    build_tree,
    diameter,
    leaves,
    path_tree,
    random_tree_prufer,
)

DEFAULT_CONFUSION_DELAYS = (
    {"kind": "posnormal", "mean": 1.0, "stddev": 0.25},
    {"kind": "posnormal", "mean": 1.0, "stddev": 0.5},
    {"kind": "posnormal", "mean": 1.0, "stddev": 1.0},
    {"kind": "uniform", "lower": 0.0, "upper": 2.0},
    {"kind": "exponential", "rate": 1.0},
    {"kind": "abscauchy", "scale": 1.0},
)

EXPERIMENT_KINDS = (
    "confusion",
    "scaling_nodes",
    "scaling_observers",
    "normalized_diameter",
    "river",
    "check_vs_hat",
    "triangle",
    "sufficiency_demo",
)

_PAPER_TRIALS = {
    "confusion": 1000,
    "scaling_nodes": 1000,
    "scaling_observers": 1000,
    "normalized_diameter": 1000,
    "river": 1000,
    "check_vs_hat": 1000,
    "triangle": 1_000_000,
    "sufficiency_demo": 1_000_000,
}

_DESK_TRIALS = {
    "confusion": 200,
    "scaling_nodes": 200,
    "scaling_observers": 200,
    "normalized_diameter": 200,
    "river": 200,
    "check_vs_hat": 200,
    "triangle": 200_000,
    "sufficiency_demo": 100_000,
}

_MAX_TREE_RESAMPLES = 100


@dataclass(frozen=True)
class ExperimentConfig:
    """One experiment run. ``seed`` has no default on purpose: runs must
    be reproducible, never wall-clock seeded."""

    kind: str
    seed: int
    trials: int | None = None
    delays: tuple = ()                      # delay spec dicts
    sizes: tuple = (20, 40, 60, 80, 100)    # tree sizes (node scaling)
    observer_counts: tuple = (1, 2, 5, 10, 20, 40)
    n_observers: int = 2                    # observers per trial (node scaling)
    path_nodes: int = 11                    # confusion path length
    rates: tuple = ((1.0, 1.0, 1.0), (1.0, 2.0, 3.0))
    star_leaves: int = 3                    # sufficiency fan-out n
    network_file: str | None = None
    root_label: str | None = None
    use_reduction: bool = True
    threads: int = 1
    paper_scale: bool = False
    grid: GridSpec = field(default_factory=GridSpec)

    def resolved_trials(self) -> int:
        if self.trials is not None:
            return self.trials
        table = _PAPER_TRIALS if self.paper_scale else _DESK_TRIALS
        return table[self.kind]

    def delay_models(self) -> tuple[DelayModel, ...]:
        specs = self.delays or ({"kind": "exponential", "rate": 1.0},)
        return tuple(delay_from_spec(dict(s)) for s in specs)


def validate_config(cfg: ExperimentConfig) -> ExperimentConfig:
    if cfg.kind not in EXPERIMENT_KINDS:
        raise ConfigInvalidError(f"unknown experiment kind {cfg.kind!r}")
    if not isinstance(cfg.seed, int):
        raise ConfigInvalidError("seed must be an integer (no wall-clock default)")
    if cfg.resolved_trials() < 1:
        raise ConfigInvalidError("trials must be >= 1")
    if any(n < 2 for n in cfg.sizes):
        raise ConfigInvalidError("tree sizes must be >= 2")
    if cfg.path_nodes < 3:
        raise ConfigInvalidError("confusion path needs at least 3 nodes")
    if any(k < 1 for k in cfg.observer_counts):
        raise ConfigInvalidError("observer counts must be >= 1")
    if cfg.n_observers < 1:
        raise ConfigInvalidError("n_observers must be >= 1")
    if cfg.star_leaves < 1:
        raise ConfigInvalidError("star_leaves must be >= 1")
    if cfg.threads < 1:
        raise ConfigInvalidError("threads must be >= 1")
    for rates in cfg.rates:
        if len(rates) != 3 or any(r <= 0 for r in rates):
            raise ConfigInvalidError(f"triangle rates must be 3 positive numbers, got {rates}")
    try:
        cfg.delay_models()
    except ValueError as exc:
        raise ConfigInvalidError(str(exc)) from exc
    return cfg


def config_from_dict(data: dict) -> ExperimentConfig:
    """Build a config from parsed JSON; unknown keys are rejected."""
    data = dict(data)
    if "grid" in data and not isinstance(data["grid"], GridSpec):
        data["grid"] = GridSpec(**data["grid"])
    for key in ("delays", "sizes", "observer_counts"):
        if key in data and data[key] is not None:
            data[key] = tuple(data[key])
    if "rates" in data and data["rates"] is not None:
        data["rates"] = tuple(tuple(float(x) for x in r) for r in data["rates"])
    known = set(ExperimentConfig.__dataclass_fields__)
    unknown = set(data) - known
    if unknown:
        raise ConfigInvalidError(f"unknown config keys: {sorted(unknown)}")
    try:
        cfg = ExperimentConfig(**data)
    except TypeError as exc:
        raise ConfigInvalidError(str(exc)) from exc
    return validate_config(cfg)


def _map_trials(worker, tasks: list, threads: int) -> list:
    if threads <= 1 or len(tasks) <= 1:
        return [worker(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(worker, tasks, chunksize=max(1, len(tasks) // (4 * threads))))


# ------------------------------------------------------------ confusion

def _confusion_trial(args):
    tree, observers, delay, grid, use_reduction, seed, cell, trial, source = args
    rng = trial_rng(seed, cell, trial)
    full = simulate_tree(tree, delay, source, rng)
    obs = observe(full, observers)
    report = hat_estimate(tree, observers, delay, obs, grid, use_reduction)
    return report.selected


@dataclass(frozen=True)
class ConfusionResult:
    sources: tuple
    candidates: tuple
    trials: int
    matrices: tuple  # (delay label, counts ndarray) pairs

    def rows_for(self, matrix: np.ndarray) -> list[dict]:
        out = []
        for i, s in enumerate(self.sources):
            row = {"true_source": s}
            row.update({f"est_{c}": int(matrix[i, j]) for j, c in enumerate(self.candidates)})
            out.append(row)
        return out

    def diagonal_fraction(self, matrix: np.ndarray) -> float:
        hits = sum(
            matrix[i, self.candidates.index(s)] for i, s in enumerate(self.sources)
        )
        return float(hits) / float(matrix.sum())


def run_confusion(cfg: ExperimentConfig) -> ConfusionResult:
    """Path network, observer at node 0, one matrix per delay model."""
    validate_config(cfg)
    trials = cfg.resolved_trials()
    tree = path_tree(cfg.path_nodes)
    observers = (0,)
    sources = tuple(range(1, cfg.path_nodes))
    candidates = sources
    matrices = []
    for d_idx, delay in enumerate(cfg.delay_models()):
        counts = np.zeros((len(sources), len(candidates)), dtype=int)
        tasks = [
            (tree, observers, delay, cfg.grid, cfg.use_reduction,
             cfg.seed, d_idx * len(sources) + s_idx, trial, source)
            for s_idx, source in enumerate(sources)
            for trial in range(trials)
        ]
        picks = _map_trials(_confusion_trial, tasks, cfg.threads)
        for task, pick in zip(tasks, picks):
            source = task[-1]
            counts[sources.index(source), candidates.index(pick)] += 1
        matrices.append((delay.label(), counts))
    return ConfusionResult(
        sources=sources, candidates=candidates, trials=trials, matrices=tuple(matrices)
    )


# ------------------------------------------------------------- scaling

def _leafy_random_tree(n: int, n_observers: int, rng) -> Tree:
    """Uniform random tree with at least n_observers leaves; bounded retries."""
    for _ in range(_MAX_TREE_RESAMPLES):
        tree = random_tree_prufer(n, rng)
        if len(leaves(tree)) >= n_observers and n - n_observers >= 1:
            return tree
    raise NotEnoughLeavesError(
        f"no tree on {n} nodes with {n_observers} leaf observers after "
        f"{_MAX_TREE_RESAMPLES} draws"
    )


def _random_tree_trial(args):
    (n, n_observers, delay, grid, use_reduction, seed, cell, trial, paired) = args
    rng = trial_rng(seed, cell, trial)
    tree = _leafy_random_tree(n, n_observers, rng)
    leaf_ids = np.array(sorted(leaves(tree)))
    observers = rng.choice(leaf_ids, size=n_observers, replace=False)
    non_observers = sorted(set(range(n)) - set(int(o) for o in observers))
    source = int(non_observers[rng.integers(len(non_observers))])
    full = simulate_tree(tree, delay, source, rng)
    obs = observe(full, observers)
    hat = hat_estimate(tree, observers, delay, obs, grid, use_reduction)
    err_hat = edge_distance_error(tree, hat.selected, source)
    err_check = None
    if paired:
        check = check_estimate(tree, observers, delay, obs, grid, use_reduction)
        err_check = edge_distance_error(tree, check.selected, source)
    return err_hat, err_check, diameter(tree)


@dataclass(frozen=True)
class ScalingResult:
    vary: str          # "nodes" | "observers" | "normalized" | "check_vs_hat"
    rows: tuple        # dict per cell


def _mean_std(values) -> tuple[float, float]:
    arr = np.asarray(values, dtype=float)
    return float(arr.mean()), float(arr.std(ddof=1)) if arr.size > 1 else 0.0


def run_scaling(cfg: ExperimentConfig) -> ScalingResult:
    """Mean edge-distance error as tree size or observer count grows."""
    validate_config(cfg)
    trials = cfg.resolved_trials()
    vary_observers = cfg.kind == "scaling_observers"
    cells = cfg.observer_counts if vary_observers else cfg.sizes
    rows = []
    for delay_idx, delay in enumerate(cfg.delay_models()):
        for c_idx, cell in enumerate(cells):
            n = 100 if vary_observers else cell
            n_obs = cell if vary_observers else cfg.n_observers
            tasks = [
                (n, n_obs, delay, cfg.grid, cfg.use_reduction,
                 cfg.seed, delay_idx * len(cells) + c_idx, trial, False)
                for trial in range(trials)
            ]
            outcomes = _map_trials(_random_tree_trial, tasks, cfg.threads)
            mean, std = _mean_std([e for e, _, _ in outcomes])
            rows.append({
                "delay": delay.label(),
                ("observers" if vary_observers else "nodes"): cell,
                "trials": trials,
                "mean_error": mean,
                "std_error": std,
            })
    return ScalingResult(vary="observers" if vary_observers else "nodes", rows=tuple(rows))


def run_normalized(cfg: ExperimentConfig) -> ScalingResult:
    """Edge-distance error divided by the tree diameter, per trial."""
    validate_config(cfg)
    trials = cfg.resolved_trials()
    rows = []
    for delay_idx, delay in enumerate(cfg.delay_models()):
        for c_idx, n in enumerate(cfg.sizes):
            tasks = [
                (n, cfg.n_observers, delay, cfg.grid, cfg.use_reduction,
                 cfg.seed, delay_idx * len(cfg.sizes) + c_idx, trial, False)
                for trial in range(trials)
            ]
            outcomes = _map_trials(_random_tree_trial, tasks, cfg.threads)
            normalized = [e / d for e, _, d in outcomes]
            mean, std = _mean_std(normalized)
            rows.append({
                "delay": delay.label(),
                "nodes": n,
                "trials": trials,
                "mean_normalized_error": mean,
                "std_normalized_error": std,
                "mean_diameter": float(np.mean([d for _, _, d in outcomes])),
            })
    return ScalingResult(vary="normalized", rows=tuple(rows))


def run_check_vs_hat(cfg: ExperimentConfig) -> ScalingResult:
    """Paired comparison of the two estimators on the same outbreaks."""
    validate_config(cfg)
    delays = cfg.delay_models()
    if len(delays) != 1 or not isinstance(delays[0], Exponential):
        raise ConfigInvalidError("check_vs_hat needs a single exponential delay spec")
    delay = delays[0]
    trials = cfg.resolved_trials()
    rows = []
    for c_idx, n in enumerate(cfg.sizes):
        tasks = [
            (n, cfg.n_observers, delay, cfg.grid, cfg.use_reduction,
             cfg.seed, c_idx, trial, True)
            for trial in range(trials)
        ]
        outcomes = _map_trials(_random_tree_trial, tasks, cfg.threads)
        hat_mean, hat_std = _mean_std([e for e, _, _ in outcomes])
        check_mean, check_std = _mean_std([c for _, c, _ in outcomes])
        rows.append({
            "nodes": n,
            "trials": trials,
            "hat_mean_error": hat_mean,
            "hat_std_error": hat_std,
            "check_mean_error": check_mean,
            "check_std_error": check_std,
        })
    return ScalingResult(vary="check_vs_hat", rows=tuple(rows))


# --------------------------------------------------------------- river

def _river_trial(args):
    tree, delays, root, n_observers, grid, use_reduction, seed, trial = args
    rng = trial_rng(seed, trial)
    pool = np.array([v for v in range(tree.n) if v != root])
    observers = rng.choice(pool, size=n_observers, replace=False)
    full = simulate_tree(tree, delays, root, rng)
    obs = observe(full, observers)
    report = hat_estimate(tree, observers, delays, obs, grid, use_reduction)
    return report.selected


@dataclass(frozen=True)
class RiverResult:
    labels: tuple
    root: int
    trials: int
    frequencies: np.ndarray
    distances: tuple                # edge distance of each node to the root
    summary: dict

    def rows(self) -> list[dict]:
        order = sorted(range(len(self.labels)), key=lambda v: (-self.frequencies[v], v))
        return [
            {
                "node": v,
                "label": self.labels[v],
                "edge_distance_to_root": self.distances[v],
                "frequency": float(self.frequencies[v]),
            }
            for v in order
        ]


def river_delay_models(data: EdgeListData) -> list[DelayModel]:
    """Per-edge positive-normal models from the file's (mu, sigma) columns."""
    if data.edge_params is None or any(len(p) < 2 for p in data.edge_params):
        raise ConfigInvalidError("river network file needs 'u v mu sigma' lines")
    return [PositiveNormal(mu, sigma) for mu, sigma, *_ in data.edge_params]


def run_river(cfg: ExperimentConfig, data: EdgeListData) -> RiverResult:
    """Outbreaks from the river root; observers resampled every trial."""
    validate_config(cfg)
    tree = data.tree
    delays = river_delay_models(data)
    root = data.node_for_label(cfg.root_label) if cfg.root_label else data.node_for_label(data.labels[0])
    n_obs = 3
    if tree.n <= n_obs + 1:
        raise ConfigInvalidError("river network too small for 3 observers")
    trials = cfg.resolved_trials()
    tasks = [
        (tree, delays, root, n_obs, cfg.grid, cfg.use_reduction, cfg.seed, trial)
        for trial in range(trials)
    ]
    picks = _map_trials(_river_trial, tasks, cfg.threads)
    freqs = np.zeros(tree.n)
    for p in picks:
        freqs[p] += 1.0
    freqs /= trials
    dist = tuple(edge_distance_error(tree, v, root) for v in range(tree.n))
    nearest5 = sorted((v for v in range(tree.n) if v != root), key=lambda v: (dist[v], v))[:5]
    summary = {
        "trials": trials,
        "root": int(root),
        "root_label": data.labels[root],
        "root_fraction": float(freqs[root]),
        "nearest5_fraction": float(sum(freqs[v] for v in nearest5)),
        "nearest5_plus_root_fraction": float(freqs[root] + sum(freqs[v] for v in nearest5)),
        "nearest5_nodes": [data.labels[v] for v in nearest5],
    }
    return RiverResult(
        labels=data.labels, root=root, trials=trials, frequencies=freqs,
        distances=dist, summary=summary,
    )


# ------------------------------------------------------------- triangle

@dataclass(frozen=True)
class TriangleResult:
    rows: tuple
    passed: bool


def run_triangle(cfg: ExperimentConfig) -> TriangleResult:
    """Monte-Carlo validation of the triangle transmission-tree law.

    Empirical tree probabilities and conditional observer-time means must
    sit within 4 standard errors of their closed forms, and the observer
    time given tree 1 must look Exponential(r1+r2) - the naive marginal
    Exponential(r1) is the regression guard and must be rejected.
    """
    validate_config(cfg)
    trials = cfg.resolved_trials()
    rows = []
    passed = True
    for r_idx, rates in enumerate(cfg.rates):
        census = triangle_census(rates, trials, trial_rng(cfg.seed, r_idx))
        exact_p = triangle_tree_probabilities(rates)
        exact_m = triangle_conditional_mean_times(rates)
        for k in range(3):
            p_se = math.sqrt(exact_p[k] * (1 - exact_p[k]) / trials)
            m_se = census.conditional_stds[k] / math.sqrt(max(census.counts[k], 1))
            p_ok = abs(census.probabilities[k] - exact_p[k]) <= 4 * p_se
            m_ok = abs(census.conditional_means[k] - exact_m[k]) <= 4 * m_se
            passed &= p_ok and m_ok
            rows.append({
                "rates": "/".join(f"{r:g}" for r in rates),
                "tree": k + 1,
                "prob_mc": census.probabilities[k],
                "prob_exact": exact_p[k],
                "prob_ok": p_ok,
                "mean_mc": census.conditional_means[k],
                "mean_exact": exact_m[k],
                "mean_ok": m_ok,
            })
        r1, r2, _ = rates
        sample = census.observer_times[0]
        ks_correct = stats.kstest(sample, "expon", args=(0.0, 1.0 / (r1 + r2)))
        ks_naive = stats.kstest(sample, "expon", args=(0.0, 1.0 / r1))
        ks_ok = ks_correct.pvalue > 0.01 and ks_naive.pvalue < 0.01
        passed &= ks_ok
        rows.append({
            "rates": "/".join(f"{r:g}" for r in rates),
            "tree": 1,
            "ks_correct_pvalue": float(ks_correct.pvalue),
            "ks_naive_pvalue": float(ks_naive.pvalue),
            "ks_ok": ks_ok,
        })
    return TriangleResult(rows=tuple(rows), passed=passed)


# ----------------------------------------------------------- sufficiency

def sufficiency_tree(n: int) -> tuple[Tree, tuple, int, int, int]:
    """Leaf-observer chain: observers 0..n+1, internal ell=n+2 and r=n+3.

    Node n+1 hangs off ell, observers 1..n hang off r, and 0 sits between
    ell and r (the center of the star once it is infected first).
    """
    ell, r = n + 2, n + 3
    edges = [(n + 1, ell), (ell, 0), (0, r)] + [(r, i) for i in range(1, n + 1)]
    tree = build_tree(n + 4, edges)
    observers = tuple(range(n + 2))
    return tree, observers, ell, r, n + 1


@dataclass(frozen=True)
class SufficiencyResult:
    rows: tuple
    summary: dict
    passed: bool
    samples: tuple  # conditional observation times per source, for plotting


def run_sufficiency(cfg: ExperimentConfig) -> SufficiencyResult:
    """Conditional law of the far observer's time given that the center
    observer is infected first, under the two adjacent sources.

    Dropping the center's time loses sufficiency: the conditional means
    differ, which the run must demonstrate beyond 4 combined standard
    errors.
    """
    validate_config(cfg)
    n = cfg.star_leaves
    tree, observers, ell, r, far = sufficiency_tree(n)
    delays = cfg.delay_models()
    if len(delays) != 1:
        raise ConfigInvalidError("sufficiency_demo takes a single delay spec")
    delay = delays[0]
    target = cfg.resolved_trials()

    rows = []
    samples = []
    stats_per_source = []
    for s_idx, source in enumerate((ell, r)):
        accepted = np.empty(0)
        drawn = 0
        batch = max(4 * target, 10_000)
        rng = trial_rng(cfg.seed, s_idx)
        while accepted.size < target and drawn < 200 * target + 10 * batch:
            times = simulate_tree_batch(tree, delay, source, rng, batch)
            drawn += batch
            keep = times[:, 0] < times[:, list(observers[1:])].min(axis=1)
            accepted = np.concatenate([accepted, times[keep, far]])
        accepted = accepted[:target]
        if accepted.size < target:
            raise RuntimeError("conditioning event acceptance too low")
        mean = float(accepted.mean())
        se = float(accepted.std(ddof=1) / math.sqrt(accepted.size))
        frac = accepted.size / drawn  # lower bound; last batch may overshoot
        stats_per_source.append((mean, se))
        samples.append(accepted)
        rows.append({
            "source": "adjacent" if source == ell else "far_hub",
            "source_node": source,
            "accepted": int(accepted.size),
            "acceptance_fraction_lb": float(frac),
            "conditional_mean": mean,
            "standard_error": se,
        })
    (m_ell, se_ell), (m_r, se_r) = stats_per_source
    combined_se = math.sqrt(se_ell**2 + se_r**2)
    separation = abs(m_ell - m_r) / combined_se
    passed = separation > 4.0
    summary = {
        "difference": m_r - m_ell,
        "combined_se": combined_se,
        "separation_in_se": separation,
        "passed": passed,
    }
    return SufficiencyResult(
        rows=tuple(rows), summary=summary, passed=passed,
        samples=tuple(np.asarray(s) for s in samples),
    )


# ------------------------------------------------- synthetic river data

def synthetic_river_lines(n: int = 246, seed: int = 74901) -> list[str]:
    """Deterministic river-like benchmark tree as edge-list lines.

    Long channels with occasional tributaries; per-edge mu uniform in
    [0.5, 2] with sigma = mu/4. Labeled synthetic in the header: it is a
    stand-in for externally calibrated basin data, not a real network.
    """
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(seed)))
    parents = {}
    tips = [0]
    for v in range(1, n):
        if rng.random() < 0.65 or len(tips) == 0:
            i = int(rng.integers(len(tips)))
            parent = tips.pop(i)
        else:
            parent = int(rng.integers(v))
        parents[v] = parent
        tips.append(v)
    lines = [
        "# synthetic river-like benchmark network (NOT real basin data)",
        f"# {n} nodes; root n000; columns: upstream downstream mu sigma",
    ]
    for v in range(1, n):
        mu = float(rng.uniform(0.5, 2.0))
        sigma = mu / 4.0
        lines.append(f"n{parents[v]:03d} n{v:03d} {mu:.6f} {sigma:.6f}")
    return lines
