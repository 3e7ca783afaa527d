"""SI outbreak simulation.

On trees the infection time of a node is the sum of the sampled delays
on its unique path from the source, so one DFS accumulation suffices.
Small general graphs (used to validate the triangle analysis) go through
first-passage Dijkstra with one delay draw per undirected edge, which is
equivalent to event-driven SI here, and also yields the realized
transmission tree.
"""

from __future__ import annotations

import heapq
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Mapping

import numpy as np

from .delays import DelayModel, Exponential, per_edge_models
from .errors import (
    DisconnectedError,
    EmptyObserversError,
    NodeOutOfRangeError,
    ObserversCoverAllNodesError,
)
from .tree import Tree, build_tree, _check_node

_MAX_TIE_RETRIES = 100


@dataclass(frozen=True)
class Observation:
    """Infection times of the observer nodes, one outbreak realization."""

    times: dict

    def __post_init__(self):
        for node, t in self.times.items():
            if not (np.isfinite(t) and t >= 0):
                raise ValueError(f"bad infection time {t!r} for observer {node}")

    def observers(self) -> tuple[int, ...]:
        return tuple(sorted(self.times))

    def vector(self, order: Iterable[int] | None = None) -> np.ndarray:
        order = self.observers() if order is None else tuple(order)
        return np.array([self.times[o] for o in order], dtype=float)

    def min_observer(self) -> int:
        return min(self.times, key=lambda o: (self.times[o], o))


@dataclass(frozen=True)
class FullInfection:
    """Infection time of every node; times[source] == 0."""

    times: np.ndarray
    source: int


@dataclass(frozen=True)
class TransmissionTree:
    """Infecting neighbor of every node except the source."""

    parent: dict
    source: int


@dataclass(frozen=True)
class Graph:
    """Small undirected connected graph (may contain cycles)."""

    n: int
    edges: tuple
    adjacency: tuple

    @property
    def n_edges(self) -> int:
        return len(self.edges)


def build_graph(n: int, edges: Iterable[tuple[int, int]]) -> Graph:
    """Validate and build a general undirected graph."""
    canonical = []
    seen = set()
    for u, v in edges:
        _check_node(n, u)
        _check_node(n, v)
        u, v = int(u), int(v)
        if u == v:
            raise ValueError(f"self loop at node {u}")
        key = (min(u, v), max(u, v))
        if key in seen:
            raise ValueError(f"edge {key} listed twice")
        seen.add(key)
        canonical.append(key)
    canonical.sort()
    adj = [[] for _ in range(n)]
    for i, (u, v) in enumerate(canonical):
        adj[u].append((v, i))
        adj[v].append((u, i))
    reached = {0}
    stack = [0]
    while stack:
        x = stack.pop()
        for y, _ in adj[x]:
            if y not in reached:
                reached.add(y)
                stack.append(y)
    if len(reached) != n:
        raise DisconnectedError("graph is not connected")
    return Graph(n=n, edges=tuple(canonical), adjacency=tuple(tuple(a) for a in adj))


def _sample_edge_delays(models, rng) -> np.ndarray:
    return np.array([m.sample(rng) for m in models], dtype=float)


def _tree_times_from_delays(tree: Tree, delays: np.ndarray, source: int) -> np.ndarray:
    times = np.zeros(tree.n)
    seen = [False] * tree.n
    seen[source] = True
    queue = deque([source])
    while queue:
        x = queue.popleft()
        for y in tree.adjacency[x]:
            if not seen[y]:
                seen[y] = True
                times[y] = times[x] + delays[tree.edge_id(x, y)]
                queue.append(y)
    return times


def simulate_tree(tree: Tree, delays, source: int, rng: np.random.Generator) -> FullInfection:
    """One outbreak from ``source``; each edge delay sampled once.

    ``delays`` is a DelayModel shared by all edges or a per-edge sequence
    in canonical edge order. Exact ties between node times (probability
    zero) trigger a resample of the whole trial.
    """
    _check_node(tree, source)
    models = per_edge_models(delays, tree.n_edges)
    for _ in range(_MAX_TIE_RETRIES):
        draws = _sample_edge_delays(models, rng)
        times = _tree_times_from_delays(tree, draws, source)
        if np.unique(times).size == tree.n:
            return FullInfection(times=times, source=source)
    raise RuntimeError("exact infection-time ties persisted across resamples")


def simulate_tree_batch(tree: Tree, delays, source: int, rng: np.random.Generator, trials: int) -> np.ndarray:
    """(trials, n) infection-time matrix; vectorized, no tie filtering.

    Meant for Monte-Carlo estimates of expectations, where measure-zero
    ties are irrelevant.
    """
    _check_node(tree, source)
    models = per_edge_models(delays, tree.n_edges)
    draws = np.empty((trials, tree.n_edges))
    for e, m in enumerate(models):
        draws[:, e] = m.sample(rng, size=trials)
    times = np.zeros((trials, tree.n))
    seen = [False] * tree.n
    seen[source] = True
    queue = deque([source])
    while queue:
        x = queue.popleft()
        for y in tree.adjacency[x]:
            if not seen[y]:
                seen[y] = True
                times[:, y] = times[:, x] + draws[:, tree.edge_id(x, y)]
                queue.append(y)
    return times


def observe(full: FullInfection, observers: Iterable[int]) -> Observation:
    """Restrict infection times to the observer set."""
    obs = {int(o) for o in observers}
    n = full.times.shape[0]
    if not obs:
        raise EmptyObserversError("observer set is empty")
    for o in obs:
        if not 0 <= o < n:
            raise NodeOutOfRangeError(f"observer {o} outside 0..{n - 1}")
    if len(obs) >= n:
        raise ObserversCoverAllNodesError("observers must be a proper subset of the nodes")
    return Observation(times={o: float(full.times[o]) for o in sorted(obs)})


def first_passage_times(graph: Graph, edge_delays: np.ndarray, source: int) -> tuple[np.ndarray, np.ndarray]:
    """Dijkstra with the sampled delays as weights.

    Returns (times, parent); parent[source] == -1, parent[v] is the
    neighbor on v's minimizing path, i.e. the node that infected v.
    """
    _check_node(graph.n, source)
    times = np.full(graph.n, np.inf)
    parent = np.full(graph.n, -1, dtype=int)
    times[source] = 0.0
    done = [False] * graph.n
    heap = [(0.0, source)]
    while heap:
        d, x = heapq.heappop(heap)
        if done[x]:
            continue
        done[x] = True
        for y, eid in graph.adjacency[x]:
            nd = d + edge_delays[eid]
            if nd < times[y]:
                times[y] = nd
                parent[y] = x
                heapq.heappush(heap, (nd, y))
    if not all(done):
        raise DisconnectedError("graph is not connected")
    return times, parent


def simulate_graph_first_passage(
    graph: Graph, delays, source: int, rng: np.random.Generator
) -> tuple[FullInfection, TransmissionTree]:
    """First-passage SI outbreak on a general graph.

    Each undirected edge gets a single delay draw; a node's infection
    time is the minimum over paths of summed draws, which matches
    clock-starts-at-infection event semantics under one draw per edge.
    """
    _check_node(graph.n, source)
    models = per_edge_models(delays, graph.n_edges)
    for _ in range(_MAX_TIE_RETRIES):
        draws = _sample_edge_delays(models, rng)
        times, parent = first_passage_times(graph, draws, source)
        if np.unique(times).size == graph.n:
            tt = TransmissionTree(
                parent={v: int(parent[v]) for v in range(graph.n) if v != source},
                source=source,
            )
            return FullInfection(times=times, source=source), tt
    raise RuntimeError("exact infection-time ties persisted across resamples")


# ------------------------------------------------------------ triangle

# Fixture for the cyclic-network validation: nodes s=0, o=1, v=2 with
# edges {s,o}, {s,v}, {v,o} carrying exponential rates (r1, r2, r3).
# The three possible transmission trees:
#   tree 1: s infects o, o infects v
#   tree 2: s infects v, v infects o
#   tree 3: s infects both neighbors directly

def triangle_graph() -> Graph:
    return build_graph(3, [(0, 1), (0, 2), (2, 1)])


def triangle_tree_probabilities(rates) -> tuple[float, float, float]:
    """Closed-form law of the realized transmission tree."""
    r1, r2, r3 = (float(r) for r in rates)
    p1 = r1 * r3 / ((r1 + r2) * (r2 + r3))
    p2 = r2 * r3 / ((r1 + r2) * (r1 + r3))
    p3 = r1 * r2 * (r1 + r2 + 2 * r3) / ((r1 + r2) * (r2 + r3) * (r3 + r1))
    return p1, p2, p3


def triangle_conditional_mean_times(rates) -> tuple[float, float, float]:
    """Closed-form E[observer time | transmission tree].

    Given tree 1 the observer time is Exponential(r1+r2); given tree 2 it
    adds an independent Exponential(r1+r3); given tree 3 the second stage
    appears with probability (r2+r3)/(r1+r2+2r3).
    """
    r1, r2, r3 = (float(r) for r in rates)
    m1 = 1.0 / (r1 + r2)
    m2 = 1.0 / (r1 + r2) + 1.0 / (r1 + r3)
    p_two_stage = (r2 + r3) / (r1 + r2 + 2 * r3)
    m3 = 1.0 / (r1 + r2) + p_two_stage / (r1 + r3)
    return m1, m2, m3


@dataclass(frozen=True)
class TriangleCensus:
    """Monte-Carlo summary of the triangle transmission-tree law."""

    rates: tuple
    trials: int
    counts: tuple
    probabilities: tuple
    conditional_means: tuple
    conditional_stds: tuple
    observer_times: tuple  # per-tree arrays of observer infection times


def triangle_census(rates, trials: int, rng: np.random.Generator) -> TriangleCensus:
    """Vectorized Monte Carlo of the triangle outbreak.

    Event logic with one draw per edge: the observer time is
    min(d1, d2 + d3); tree 1 occurs when d1 + d3 < d2, tree 2 when
    d2 + d3 < d1, tree 3 otherwise.
    """
    r1, r2, r3 = (float(r) for r in rates)
    if min(r1, r2, r3) <= 0:
        raise ValueError("rates must be positive")
    if trials < 1:
        raise ValueError("need at least one trial")
    d1 = rng.exponential(1.0 / r1, trials)
    d2 = rng.exponential(1.0 / r2, trials)
    d3 = rng.exponential(1.0 / r3, trials)
    # exact ties are probability zero; resample any offending rows
    for _ in range(_MAX_TIE_RETRIES):
        ties = (d1 == d2 + d3) | (d2 == d1 + d3) | (d1 == d2) | (d3 == 0.0)
        if not np.any(ties):
            break
        k = int(ties.sum())
        d1[ties] = rng.exponential(1.0 / r1, k)
        d2[ties] = rng.exponential(1.0 / r2, k)
        d3[ties] = rng.exponential(1.0 / r3, k)
    tau_o = np.minimum(d1, d2 + d3)
    tree1 = (d1 + d3) < d2
    tree2 = (d2 + d3) < d1
    tree3 = ~(tree1 | tree2)
    samples = (tau_o[tree1], tau_o[tree2], tau_o[tree3])
    counts = tuple(int(m.sum()) for m in (tree1, tree2, tree3))
    return TriangleCensus(
        rates=(r1, r2, r3),
        trials=trials,
        counts=counts,
        probabilities=tuple(c / trials for c in counts),
        conditional_means=tuple(float(s.mean()) if s.size else float("nan") for s in samples),
        conditional_stds=tuple(float(s.std(ddof=1)) if s.size > 1 else float("nan") for s in samples),
        observer_times=samples,
    )
