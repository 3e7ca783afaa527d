"""Joint Laplace transforms of observer infection times.

For a candidate source v the transform factorizes over edges through the
path-incidence matrix A_v (rows: observers, columns: edges, 1 where the
edge lies on the candidate-observer path):

    phi_v(t) = prod_e phi_e((t A_v)(e)),

with zero-coefficient edges contributing factor 1 and skipped. The
empirical transform averages exp(-<t, tau>) over observed outbreaks.
For exponential delays the transform conditioned on one observer's time
is available in closed form through a ratio of hypoexponential
densities, and the conditional transforms combine with the raw
exponential statistic into an unbiased, variance-reduced estimate of
phi_v used by the source-check estimator.

Evaluators accept a single argument vector (dim,) or a batch (m, dim),
in ascending-observer coordinate order.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .delays import DelayModel, EdgeLaplaceTable, Exponential, per_edge_models
from .errors import (
    CandidateIsObserverError,
    DegenerateTimeError,
    DimensionMismatchError,
    EmptyObserversError,
    NegativeArgumentError,
    NoSamplesError,
    UnsupportedDelayModelError,
)
from .hypoexp import conditional_tilt_factor, exp_divided_difference_log
from .simulate import Observation
from .tree import Tree, path, _check_node


@dataclass(frozen=True)
class PathIncidenceMatrix:
    """0/1 matrix over (observer, edge): 1 where the edge is on the
    candidate-to-observer path. Row order is ascending observer id."""

    candidate: int
    observers: tuple
    matrix: np.ndarray

    def row(self, observer: int) -> np.ndarray:
        return self.matrix[self.observers.index(observer)]


def _sorted_observers(tree: Tree, observers: Iterable[int]) -> tuple:
    out = tuple(sorted(int(o) for o in set(observers)))
    if not out:
        raise EmptyObserversError("observer set is empty")
    for o in out:
        _check_node(tree, o)
    return out


def incidence_matrix(tree: Tree, observers: Iterable[int], candidate: int) -> PathIncidenceMatrix:
    """A_v for the given candidate source."""
    obs = _sorted_observers(tree, observers)
    _check_node(tree, candidate)
    if candidate in obs:
        raise CandidateIsObserverError(f"candidate {candidate} is an observer")
    mat = np.zeros((len(obs), tree.n_edges))
    for i, o in enumerate(obs):
        mat[i, path(tree, candidate, o)] = 1.0
    mat.setflags(write=False)
    return PathIncidenceMatrix(candidate=candidate, observers=obs, matrix=mat)


def _argument_batch(t, dim: int) -> tuple[np.ndarray, bool]:
    arr = np.asarray(t, dtype=float)
    scalar = arr.ndim == 1
    arr = np.atleast_2d(arr)
    if arr.shape[1] != dim:
        raise DimensionMismatchError(f"argument has {arr.shape[1]} coordinates, expected {dim}")
    if np.any(arr < 0):
        raise NegativeArgumentError("transform arguments must be nonnegative")
    return arr, scalar


class CandidateTransform:
    """Callable phi_v; precomputes the incidence matrix and edge groups."""

    def __init__(self, tree: Tree, observers: Iterable[int], delays, candidate: int):
        self.incidence = incidence_matrix(tree, observers, candidate)
        self.candidate = candidate
        self.observers = self.incidence.observers
        self.dim = len(self.observers)
        self._table = EdgeLaplaceTable(per_edge_models(delays, tree.n_edges))

    def __call__(self, t):
        arr, scalar = _argument_batch(t, self.dim)
        coeffs = arr @ self.incidence.matrix
        out = np.exp(self._table.log_product(coeffs))
        return float(out[0]) if scalar else out


def candidate_laplace(tree: Tree, observers: Iterable[int], delays, candidate: int, t) -> float:
    """phi_v(t) under source ``candidate``; t in ascending-observer order."""
    return CandidateTransform(tree, observers, delays, candidate)(t)


class EmpiricalTransform:
    """Callable sample average of exp(-<t, tau_i>)."""

    def __init__(self, samples: Sequence[Observation], observers: Iterable[int] | None = None):
        samples = list(samples)
        if not samples:
            raise NoSamplesError("need at least one observation")
        order = tuple(sorted(observers)) if observers is not None else samples[0].observers()
        self.observers = order
        self.dim = len(order)
        self._taus = np.vstack([s.vector(order) for s in samples])

    def __call__(self, t):
        arr, scalar = _argument_batch(t, self.dim)
        out = np.exp(-arr @ self._taus.T).mean(axis=1)
        return float(out[0]) if scalar else out


def empirical_laplace(samples: Sequence[Observation], t) -> float:
    """(1/k) sum_i exp(-<t, tau_i>) over the observed outbreaks."""
    return EmpiricalTransform(samples)(t)


def _exponential_rates(models: Sequence[DelayModel], edge_ids, what: str) -> np.ndarray:
    rates = []
    for e in edge_ids:
        m = models[e]
        if not isinstance(m, Exponential):
            raise UnsupportedDelayModelError(
                f"{what}: edge {e} has {m.label()}, conditional transforms need exponential delays"
            )
        rates.append(m.rate)
    return np.array(rates)


class ConditionalTransform:
    """Callable phi_v(t | tau_o) for exponential delays on the v-o path.

    The conditional factor over the path edges is the tilt ratio
    E[exp(-sum c_e tau_e) | sum tau_e = tau_o]; remaining edges enter
    through their unconditional transforms. With ``strict`` every edge
    must be exponential, otherwise only the path edges must be.
    """

    def __init__(
        self,
        tree: Tree,
        observers: Iterable[int],
        delays,
        candidate: int,
        observer: int,
        tau_o: float,
        strict: bool = False,
    ):
        self.incidence = incidence_matrix(tree, observers, candidate)
        self.observers = self.incidence.observers
        self.dim = len(self.observers)
        if observer not in self.observers:
            raise ValueError(f"{observer} is not an observer")
        if not (np.isfinite(tau_o) and tau_o > 0):
            raise DegenerateTimeError(f"conditioning time must be positive, got {tau_o}")
        self.observer = observer
        self.tau_o = float(tau_o)
        models = per_edge_models(delays, tree.n_edges)
        self._path_ids = np.array(path(tree, candidate, observer))
        check_ids = range(tree.n_edges) if strict else self._path_ids
        self._path_rates = _exponential_rates(models, check_ids, "conditional transform")
        if strict:
            self._path_rates = self._path_rates[self._path_ids]
        off = sorted(set(range(tree.n_edges)) - set(self._path_ids.tolist()))
        self._off_table = EdgeLaplaceTable([models[e] for e in off]) if off else None
        self._off_ids = np.array(off, dtype=int)
        # denominator of the tilt ratio depends only on the conditioning
        # time; compute it once
        den_sign, den_log = exp_divided_difference_log(
            self._path_rates[None, :], np.array([self.tau_o])
        )
        self._den_sign = float(den_sign[0])
        self._den_log = float(den_log[0])

    def __call__(self, t):
        arr, scalar = _argument_batch(t, self.dim)
        coeffs = arr @ self.incidence.matrix
        off_log = (
            self._off_table.log_product(coeffs[:, self._off_ids])
            if self._off_table is not None
            else np.zeros(arr.shape[0])
        )
        tilts = coeffs[:, self._path_ids]
        num_sign, num_log = exp_divided_difference_log(
            self._path_rates + tilts, np.full(tilts.shape[0], self.tau_o)
        )
        factor = np.where(
            num_sign != 0.0,
            np.exp(num_log - self._den_log) * num_sign * self._den_sign,
            0.0,
        )
        out = np.exp(off_log) * factor
        return float(out[0]) if scalar else out


def conditional_laplace_exponential(
    tree: Tree,
    observers: Iterable[int],
    delays,
    candidate: int,
    observer: int,
    tau_o: float,
    t,
    strict: bool = False,
) -> float:
    """phi_v(t | tau_o) under source ``candidate`` for exponential delays."""
    return ConditionalTransform(tree, observers, delays, candidate, observer, tau_o, strict)(t)


def hajek_combine(raw, conditionals: Sequence, d: int):
    """((d-1) raw + sum of d conditional terms) / (2d-1).

    Affine combination with weights summing to 1; unbiased whenever raw
    and each conditional term are, with never-larger variance.
    """
    if d < 1:
        raise DimensionMismatchError("dimension must be >= 1")
    conditionals = list(conditionals)
    if len(conditionals) != d:
        raise DimensionMismatchError(f"expected {d} conditional terms, got {len(conditionals)}")
    total = sum(conditionals[1:], start=conditionals[0]) if d > 1 else conditionals[0]
    return ((d - 1) * raw + total) / (2 * d - 1)


class CheckTransform:
    """Callable variance-reduced transform estimate for one observation.

    Combines the raw statistic exp(-<t, tau>) with the candidate's
    conditional transforms given each single observer time.
    """

    def __init__(self, tree: Tree, observers: Iterable[int], delays, candidate: int, obs: Observation, strict: bool = True):
        self.observers = _sorted_observers(tree, observers)
        if set(obs.times) != set(self.observers):
            raise ValueError("observation must cover exactly the observer set")
        self.dim = len(self.observers)
        self._tau = obs.vector(self.observers)
        if np.any(self._tau <= 0) or np.any(~np.isfinite(self._tau)):
            raise DegenerateTimeError("observed times must be positive and finite")
        self._conditionals = [
            ConditionalTransform(tree, self.observers, delays, candidate, o, obs.times[o], strict=strict)
            for o in self.observers
        ]

    def __call__(self, t):
        arr, scalar = _argument_batch(t, self.dim)
        raw = np.exp(-arr @ self._tau)
        conds = [c(arr) for c in self._conditionals]
        out = hajek_combine(raw, conds, self.dim)
        return float(out[0]) if scalar else out


def check_statistic(tree: Tree, observers: Iterable[int], delays, candidate: int, obs: Observation, t) -> float:
    """Variance-reduced estimate of phi_v(t) from a single outbreak."""
    return CheckTransform(tree, observers, delays, candidate, obs)(t)
