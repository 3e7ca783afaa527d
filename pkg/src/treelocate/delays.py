"""Edge-delay distributions on the positive half-line.

Each model exposes sampling, its density, and the closed-form Laplace
transform phi(t) = E[exp(-t X)]. Transforms are also available in log
form, which the candidate-transform products use to stay inside double
range for large arguments.

JSON wire form (config files, per-edge overrides):
    {"kind": "exponential", "rate": 1.0}
    {"kind": "posnormal", "mean": 1.0, "stddev": 0.25}
    {"kind": "uniform", "lower": 0.0, "upper": 2.0}
    {"kind": "abscauchy", "scale": 1.0}
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.special import log_ndtr, ndtr

from .errors import NegativeArgumentError
from .special import _sici

__all__ = [
    "DelayModel",
    "Exponential",
    "PositiveNormal",
    "Uniform",
    "AbsoluteCauchy",
    "delay_from_spec",
    "per_edge_models",
]


def _as_nonneg_array(t, what: str) -> tuple[np.ndarray, bool]:
    arr = np.asarray(t, dtype=float)
    if np.any(arr < 0):
        raise NegativeArgumentError(f"{what} requires a nonnegative argument")
    scalar = arr.ndim == 0
    return np.atleast_1d(arr), scalar


# Kind-level transform kernels over parameter arrays. The instance
# methods delegate here; EdgeLaplaceTable uses them to evaluate many
# differently parameterized edges of one kind in single numpy calls.
# The uniform and abscauchy kernels require x > 0 (the x == 0 value of
# every log transform is exactly 0; callers mask it).

def _exponential_log_laplace(x, rate):
    return -np.log1p(x / rate)


def _posnormal_log_laplace(x, mean, stddev):
    # Phi(mu/sigma - sigma x)/Phi(mu/sigma) * exp(-mu x + sigma^2 x^2 / 2):
    # the Phi factor underflows long before the exponential overflows, but
    # their log-sum stays moderate, so everything happens in logs
    a = mean / stddev
    sx = stddev * x
    return log_ndtr(a - sx) - log_ndtr(a) - mean * x + 0.5 * sx * sx


def _uniform_log_laplace(x, lower, upper):
    width = upper - lower
    return -lower * x + np.log(-np.expm1(-width * x)) - np.log(width * x)


def _abscauchy_log_laplace(x, scale):
    z = scale * x
    si, ci = _sici(z)
    return np.log((2.0 * ci * np.sin(z) + np.cos(z) * (np.pi - 2.0 * si)) / np.pi)


_LOG_LAPLACE_KERNELS = {
    "exponential": _exponential_log_laplace,
    "posnormal": _posnormal_log_laplace,
    "uniform": _uniform_log_laplace,
    "abscauchy": _abscauchy_log_laplace,
}


class EdgeLaplaceTable:
    """Precomputed kind groups for a fixed per-edge model list, so the
    product of edge transforms evaluates in a few numpy calls however
    heterogeneous the edges are."""

    def __init__(self, models: Sequence["DelayModel"]):
        by_kind: dict[str, list[int]] = {}
        for e, model in enumerate(models):
            by_kind.setdefault(model.kind, []).append(e)
        self._groups = []
        for kind, edge_ids in sorted(by_kind.items()):
            params = {
                name: np.array([getattr(models[e], name) for e in edge_ids])
                for name in _KINDS[kind][1]
            }
            self._groups.append((_LOG_LAPLACE_KERNELS[kind], np.array(edge_ids), params))

    def log_product(self, coeffs: np.ndarray) -> np.ndarray:
        """sum over columns e of log phi_e(coeffs[:, e]); ``coeffs`` is a
        nonnegative (m, n_edges) array and zero entries are skipped."""
        total = np.zeros(coeffs.shape[0])
        for kernel, edge_ids, params in self._groups:
            block = coeffs[:, edge_ids]
            rows, cols = np.nonzero(block > 0)
            if rows.size == 0:
                continue
            vals = np.zeros_like(block)
            vals[rows, cols] = kernel(block[rows, cols], **{k: v[cols] for k, v in params.items()})
            total += vals.sum(axis=1)
        return total


def grouped_log_laplace(models: Sequence["DelayModel"], coeffs: np.ndarray) -> np.ndarray:
    """One-shot convenience wrapper over EdgeLaplaceTable."""
    return EdgeLaplaceTable(models).log_product(coeffs)


def _ret(values: np.ndarray, scalar: bool):
    return float(values[0]) if scalar else values


class DelayModel:
    """Base class: immutable delay distribution on [0, inf)."""

    kind: str = ""

    # subclasses implement these on 1-D nonnegative arrays
    def _log_laplace(self, t: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def _density(self, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def sample(self, rng: np.random.Generator, size=None):
        raise NotImplementedError

    def laplace(self, t):
        """phi(t) = E[exp(-t X)] for t >= 0; equals 1 at t = 0."""
        arr, scalar = _as_nonneg_array(t, "laplace")
        return _ret(np.exp(self._log_laplace(arr)), scalar)

    def log_laplace(self, t):
        """log phi(t), stable for large t."""
        arr, scalar = _as_nonneg_array(t, "log_laplace")
        return _ret(self._log_laplace(arr), scalar)

    def density(self, x):
        """p.d.f. at x >= 0."""
        arr, scalar = _as_nonneg_array(x, "density")
        return _ret(self._density(arr), scalar)

    def scaled(self, c: float) -> "DelayModel":
        """Distribution of c*X (time-unit change)."""
        raise NotImplementedError

    def to_spec(self) -> dict:
        raise NotImplementedError

    def label(self) -> str:
        raise NotImplementedError


@dataclass(frozen=True)
class Exponential(DelayModel):
    rate: float

    kind = "exponential"

    def __post_init__(self):
        if not (self.rate > 0 and math.isfinite(self.rate)):
            raise ValueError(f"rate must be positive, got {self.rate}")

    def _log_laplace(self, t):
        return _exponential_log_laplace(t, self.rate)

    def _density(self, x):
        return self.rate * np.exp(-self.rate * x)

    def sample(self, rng, size=None):
        return rng.exponential(1.0 / self.rate, size=size)

    def scaled(self, c):
        return Exponential(self.rate / c)

    def to_spec(self):
        return {"kind": self.kind, "rate": self.rate}

    def label(self):
        return f"exponential({self.rate:g})"


@dataclass(frozen=True)
class PositiveNormal(DelayModel):
    """Normal(mean, stddev^2) conditioned on being nonnegative."""

    mean: float
    stddev: float

    kind = "posnormal"

    def __post_init__(self):
        if not (self.mean >= 0 and math.isfinite(self.mean)):
            raise ValueError(f"mean must be >= 0, got {self.mean}")
        if not (self.stddev > 0 and math.isfinite(self.stddev)):
            raise ValueError(f"stddev must be positive, got {self.stddev}")

    def _log_laplace(self, t):
        return _posnormal_log_laplace(t, self.mean, self.stddev)

    def _density(self, x):
        z = (x - self.mean) / self.stddev
        norm = self.stddev * math.sqrt(2.0 * math.pi) * ndtr(self.mean / self.stddev)
        return np.exp(-0.5 * z * z) / norm

    def sample(self, rng, size=None):
        # rejection from the unconditioned normal; acceptance >= 1/2 for mean >= 0
        if size is None:
            while True:
                x = rng.normal(self.mean, self.stddev)
                if x >= 0:
                    return x
        out = np.empty(int(np.prod(size)) if not np.isscalar(size) else size, dtype=float)
        filled = 0
        while filled < out.size:
            draw = rng.normal(self.mean, self.stddev, size=out.size - filled)
            keep = draw[draw >= 0]
            out[filled:filled + keep.size] = keep
            filled += keep.size
        return out.reshape(size)

    def scaled(self, c):
        return PositiveNormal(c * self.mean, c * self.stddev)

    def to_spec(self):
        return {"kind": self.kind, "mean": self.mean, "stddev": self.stddev}

    def label(self):
        return f"posnormal({self.mean:g},{self.stddev ** 2:g})"


@dataclass(frozen=True)
class Uniform(DelayModel):
    lower: float
    upper: float

    kind = "uniform"

    def __post_init__(self):
        if not (0 <= self.lower < self.upper and math.isfinite(self.upper)):
            raise ValueError(f"need 0 <= lower < upper, got [{self.lower}, {self.upper}]")

    def _log_laplace(self, t):
        out = np.zeros_like(t)
        pos = t > 0
        out[pos] = _uniform_log_laplace(t[pos], self.lower, self.upper)
        return out

    def _density(self, x):
        inside = (x >= self.lower) & (x <= self.upper)
        return np.where(inside, 1.0 / (self.upper - self.lower), 0.0)

    def sample(self, rng, size=None):
        return rng.uniform(self.lower, self.upper, size=size)

    def scaled(self, c):
        return Uniform(c * self.lower, c * self.upper)

    def to_spec(self):
        return {"kind": self.kind, "lower": self.lower, "upper": self.upper}

    def label(self):
        return f"uniform({self.lower:g},{self.upper:g})"


@dataclass(frozen=True)
class AbsoluteCauchy(DelayModel):
    """|X| for X Cauchy with location 0 and the given scale. No finite moments."""

    scale: float

    kind = "abscauchy"

    def __post_init__(self):
        if not (self.scale > 0 and math.isfinite(self.scale)):
            raise ValueError(f"scale must be positive, got {self.scale}")

    def _log_laplace(self, t):
        out = np.zeros_like(t)
        pos = t > 0
        out[pos] = _abscauchy_log_laplace(t[pos], self.scale)
        return out

    def _density(self, x):
        return (2.0 / np.pi) * self.scale / (self.scale * self.scale + x * x)

    def sample(self, rng, size=None):
        return np.abs(self.scale * rng.standard_cauchy(size=size))

    def scaled(self, c):
        return AbsoluteCauchy(c * self.scale)

    def to_spec(self):
        return {"kind": self.kind, "scale": self.scale}

    def label(self):
        return f"abscauchy({self.scale:g})"


_KINDS = {
    "exponential": (Exponential, ("rate",)),
    "posnormal": (PositiveNormal, ("mean", "stddev")),
    "uniform": (Uniform, ("lower", "upper")),
    "abscauchy": (AbsoluteCauchy, ("scale",)),
}


def delay_from_spec(spec: dict) -> DelayModel:
    """Build a model from its JSON wire form."""
    if not isinstance(spec, dict) or "kind" not in spec:
        raise ValueError(f"delay spec must be a dict with a 'kind', got {spec!r}")
    kind = spec["kind"]
    if kind not in _KINDS:
        raise ValueError(f"unknown delay kind {kind!r}; expected one of {sorted(_KINDS)}")
    cls, params = _KINDS[kind]
    missing = [p for p in params if p not in spec]
    if missing:
        raise ValueError(f"delay kind {kind!r} missing parameters {missing}")
    extra = set(spec) - {"kind", *params}
    if extra:
        raise ValueError(f"delay kind {kind!r} got unexpected parameters {sorted(extra)}")
    return cls(**{p: float(spec[p]) for p in params})


def per_edge_models(delays, n_edges: int) -> list[DelayModel]:
    """Normalize a single model or a per-edge sequence to a list of length n_edges."""
    if isinstance(delays, DelayModel):
        return [delays] * n_edges
    models = list(delays)
    if len(models) != n_edges:
        raise ValueError(f"expected {n_edges} per-edge models, got {len(models)}")
    for m in models:
        if not isinstance(m, DelayModel):
            raise TypeError(f"not a DelayModel: {m!r}")
    return models
