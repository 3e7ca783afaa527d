"""Hypoexponential (generalized Erlang) densities and conditional
exponential tilt factors.

The density of a sum of independent exponentials with rates l_1..l_k is

    g(t) = (prod_i l_i) * (-1)^(k-1) * DD[l_1..l_k](x -> exp(-t x)),

where DD is the divided difference over the rates. The textbook
alternating-sum form of that divided difference loses all precision once
rates cluster (condition grows like gap^-(k-1)), and clustered rates are
the common case here: conditional transforms tilt identical rates by a
handful of distinct grid coefficients. The divided difference is instead
evaluated through its bidiagonal table - shifted, scaled Taylor series
followed by repeated squaring - whose entries share one sign pattern, so
no step cancels. Accuracy is near machine precision for any rate
configuration, repeated rates included.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np

from .errors import EmptyRatesError, NegativeArgumentError

_TAYLOR_TERMS = 17
_TAYLOR_RADIUS = 0.5


def _scaling_steps(t_spread_norm: float) -> int:
    return int(np.ceil(np.log2(t_spread_norm))) if t_spread_norm > 1.0 else 0


def _dd_exp_log_single(nodes: np.ndarray, t: float) -> tuple[float, float]:
    """One-row fast path of exp_divided_difference_log (2-D BLAS calls)."""
    k = nodes.size
    if k == 1:
        return 1.0, -t * float(nodes[0])
    mn = float(nodes.min())
    spread = float(nodes.max()) - mn
    s = _scaling_steps(t * (spread + 1.0) / _TAYLOR_RADIUS)
    u = t / float(2 ** s)

    M = np.zeros((k, k))
    idx = np.arange(k)
    M[idx, idx] = -u * (nodes - mn)
    M[idx[:-1], idx[:-1] + 1] = -u
    eye = np.eye(k)
    T = eye.copy()
    for j in range(_TAYLOR_TERMS, 0, -1):
        T = eye + np.dot(M, T) / j
    for _ in range(s):
        T = np.dot(T, T)
    entry = float(T[0, k - 1])
    if entry == 0.0:
        return 0.0, -np.inf
    return float(np.sign(entry)), float(np.log(abs(entry))) - t * mn


def exp_divided_difference_log(nodes: np.ndarray, t: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Divided difference of x -> exp(-t x) over each row of nodes, in logs.

    Args:
        nodes: (m, k) array, k >= 1, finite entries.
        t: (m,) nonnegative array.

    Returns:
        (sign, log_abs): the divided difference per row is
        sign * exp(log_abs); sign is 0 where the value is exactly 0.
    """
    nodes = np.asarray(nodes, dtype=float)
    t = np.asarray(t, dtype=float)
    m, k = nodes.shape
    if m == 0:
        return np.ones(0), np.zeros(0)
    if m == 1:
        sign, log_abs = _dd_exp_log_single(nodes[0], float(t[0]))
        return np.array([sign]), np.array([log_abs])
    if k == 1:
        return np.ones(m), -t * nodes[:, 0]
    mn = nodes.min(axis=1)
    spread = nodes.max(axis=1) - mn

    # scale so the Taylor argument norm stays below _TAYLOR_RADIUS; the
    # superdiagonal of the table generator is 1, hence the "+ 1"
    s = _scaling_steps(float((t * (spread + 1.0)).max()) / _TAYLOR_RADIUS)
    u = t / float(2 ** s)

    idx = np.arange(k)
    M = np.zeros((m, k, k))
    M[:, idx, idx] = -u[:, None] * (nodes - mn[:, None])
    M[:, idx[:-1], idx[:-1] + 1] = -u[:, None]

    eye = np.eye(k)
    T = np.broadcast_to(eye, (m, k, k)).copy()
    for j in range(_TAYLOR_TERMS, 0, -1):
        T = eye + np.matmul(M, T) / j
    for _ in range(s):
        T = np.matmul(T, T)

    entry = T[:, 0, k - 1]
    sign = np.sign(entry)
    with np.errstate(divide="ignore"):
        log_abs = np.where(entry != 0.0, np.log(np.abs(entry)), -np.inf) - t * mn
    return sign, log_abs


def _validated_rates(rates) -> np.ndarray:
    arr = np.asarray(list(rates) if not isinstance(rates, np.ndarray) else rates, dtype=float)
    if arr.ndim != 1 or arr.size == 0:
        raise EmptyRatesError("need at least one stage rate")
    if np.any(~np.isfinite(arr)) or np.any(arr <= 0):
        raise ValueError(f"stage rates must be positive and finite, got {arr}")
    return arr


def hypoexp_log_density(rates: Sequence[float], t) -> np.ndarray | float:
    """log of hypoexp_density; -inf where the density vanishes."""
    arr = _validated_rates(rates)
    tt = np.asarray(t, dtype=float)
    if np.any(tt < 0):
        raise NegativeArgumentError("hypoexponential density requires t >= 0")
    scalar = tt.ndim == 0
    tt = np.atleast_1d(tt)
    k = arr.size
    sign, log_abs = exp_divided_difference_log(
        np.broadcast_to(arr, (tt.size, k)), tt.ravel()
    )
    out = np.where(sign != 0.0, log_abs + np.sum(np.log(arr)), -np.inf)
    out = out.reshape(tt.shape)
    return float(out[0]) if scalar else out


def hypoexp_density(rates: Sequence[float], t) -> np.ndarray | float:
    """Density at t of the sum of independent exponentials with the given rates.

    Repeated and near-equal rates are handled exactly; see module notes.
    """
    out = hypoexp_log_density(rates, t)
    return np.exp(out) if not np.isscalar(out) else float(np.exp(out))


def conditional_tilt_factor(rates: Sequence[float], tilts, total) -> np.ndarray | float:
    """E[exp(-sum_i c_i X_i) | sum_i X_i = total] for independent
    exponential X_i with the given rates and tilts c_i >= 0.

    Equals the hypoexponential density with tilted rates (l_i + c_i) over
    the density with the original rates, times prod_i l_i / (l_i + c_i);
    the rate products cancel, leaving a ratio of divided differences.

    ``tilts`` may be (k,) for one evaluation or (m, k) for a batch;
    ``total`` broadcasts accordingly and must be positive.
    """
    arr = _validated_rates(rates)
    k = arr.size
    c = np.asarray(tilts, dtype=float)
    tot = np.asarray(total, dtype=float)
    scalar = c.ndim == 1 and tot.ndim == 0
    c = np.atleast_2d(c)
    if c.shape[1] != k:
        raise ValueError(f"tilts must have {k} columns, got {c.shape[1]}")
    if np.any(c < 0):
        raise NegativeArgumentError("tilt coefficients must be nonnegative")
    rows = max(c.shape[0], tot.size)
    c = np.broadcast_to(c, (rows, k))
    tot = np.broadcast_to(tot.ravel() if tot.ndim else tot, (rows,)).astype(float)
    if np.any(tot <= 0) or np.any(~np.isfinite(tot)):
        raise ValueError("conditioning total must be positive and finite")

    s_num, l_num = exp_divided_difference_log(arr + c, tot)
    s_den, l_den = exp_divided_difference_log(np.broadcast_to(arr, c.shape), tot)
    with np.errstate(invalid="ignore"):
        out = np.where(s_num != 0.0, np.exp(l_num - l_den) * s_num * s_den, 0.0)
    return float(out[0]) if scalar else out
