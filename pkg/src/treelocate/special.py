"""Sine and cosine integrals.

Si(x) = int_0^x sin(u)/u du
Ci(x) = gamma + ln(x) + int_0^x (cos(u) - 1)/u du,  x > 0

Power series below x = 4; above, both integrals come from the continued
fraction of the complex exponential integral E1(ix) evaluated with the
modified Lentz scheme (the rational representation of the auxiliary
functions). Both regimes deliver relative error well below 1e-10 and are
overlap-tested around the crossover.
"""

from __future__ import annotations

import numpy as np

from .errors import NegativeArgumentError, NonpositiveArgumentError

_CROSSOVER = 4.0
_MAX_SERIES_TERMS = 40
_MAX_CF_ITERS = 400


def _sici_series(x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Si and Ci by power series; x in (0, _CROSSOVER]."""
    si = np.zeros_like(x)
    ci = np.euler_gamma + np.log(x)
    x2 = x * x
    # Si: sum (-1)^k x^(2k+1) / ((2k+1)(2k+1)!)
    num = x.copy()
    sign = 1.0
    for k in range(_MAX_SERIES_TERMS):
        m = 2 * k + 1
        si += sign * num / m
        sign = -sign
        num = num * x2 / ((m + 1) * (m + 2))
        if np.all(num < 1e-20):
            break
    # Ci tail: sum (-1)^k x^(2k) / ((2k)(2k)!)
    num = x2 / 2.0
    sign = -1.0
    for k in range(1, _MAX_SERIES_TERMS):
        m = 2 * k
        ci += sign * num / m
        sign = -sign
        num = num * x2 / ((m + 1) * (m + 2))
        if np.all(num < 1e-20):
            break
    return si, ci


def _sici_contfrac(x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Si and Ci via the Lentz continued fraction for E1(ix); x > _CROSSOVER."""
    tiny = 1e-300
    b = 1.0 + 1j * x
    c = np.full_like(b, 1.0 / tiny)
    d = 1.0 / b
    h = d.copy()
    done = np.zeros(x.shape, dtype=bool)
    for i in range(2, _MAX_CF_ITERS):
        a = -((i - 1) ** 2)
        b = b + 2.0
        d = 1.0 / (a * d + b)
        c = b + a / c
        delta = c * d
        h = np.where(done, h, h * delta)
        done |= np.abs(delta - 1.0) < 1e-16
        if np.all(done):
            break
    else:  # pragma: no cover - requires pathological input
        raise RuntimeError("continued fraction did not converge")
    h = h * (np.cos(x) - 1j * np.sin(x))
    return h.imag + np.pi / 2.0, -h.real


def _sici(x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized (Si, Ci) over strictly positive x."""
    si = np.empty_like(x)
    ci = np.empty_like(x)
    low = x <= _CROSSOVER
    if np.any(low):
        si[low], ci[low] = _sici_series(x[low])
    high = ~low
    if np.any(high):
        si[high], ci[high] = _sici_contfrac(x[high])
    return si, ci


def sine_integral(x):
    """Si(x) for x >= 0; vectorized, scalar in gives scalar out."""
    arr = np.asarray(x, dtype=float)
    if np.any(arr < 0):
        raise NegativeArgumentError("sine_integral requires x >= 0")
    out = np.zeros_like(arr)
    pos = arr > 0
    if np.any(pos):
        out[pos], _ = _sici(arr[pos])
    return float(out) if np.isscalar(x) or arr.ndim == 0 else out


def cosine_integral(x):
    """Ci(x) for x > 0; vectorized, scalar in gives scalar out."""
    arr = np.asarray(x, dtype=float)
    if np.any(arr <= 0):
        raise NonpositiveArgumentError("cosine_integral requires x > 0")
    _, ci = _sici(arr)
    return float(ci) if np.isscalar(x) or arr.ndim == 0 else ci
