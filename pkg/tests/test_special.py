import math

import mpmath as mp
import numpy as np
import pytest
from scipy import integrate

from treelocate import cosine_integral, sine_integral
from treelocate.errors import NegativeArgumentError, NonpositiveArgumentError


def si_quadrature(x: float) -> float:
    val, _ = integrate.quad(lambda u: math.sin(u) / u, 0.0, x, limit=400)
    return val


def ci_quadrature(x: float) -> float:
    # gamma + ln x + int_0^x (cos u - 1)/u du, integrand regular at 0
    val, _ = integrate.quad(lambda u: (math.cos(u) - 1.0) / u if u > 0 else 0.0, 0.0, x, limit=400)
    return np.euler_gamma + math.log(x) + val


def test_si_at_zero():
    assert sine_integral(0.0) == 0.0


def test_si_large_argument_asymptote():
    # Si(x) = pi/2 - f(x) cos x - g(x) sin x with the auxiliary expansions
    # f ~ (1 - 2!/x^2 + ...)/x and g ~ (1 - 3!/x^2 + ...)/x^2; at x=100 the
    # truncation below is good to ~1e-9, the one-term form only to ~5e-5
    x = 100.0
    f2 = (1.0 - 2.0 / x**2) / x
    g2 = (1.0 - 6.0 / x**2) / x**2
    oracle = math.pi / 2 - f2 * math.cos(x) - g2 * math.sin(x)
    assert abs(sine_integral(x) - oracle) < 1e-6
    assert abs(sine_integral(x) - (math.pi / 2 - math.cos(x) / x)) < 1e-4


@pytest.mark.parametrize("x", [0.5, 1.0, 2.0, 10.0])
def test_against_quadrature(x):
    assert abs(sine_integral(x) - si_quadrature(x)) < 1e-9
    assert abs(cosine_integral(x) - ci_quadrature(x)) < 1e-9


def test_against_mpmath_dense_grid():
    xs = np.concatenate([
        np.linspace(0.01, 3.99, 57),
        np.linspace(4.0, 30.0, 53),
        np.array([3.9999, 4.0001, 100.0, 1e4]),   # crossover overlap + far tail
    ])
    si = sine_integral(xs)
    ci = cosine_integral(xs)
    for x, s, c in zip(xs, si, ci):
        assert abs(s - float(mp.si(x))) <= 1e-10 * max(1.0, abs(s))
        assert abs(c - float(mp.ci(x))) <= 1e-10 * max(1.0, abs(c))


def test_domain_errors():
    with pytest.raises(NonpositiveArgumentError):
        cosine_integral(0.0)
    with pytest.raises(NonpositiveArgumentError):
        cosine_integral(-1.0)
    with pytest.raises(NegativeArgumentError):
        sine_integral(-0.5)


def test_vectorized_matches_scalar():
    xs = np.array([0.3, 2.0, 5.0, 42.0])
    vec = sine_integral(xs)
    assert vec.shape == xs.shape
    for x, v in zip(xs, vec):
        assert v == sine_integral(float(x))
