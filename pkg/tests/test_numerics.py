import math

import numpy as np
import pytest

from levycounts.intervals import Interval
from levycounts.numerics import (
    DivergenceError,
    build_quantile_table,
    integrate,
)
from levycounts import measures as M


def test_polynomial_exact():
    res = integrate(lambda y: y, Interval(0, 1), tol=1e-10)
    assert res.converged
    assert res.value == pytest.approx(0.5, abs=1e-10)


def test_inverse_square_tail():
    res = integrate(lambda y: y**-2.0, Interval(1, math.inf), tail_decay="polynomial")
    assert res.value == pytest.approx(1.0, abs=1e-8)
    assert not res.diverged


def test_graded_mesh_sqrt_singularity():
    res = integrate(lambda y: y**-0.5, Interval(0, 1), singular_at_zero=0.5)
    assert res.value == pytest.approx(2.0, abs=1e-8)
    assert res.converged


def test_negative_infinite_endpoint():
    res = integrate(lambda y: math.exp(y), Interval(-math.inf, 0))
    assert res.value == pytest.approx(1.0, abs=1e-8)


def test_divergent_singularity_detected():
    res = integrate(lambda y: 1.0 / y, Interval(0, 1), singular_at_zero=1.0)
    assert res.diverged
    assert not res.converged


def test_divergent_tail_detected():
    res = integrate(lambda y: 1.0 / y, Interval(1, math.inf), tail_decay="polynomial")
    assert res.diverged


@pytest.mark.parametrize("a,b", [(2.0, 3.0), (1.0, -1.0), (0.5, 0.5)])
def test_linearity(a, b):
    f = lambda y: np.exp(-y)
    g = lambda y: y**2
    iv = Interval(0, 2)
    lhs = integrate(lambda y: a * f(y) + b * g(y), iv)
    rhs_f = integrate(f, iv)
    rhs_g = integrate(g, iv)
    assert lhs.value == pytest.approx(
        a * rhs_f.value + b * rhs_g.value,
        abs=lhs.error_estimate + abs(a) * rhs_f.error_estimate + abs(b) * rhs_g.error_estimate + 1e-12,
    )


def test_quantile_table_uniform(uniform_spec):
    table = build_quantile_table(uniform_spec, Interval(0, 1), resolution=256)
    assert table.mass == pytest.approx(1.0, abs=1e-8)
    assert table.sample(0.25) == pytest.approx(0.25, abs=1e-6)
    # monotone and endpoint-consistent
    assert np.all(np.diff(table.y) >= 0)
    assert table.y[0] == pytest.approx(0.0, abs=1e-9)
    assert table.y[-1] == pytest.approx(1.0, abs=1e-9)


def test_quantile_table_conditional_uniform(uniform_spec):
    table = build_quantile_table(uniform_spec, Interval(0.5, 1), resolution=256)
    assert table.mass == pytest.approx(0.5, abs=1e-8)
    assert table.sample(0.5) == pytest.approx(0.75, abs=1e-6)


def test_quantile_table_example2_tail_median():
    # median of the measure exp(-y^2) y^-2 dy restricted to ]1, oo[,
    # bisection oracle on the CDF computed with scipy.quad directly
    from scipy.integrate import quad
    from scipy.optimize import brentq

    spec = M.example2(1.0)
    dens = lambda y: math.exp(-(y**2)) / y**2
    total = quad(dens, 1, np.inf)[0]
    median = brentq(lambda c: quad(dens, 1, c)[0] - total / 2, 1.0001, 10.0, xtol=1e-10)
    table = build_quantile_table(spec, Interval(1, math.inf), resolution=4096)
    assert table.mass == pytest.approx(total, rel=1e-7)
    assert table.sample(0.5) == pytest.approx(median, abs=1e-5)


def test_quantile_cdf_round_trip():
    from scipy.integrate import quad

    spec = M.example2(1.0)
    resolution = 512
    table = build_quantile_table(spec, Interval(1, math.inf), resolution=resolution)
    us = np.linspace(0.01, 0.99, 25)
    ys = table.sample(us)
    cdf = np.array([quad(spec.density, 1, y)[0] / table.mass for y in ys])
    assert np.max(np.abs(cdf - us)) <= 1.0 / (2 * resolution)


def test_quantile_table_zero_mass_region(uniform_spec):
    with pytest.raises(ValueError):
        build_quantile_table(uniform_spec, Interval(2, 3), resolution=64)


def test_quantile_table_divergent_region():
    spec = M.example3(0.5, 1, 1, 1, 1)
    with pytest.raises((DivergenceError, ValueError)):
        build_quantile_table(spec, Interval(0, 1), resolution=64)
