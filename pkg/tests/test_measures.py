import math

import numpy as np
import pytest

from levycounts import measures as M
from levycounts.intervals import Interval
from levycounts.numerics import DivergenceError

# high-precision oracle for the inverse-square Gaussian tail mass,
# closed form e^-1 - sqrt(pi) erfc(1), cross-checked with mpmath to 30 digits
EX2_TAIL_MASS_1_INF = 0.08907385589078035


def test_ratio_eval_example2():
    spec = M.example2(1.0)
    assert M.ratio_eval(spec, 1.0) == pytest.approx(math.exp(-1.0), rel=1e-12)


def test_ratio_eval_example3_flat():
    # lam1 = lam2 = eps kills the exponent
    spec = M.example3(0.5, 1, 1, 0.5, 0.5, eps=0.5)
    for y in (-2.0, -0.3, 0.4, 5.0):
        assert M.ratio_eval(spec, y) == pytest.approx(1.0, rel=1e-14)


def test_ratio_eval_linear(linear_spec):
    assert M.ratio_eval(linear_spec, 0.75) == pytest.approx(0.75)


def test_ratio_eval_at_zero_singular_raises():
    with pytest.raises(ValueError):
        M.ratio_eval(M.example2(1.0), 0.0)


def test_interval_mass_uniform(uniform_spec):
    res = M.interval_mass(uniform_spec, Interval(0.5, 1.0))
    assert res.value == pytest.approx(0.5, abs=1e-10)


def test_interval_mass_example2_tail():
    res = M.interval_mass(M.example2(1.0), Interval(1.0, math.inf))
    assert res.value == pytest.approx(EX2_TAIL_MASS_1_INF, abs=1e-9)


def test_interval_mass_example3_near_zero_diverges():
    spec = M.example3(0.5, 1, 1, 1, 1)
    with pytest.raises(DivergenceError):
        M.interval_mass(spec, Interval(0.0, 1.0))


def test_interval_mass_additive(linear_spec):
    a = M.interval_mass(linear_spec, Interval(0.0, 0.5))
    b = M.interval_mass(linear_spec, Interval(0.5, 1.0))
    ab = M.interval_mass(linear_spec, Interval(0.0, 1.0))
    assert ab.value == pytest.approx(
        a.value + b.value, abs=a.error_estimate + b.error_estimate + ab.error_estimate + 1e-12
    )


def test_functionals_identity_ratio(uniform_spec):
    fns = M.functionals(uniform_spec)
    assert fns.gamma_star == pytest.approx(0.0, abs=1e-9)
    assert fns.hellinger == pytest.approx(0.0, abs=1e-9)
    assert fns.eta == pytest.approx(0.5, abs=1e-9)  # int_0^1 y dy
    assert fns.m4_finite


def test_functionals_example2_m4_fails():
    fns = M.functionals(M.example2(1.0))
    assert not fns.m4_finite
    assert math.isinf(fns.m4_moment)
    assert math.isfinite(fns.hellinger)


def test_functionals_example3_m4_finite():
    fns = M.functionals(M.example3(0.5, 1, 1, 1.0, 1.0))
    assert fns.m4_finite
    assert fns.eta_finite
    assert math.isfinite(fns.hellinger)


def test_gamma_star_consistency(linear_spec):
    # gamma* = eta(nu restricted to |y|<=1) - eta(reference restricted)
    fns = M.functionals(linear_spec)
    eta_nu = M.interval_mass(
        M.custom(linear_spec.dominating, lambda y: np.asarray(y, float) ** 2), Interval(0, 1)
    ).value
    eta_ref = 0.5
    assert fns.gamma_star == pytest.approx(eta_nu - eta_ref, abs=1e-8)


def test_lipschitz_check_wave():
    spec = M.example1_wave(0.5, 2.0)
    ok, worst = M.lipschitz_check(spec)
    assert ok
    assert worst <= spec.params["L"] + 1e-9


def test_example_constructors_validate():
    with pytest.raises(ValueError):
        M.example2(0.1, eps=0.5, M=2.0)  # lam below eps
    with pytest.raises(ValueError):
        M.example3(1.5, 1, 1, 1, 1)  # alpha >= 1
    with pytest.raises(ValueError):
        M.example1_wave(1.5)
