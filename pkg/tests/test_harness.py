import math

import numpy as np
import pytest

from levycounts import harness as H
from levycounts import measures as M
from levycounts.simulate import RandomStream


def test_check_conditions_example2():
    rep = H.check_conditions(M.example2(1.0), [2, 4])
    assert rep.m1_by_construction
    assert rep.m2_converged
    assert math.isfinite(rep.m2_value)
    assert not rep.m4_holds
    assert math.isinf(rep.m4_nu)
    assert rep.m3_table[4].total <= rep.m3_table[2].total + 1e-6


def test_check_conditions_example3():
    rep = H.check_conditions(M.example3(0.5, 1, 1, 1, 1), [2])
    assert rep.m4_holds
    assert math.isfinite(rep.m2_value)


def test_check_conditions_example1():
    rep = H.check_conditions(M.example1_wave(0.5), [2])
    assert rep.m4_holds
    assert rep.m2_value == pytest.approx(
        M.functionals(M.example1_wave(0.5)).hellinger, rel=1e-9
    )


def test_bound_terms_example2_values():
    terms = H.example_bound_terms("example2", {"eps": 1.0 / 3.0, "M": 2.0}, 10)
    assert terms["C"] == pytest.approx(1.0)
    assert terms["identity"] == pytest.approx(0.2)
    assert terms["tail"] == pytest.approx(0.2)


def test_bound_terms_example3_value():
    terms = H.example_bound_terms(
        "example3", {"alpha": 0.5, "c1": 1.0, "c2": 1.0, "eps": 1.0, "M": 2.0}, 4
    )
    # max(c1,c2)(M-eps)(m^(a-1)/a - 1/(a m^(a+1))) at a=1/2, m=4
    assert terms["mid"] == pytest.approx(0.75, abs=1e-12)


def test_bound_terms_validate():
    with pytest.raises(ValueError):
        H.example_bound_terms("example1", {"L": -1.0, "K": 1.0}, 4)
    with pytest.raises(ValueError):
        H.example_bound_terms("example3", {"alpha": 1.5, "c1": 1, "c2": 1, "eps": 1, "M": 2}, 4)
    with pytest.raises(ValueError):
        H.example_bound_terms("nosuch", {}, 4)


def test_bound_terms_example1_dominate_error():
    spec = M.example1_wave(0.5, 1.0)
    for m in (2, 4):
        terms = H.example_bound_terms(
            "example1", {"L": spec.params["L"], "K": spec.params["K"]}, m
        )
        d = H.discretize(spec, m)
        err = H.l1_error(spec, d)
        assert err.total <= terms["total"] + 1e-8
        assert err.bin_term <= terms["bin"] + 1e-8


def test_default_param_grids():
    for tag in ("example1", "example2", "example3"):
        grid = H.default_param_grid(tag, n_points=5)
        assert len(grid) == 5
    with pytest.raises(ValueError):
        H.default_param_grid("nosuch")


def test_build_class_spec_roundtrip():
    spec = H.build_class_spec("example3", {"alpha": 0.5, "lam": 1.2})
    assert spec.params["lam1"] == pytest.approx(1.2)
    with pytest.raises(ValueError):
        H.build_class_spec("nosuch", {})


@pytest.mark.parametrize("tag", ["example1", "example2", "example3"])
def test_small_sweep(tag):
    grid = H.default_param_grid(tag, n_points=3)
    res = H.m3_sweep(tag, grid, [4, 8])
    assert res.monotone_ok
    assert res.bound_ok
    assert res.worst_case[8] <= res.worst_case[4] + 1e-6
    assert len(res.rows) == 6
    assert all(not row.get("diverged", False) for row in res.rows)


def test_poisson_chi2_detects_wrong_rate():
    rng = np.random.default_rng(5)
    counts = rng.poisson(3.0, size=20_000)
    stat, p = H._poisson_chi2(counts, 3.0)
    assert p > 0.001
    stat, p = H._poisson_chi2(counts, 2.0)
    assert p < 1e-6


def test_poisson_chi2_vacuous_cases():
    stat, p = H._poisson_chi2(np.zeros(100, dtype=np.int64), 0.0)
    assert math.isnan(stat) and p == 1.0
    stat, p = H._poisson_chi2(np.array([0, 1, 0], dtype=np.int64), 0.0)
    assert math.isinf(stat) and p == 0.0
    # tiny sample pools into a single group, so the test is vacuous
    stat, p = H._poisson_chi2(np.array([1, 2], dtype=np.int64), 1.5)
    assert math.isnan(stat) and p == 1.0


def test_count_law_check_small():
    rep = H.count_law_check(M.example1_wave(0.5), 2, 1.0, 4000, RandomStream(12))
    assert rep.all_bins_pass
    assert rep.covariances_pass
    assert np.allclose(rep.empirical_means, rep.lambdas, atol=0.1)


def test_lemma_checks_small():
    chk = H.lemma_checks(M.example1_wave(0.5), 2, 1.0, 4000, RandomStream(21))
    assert chk.all_pass
    assert chk.bound_2sinh == pytest.approx(2.0 * math.sinh(chk.d_region), rel=1e-12)
    assert chk.abs_one_minus_r_mean <= chk.bound_2sinh + 4.0 * chk.abs_one_minus_r_se + 1e-9


def test_lemma_checks_trivial_ratio(uniform_spec):
    chk = H.lemma_checks(uniform_spec, 2, 1.0, 200, RandomStream(31))
    assert chk.d_region == pytest.approx(0.0, abs=1e-9)
    assert chk.all_pass
