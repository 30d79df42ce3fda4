import math

import numpy as np
import pytest

from levycounts import grid as G
from levycounts import measures as M
from levycounts import simulate as S
from levycounts.intervals import Interval


REGION_01 = (Interval(0.0, 1.0),)


def test_determinism(uniform_spec):
    a = S.simulate_path(uniform_spec, REGION_01, 1.0, 0.3, S.RandomStream(123, 7))
    b = S.simulate_path(uniform_spec, REGION_01, 1.0, 0.3, S.RandomStream(123, 7))
    assert np.array_equal(a.times, b.times)
    assert np.array_equal(a.sizes, b.sizes)
    c = S.simulate_path(uniform_spec, REGION_01, 1.0, 0.3, S.RandomStream(123, 8))
    assert not (a.n_jumps == c.n_jumps and np.array_equal(a.sizes, c.sizes))


def test_empty_region_mass(uniform_spec):
    path = S.simulate_path(uniform_spec, (Interval(0.9999999, 1.0),), 1e-9, 0.0, S.RandomStream(1))
    assert path.n_jumps == 0


def test_poisson_jump_count_mean(uniform_spec):
    # mass of ]0,1] is 1, so with T = 1 the count is Poisson(1)
    rng = S.RandomStream(2024)
    n = 100_000
    counts = np.empty(n)
    for r in range(n):
        counts[r] = S.simulate_path(uniform_spec, REGION_01, 1.0, 0.0, rng.substream(r)).n_jumps
    assert counts.mean() == pytest.approx(1.0, abs=0.01)


def test_infinite_activity_requires_truncation():
    spec = M.example3(0.5, 1, 1, 1, 1)
    with pytest.raises(ValueError, match="restrict"):
        S.simulate_path(spec, (Interval(0.0, 1.0),), 1.0, 0.0, S.RandomStream(0))
    # the restricted region works
    path = S.simulate_path(
        spec, S.region_outside_identity(2), 1.0, 0.0, S.RandomStream(0), resolution=512
    )
    assert np.all(np.abs(path.sizes) > 0.5)


def test_kernel_pi1(uniform_spec):
    p = S.JumpPath(1.0, 0.3, [0.5], [1.0])
    q = S.kernel_pi1(p)
    assert q.drift == 0.0
    assert np.array_equal(q.sizes, p.sizes)
    assert S.kernel_pi1(q).drift == 0.0  # idempotent
    empty = S.kernel_pi1(S.JumpPath(1.0, 0.7, [], []))
    assert empty.drift == 0.0 and empty.n_jumps == 0


def test_kernel_pi2():
    p = S.JumpPath(1.0, 0.9, [0.2], [0.5])
    q = S.kernel_pi2(p, 0.4)
    assert q.drift == pytest.approx(0.5)
    assert np.array_equal(q.sizes, p.sizes)
    assert S.kernel_pi2(p, 0.0).drift == p.drift
    back = S.kernel_pi2(q, -0.4)
    assert back.drift == pytest.approx(p.drift)


def test_kernel_pi2_gamma_star_identity(linear_spec):
    # shifting the pure-jump drift eta by the reference eta gives gamma*
    fns = M.functionals(linear_spec)
    base_fns = M.functionals(linear_spec.base())
    p = S.JumpPath(1.0, fns.eta, [], [])
    q = S.kernel_pi2(p, base_fns.eta)
    assert q.drift == pytest.approx(fns.gamma_star, abs=1e-8)


def test_extract_statistic_binning():
    lay = G.grid_intervals(2)
    p = S.JumpPath(1.0, 0.0, [0.1, 0.2, 0.3], [0.75, -1.7, 3.2])
    counts = S.extract_statistic(p, lay).counts
    expected = np.zeros(8, dtype=int)
    expected[4] = 1  # ]0.5, 1]
    expected[1] = 1  # ]-2, -1.5]
    expected[7] = 1  # ]2, oo[
    assert np.array_equal(counts, expected)


def test_extract_statistic_empty_and_identity():
    lay = G.grid_intervals(2)
    assert np.all(S.extract_statistic(S.JumpPath(1.0, 0.0, [], []), lay).counts == 0)
    p = S.JumpPath(1.0, 0.0, [0.5], [0.4])
    assert np.all(S.extract_statistic(p, lay).counts == 0)


def test_sample_counts_direct_mean(linear_spec):
    lay = G.grid_intervals(2)
    rng = S.RandomStream(77)
    n = 100_000
    acc = np.zeros(len(lay))
    for r in range(n):
        acc += S.sample_counts_direct(linear_spec, lay, 2.0, rng.substream(r)).counts
    means = acc / n
    # T * nu(]1/2,1]) = 2 * 3/8 = 0.75; all other bins empty
    assert means[4] == pytest.approx(0.75, abs=0.02)
    assert np.all(means[[0, 1, 2, 3, 5, 6, 7]] == 0)


def test_sample_counts_direct_deterministic(linear_spec):
    lay = G.grid_intervals(2)
    a = S.sample_counts_direct(linear_spec, lay, 5.0, S.RandomStream(3, 1))
    b = S.sample_counts_direct(linear_spec, lay, 5.0, S.RandomStream(3, 1))
    assert np.array_equal(a.counts, b.counts)


def test_path_and_direct_counts_same_mean(linear_spec):
    lay = G.grid_intervals(2)
    rng = S.RandomStream(42)
    n = 20_000
    via_path = np.zeros(len(lay))
    via_direct = np.zeros(len(lay))
    region = S.region_outside_identity(2)
    for r in range(n):
        p = S.simulate_path(linear_spec, region, 2.0, 0.0, rng.substream(r))
        via_path += S.extract_statistic(p, lay).counts
        via_direct += S.sample_counts_direct(linear_spec, lay, 2.0, rng.substream(n + r)).counts
    assert np.allclose(via_path / n, via_direct / n, atol=0.05)
