"""Adaptive quadrature for improper integrals and numeric inverse-CDF tables.

Unbounded ranges and endpoint singularities are handled by geometric
layering: the offending end is approached through geometrically graded
subintervals, each integrated with scipy's QUADPACK, and the layer series
is monitored for convergence.  Divergence is declared when the layer
increments fail to shrink by at least 2x across 4 consecutive rounds.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate as _sint

from .intervals import Interval

DEFAULT_TOL = 1e-9
TABLE_TOL = 1e-6
_MAX_ROUNDS = 200
_SHRINK_WINDOW = 4
_MIN_ROUNDS_BEFORE_DIVERGENCE = 8


class DivergenceError(ArithmeticError):
    """A requested integral was detected as divergent."""


@dataclass
class QuadratureResult:
    value: float
    error_estimate: float
    refinement_rounds: int
    converged: bool
    diverged: bool = False

    def __add__(self, other: "QuadratureResult") -> "QuadratureResult":
        return QuadratureResult(
            self.value + other.value,
            self.error_estimate + other.error_estimate,
            max(self.refinement_rounds, other.refinement_rounds),
            self.converged and other.converged,
            self.diverged or other.diverged,
        )


def _quad(f, a, b, tol):
    val, err = _sint.quad(f, a, b, epsabs=tol, epsrel=tol, limit=200)
    return val, err


def _layered(f, increments_bounds, tol):
    """Sum f over a (possibly infinite) sequence of subintervals.

    `increments_bounds` yields (a_k, b_k) pairs approaching the bad end.
    Returns (value, error, rounds, converged, diverged).
    """
    total = 0.0
    err = 0.0
    incs: list[float] = []
    for k, (a, b) in enumerate(increments_bounds):
        if k >= _MAX_ROUNDS:
            return total, err + abs(incs[-1]), k, False, False
        v, e = _quad(f, a, b, tol)
        total += v
        err += e
        incs.append(abs(v))
        if len(incs) >= 2 and incs[-1] + incs[-2] <= tol:
            return total, err + incs[-1], k + 1, True, False
        if (
            k >= _MIN_ROUNDS_BEFORE_DIVERGENCE
            and incs[-1] > tol
            and incs[-1] * 2.0 > incs[-1 - _SHRINK_WINDOW]
        ):
            return total, err + incs[-1], k + 1, False, True
    return total, err, _MAX_ROUNDS, False, False


def _singular_layers(a, b, from_left):
    """Geometric layers approaching the singular endpoint (a if from_left)."""
    w = b - a
    r = 0.25
    k = 0
    while True:
        hi = w * r**k
        lo = w * r ** (k + 1)
        if from_left:
            yield a + lo, a + hi
        else:
            yield b - hi, b - lo
        k += 1


def _tail_layers(c):
    """Doubling layers [c 2^k, c 2^(k+1)] toward +infinity."""
    k = 0
    while True:
        yield c * 2**k, c * 2 ** (k + 1)
        k += 1


def _integrate_piece(f, a, b, singular_left, singular_right, tol):
    """Integrate one piece with at most one bad feature per end.

    a finite; b finite or +inf.  Singular endpoints are approached with
    graded layers, an infinite b with doubling layers.
    """
    if math.isinf(b):
        c = max(a, 1.0)
        head = QuadratureResult(0.0, 0.0, 0, True)
        if c > a:
            hv, he, hr, hc, hd = (
                _layered(f, _singular_layers(a, c, True), tol)
                if singular_left
                else (*_quad(f, a, c, tol), 0, True, False)
            )
            head = QuadratureResult(hv, he, hr, hc, hd)
        tv, te, tr, tc, td = _layered(f, _tail_layers(c), tol)
        return head + QuadratureResult(tv, te, tr, tc, td)
    if singular_left and singular_right:
        mid = 0.5 * (a + b)
        return _integrate_piece(f, a, mid, True, False, tol) + _integrate_piece(
            f, mid, b, False, True, tol
        )
    if singular_left:
        v, e, r, c_, d = _layered(f, _singular_layers(a, b, True), tol)
        return QuadratureResult(v, e, r, c_, d)
    if singular_right:
        v, e, r, c_, d = _layered(f, _singular_layers(a, b, False), tol)
        return QuadratureResult(v, e, r, c_, d)
    v, e = _quad(f, a, b, tol)
    return QuadratureResult(v, e, 0, e <= max(tol, tol * abs(v)) * 10, False)


def integrate(
    f,
    interval: Interval,
    *,
    singular_at_zero: float = 0.0,
    tail_decay: str = "exponential",
    tol: float = DEFAULT_TOL,
) -> QuadratureResult:
    """Integrate f over ]a, b] with optional singularity at 0 and infinite ends.

    `singular_at_zero` > 0 flags an (integrable or not) power singularity of
    the integrand at y = 0; it matters only when 0 is an endpoint or interior
    point of the interval.  `tail_decay` is informational (the layered scheme
    handles all decay classes uniformly; compact support should simply pass
    finite bounds).
    """
    a, b = interval.a, interval.b
    if a >= b:
        return QuadratureResult(0.0, 0.0, 0, True)
    pieces = []
    if a < 0.0 < b:
        pieces = [(a, 0.0), (0.0, b)]
    else:
        pieces = [(a, b)]
    total = QuadratureResult(0.0, 0.0, 0, True)
    singular = singular_at_zero > 0.0
    for lo, hi in pieces:
        s_left = singular and lo == 0.0
        s_right = singular and hi == 0.0
        if math.isinf(lo):
            # mirror so the piece runs toward +inf
            g = lambda t, f=f: f(-t)
            res = _integrate_piece(g, -hi, math.inf, s_right, False, tol)
        else:
            res = _integrate_piece(f, lo, hi, s_left, s_right, tol)
        total = total + res
    return total


@dataclass
class QuantileTable:
    """Inverse-CDF lookup for a finite measure restricted to one interval."""

    region: Interval
    u: np.ndarray
    y: np.ndarray
    mass: float
    interp_error: float = 0.0

    def sample(self, u) -> np.ndarray:
        return np.interp(u, self.u, self.y)


def _vectorized(f):
    try:
        out = f(np.array([0.5, 0.75]))
        if np.shape(out) == (2,):
            return f
    except Exception:
        pass
    return np.vectorize(f, otypes=[float])


def build_quantile_table(spec, region, resolution: int = 2**14) -> QuantileTable:
    """Tabulate the normalized inverse CDF of spec's measure on `region`.

    `spec` needs .density(y) (measure density against Lebesgue) and a
    .dominating carrying singularity/tail hints.  The table has
    `resolution` equal-probability cells; sampling interpolates linearly.
    """
    region = region if isinstance(region, Interval) else Interval(*region)
    dens = _vectorized(spec.density)
    a, b = region.a, region.b
    if a < 0.0 < b:
        raise ValueError("region must not contain 0 in its interior; split first")
    # clip to the support of the dominating measure
    support = getattr(spec.dominating, "support", None)
    if support:
        pieces = [p for p in (region.intersect(s) for s in support) if p is not None]
        if not pieces:
            raise ValueError("region carries zero mass")
        a = min(p.a for p in pieces)
        b = max(p.b for p in pieces)
        region = Interval(a, b)

    sing = getattr(spec.dominating, "singularity_order_at_zero", 0.0) > 0.0
    lam_res = integrate(
        spec.density,
        region,
        singular_at_zero=getattr(spec.dominating, "singularity_order_at_zero", 0.0),
        tail_decay=getattr(spec.dominating, "tail_decay_hint", "exponential"),
    )
    if lam_res.diverged:
        raise DivergenceError("region has divergent mass")
    lam = lam_res.value
    if lam <= 0.0:
        raise ValueError("region carries zero mass")

    # truncate an infinite endpoint where the remaining mass is negligible
    if math.isinf(b):
        cut = max(abs(a), 1.0) * 2.0
        while integrate(spec.density, Interval(cut, math.inf)).value > 1e-12 * lam:
            cut *= 2.0
        b = cut
    if math.isinf(a):
        cut = -max(abs(b), 1.0) * 2.0
        while integrate(spec.density, Interval(-math.inf, cut)).value > 1e-12 * lam:
            cut *= 2.0
        a = cut

    # mesh: geometric grading toward a zero endpoint, otherwise uniform;
    # heavy tails get log spacing away from the small end
    n_cells = max(64, 4 * resolution)
    if sing and a == 0.0:
        lo = min(b / 2.0, 1e-12 * b)
        mesh = np.concatenate(
            [[0.0], np.geomspace(lo, b, n_cells)]
        )
    elif sing and b == 0.0:
        hi = max(a / 2.0, -1e-12 * abs(a))
        mesh = -np.concatenate([[0.0], np.geomspace(-hi, -a, n_cells)])[::-1]
    elif a > 0.0 and b / max(a, 1e-300) > 100.0:
        mesh = np.geomspace(a, b, n_cells + 1)
    elif b < 0.0 and a / min(b, -1e-300) > 100.0:
        mesh = -np.geomspace(-b, -a, n_cells + 1)[::-1]
    else:
        mesh = np.linspace(a, b, n_cells + 1)

    # per-cell mass with 5-point Gauss-Legendre
    nodes, weights = np.polynomial.legendre.leggauss(5)
    lo_m, hi_m = mesh[:-1], mesh[1:]
    half = 0.5 * (hi_m - lo_m)
    mid = 0.5 * (hi_m + lo_m)
    ys = mid[:, None] + half[:, None] * nodes[None, :]
    vals = dens(ys.ravel()).reshape(ys.shape)
    cell_mass = half * (vals @ weights)
    cdf = np.concatenate([[0.0], np.cumsum(cell_mass)])
    total = cdf[-1]
    cdf /= total

    u_grid = np.linspace(0.0, 1.0, resolution + 1)
    y_grid = np.interp(u_grid, cdf, mesh)
    # estimate interpolation error in u at cell midpoints
    mid_u = 0.5 * (u_grid[:-1] + u_grid[1:])
    mid_y = np.interp(mid_u, u_grid, y_grid)
    err = float(np.max(np.abs(np.interp(mid_y, mesh, cdf) - mid_u))) if resolution else 0.0
    return QuantileTable(region=region, u=u_grid, y=y_grid, mass=lam, interp_error=err)
