"""The 2m^2-interval discretization grid and the piecewise-constant ratio.

For a level m the real line splits into the two tails ]-inf, -m] and
]m, oo[ plus finite bins ]k + (j-1)/m, k + j/m] (j = 1..m, k = -m..m-1)
with the two bins touching 0 removed, leaving the identity region
]-1/m, 1/m] uncovered.  Finite-bin endpoints are stored as exact
Fractions so boundary membership never suffers float rounding.

A handy reindexing: writing n = k m + j, the finite bin ]?(n-1)/m, n/m]
corresponds to n in [-m^2 + 1, m^2] \\ {0, 1}; bins are ordered by
ascending left endpoint (negative tail first, positive tail last).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

import numpy as np

from .intervals import Interval
from .measures import MeasureSpec, interval_mass
from .numerics import DEFAULT_TOL, DivergenceError, QuadratureResult, integrate

NEG_TAIL = "neg_tail"
FINITE = "finite"
POS_TAIL = "pos_tail"


@dataclass(frozen=True)
class GridInterval:
    tag: str
    interval: Interval
    j: Optional[int] = None
    k: Optional[int] = None


@dataclass(eq=False)
class GridLayout:
    m: int
    intervals: tuple[GridInterval, ...]

    @property
    def identity_region(self) -> Interval:
        return Interval(Fraction(-1, self.m), Fraction(1, self.m))

    def __len__(self) -> int:
        return len(self.intervals)


def grid_intervals(m: int) -> GridLayout:
    """Build the 2m^2 grid intervals in ascending order."""
    if not isinstance(m, int) or m < 1:
        raise ValueError(f"m must be a positive integer, got {m!r}")
    out = [GridInterval(NEG_TAIL, Interval(-math.inf, Fraction(-m)))]
    for n in range(-m * m + 1, m * m + 1):
        if n in (0, 1):
            continue
        k, j = divmod(n - 1, m)
        j += 1
        out.append(
            GridInterval(
                FINITE,
                Interval(Fraction(n - 1, m), Fraction(n, m)),
                j=j,
                k=k,
            )
        )
    out.append(GridInterval(POS_TAIL, Interval(Fraction(m), math.inf)))
    layout = GridLayout(m=m, intervals=tuple(out))
    assert len(layout) == 2 * m * m
    return layout


def bin_position(m: int, y) -> Optional[int]:
    """Index of the grid interval containing y, or None in the identity region.

    Exact rational arithmetic at bin boundaries.
    """
    if y == 0:
        raise ValueError("y must be nonzero")
    yq = Fraction(y)
    if yq > m:
        return 2 * m * m - 1
    if yq <= -m:
        return 0
    n = math.ceil(yq * m)
    if n in (0, 1):  # ]-1/m, 0] or ]0, 1/m]
        return None
    pos = n + m * m - 1
    if n > 0:
        pos -= 1
    if n > 1:
        pos -= 1
    return 1 + pos


def bin_index(layout: GridLayout, y) -> Optional[GridInterval]:
    """The grid interval containing y, or None inside the identity region."""
    pos = bin_position(layout.m, y)
    return None if pos is None else layout.intervals[pos]


def bin_positions_array(m: int, sizes: np.ndarray) -> np.ndarray:
    """Vectorized bin lookup; -1 marks the identity region.

    Float arithmetic: sizes landing exactly on a bin boundary may round;
    use bin_position for exact single queries.
    """
    sizes = np.asarray(sizes, dtype=float)
    n = np.ceil(sizes * m).astype(np.int64)
    pos = n + m * m - 1 - (n > 0) - (n > 1) + 1
    pos = np.where(sizes > m, 2 * m * m - 1, pos)
    pos = np.where(sizes <= -m, 0, pos)
    pos = np.where((n == 0) | (n == 1), -1, pos)
    return pos


@dataclass(eq=False)
class DiscretizedMeasure:
    """Piecewise-constant ratio preserving the per-bin mass of the measure."""

    grid: GridLayout
    spec: MeasureSpec
    ratios: np.ndarray
    nu_masses: np.ndarray
    nutilde_masses: np.ndarray
    mass_error: float

    @property
    def identity_region(self) -> Interval:
        return self.grid.identity_region

    def ratio_at(self, y):
        """Evaluate the discretized ratio pointwise (1 in the identity region)."""
        scalar = np.isscalar(y)
        pos = bin_positions_array(self.grid.m, np.atleast_1d(np.asarray(y, dtype=float)))
        vals = np.where(pos >= 0, self.ratios[np.clip(pos, 0, None)], 1.0)
        return float(vals[0]) if scalar else vals

    def density(self, y):
        return self.ratio_at(y) * self.spec.dominating.density(y)


ZERO_MASS_CUTOFF = 1e-14


def discretize(
    spec: MeasureSpec,
    m: int,
    tol: float = DEFAULT_TOL,
    base_masses: np.ndarray | None = None,
) -> DiscretizedMeasure:
    """Per-bin mass-ratio discretization; zero-reference-mass bins get ratio 1.

    `base_masses` lets sweeps reuse reference-measure bin masses across
    specs sharing the same dominating measure.
    """
    layout = grid_intervals(m)
    base = spec.base()
    ratios = np.empty(len(layout))
    nu_masses = np.empty(len(layout))
    nt_masses = np.empty(len(layout))
    err = 0.0
    for i, gi in enumerate(layout.intervals):
        if base_masses is not None:
            nt = QuadratureResult(float(base_masses[i]), 0.0, 0, True)
        else:
            nt = interval_mass(base, gi.interval, tol)
        nu = interval_mass(spec, gi.interval, tol)
        nt_masses[i] = nt.value
        nu_masses[i] = nu.value
        err += nt.error_estimate + nu.error_estimate
        if nt.value <= max(ZERO_MASS_CUTOFF, 10 * nt.error_estimate):
            ratios[i] = 1.0
            if nt.value <= ZERO_MASS_CUTOFF:
                nu_masses[i] = 0.0
                nt_masses[i] = 0.0
        else:
            ratios[i] = nu.value / nt.value
    return DiscretizedMeasure(
        grid=layout,
        spec=spec,
        ratios=ratios,
        nu_masses=nu_masses,
        nutilde_masses=nt_masses,
        mass_error=err,
    )


@dataclass
class L1Error:
    """int |ratio - discretized ratio| d nu~, split into the three regions."""

    identity_term: float
    bin_term: float
    tail_term: float
    error_estimate: float

    @property
    def total(self) -> float:
        return self.identity_term + self.bin_term + self.tail_term


def _abs_diff_integral(spec: MeasureSpec, level: float, interval: Interval, tol) -> QuadratureResult:
    """int_interval |ratio(y) - level| d nu~ restricted to the support."""
    dom = spec.dominating
    f = lambda y: np.abs(spec.ratio(y) - level) * dom.density(y)
    total = QuadratureResult(0.0, 0.0, 0, True)
    for sup in dom.support:
        piece = interval.intersect(sup)
        if piece is None:
            continue
        for sub in piece.split_at_zero():
            total = total + integrate(
                f,
                sub,
                singular_at_zero=dom.singularity_order_at_zero,
                tail_decay=dom.tail_decay_hint,
                tol=tol,
            )
    return total


def l1_error(
    spec: MeasureSpec,
    disc: DiscretizedMeasure,
    region: Interval | None = None,
    tol: float = DEFAULT_TOL,
) -> L1Error:
    """Discretization error over `region` (default: the whole line).

    Computed bin by bin so the identity, finite-bin, and tail contributions
    are reported separately.
    """
    layout = disc.grid
    identity = QuadratureResult(0.0, 0.0, 0, True)
    bins = QuadratureResult(0.0, 0.0, 0, True)
    tails = QuadratureResult(0.0, 0.0, 0, True)

    ident = layout.identity_region
    if region is not None:
        ident = region.intersect(ident)
    if ident is not None:
        identity = _abs_diff_integral(spec, 1.0, ident, tol)
        if identity.diverged:
            raise DivergenceError("identity-region term of the L1 error diverges")

    for i, gi in enumerate(layout.intervals):
        piece = gi.interval if region is None else region.intersect(gi.interval)
        if piece is None:
            continue
        res = _abs_diff_integral(spec, disc.ratios[i], piece, tol)
        if res.diverged:
            raise DivergenceError(f"L1 error diverges on bin {i}")
        if gi.tag == FINITE:
            bins = bins + res
        else:
            tails = tails + res

    return L1Error(
        identity_term=identity.value,
        bin_term=bins.value,
        tail_term=tails.value,
        error_estimate=identity.error_estimate
        + bins.error_estimate
        + tails.error_estimate,
    )


def discretization_error(spec: MeasureSpec, m: int, tol: float = DEFAULT_TOL) -> L1Error:
    """D_m = int |ratio - discretized ratio| d nu~ over the whole line."""
    return l1_error(spec, discretize(spec, m, tol), None, tol)
