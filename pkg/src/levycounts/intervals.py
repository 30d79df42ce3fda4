"""Half-open intervals ]left, right] used throughout the package.

All intervals are left-open, right-closed; an infinite right endpoint is
understood as ]left, oo[.  Endpoints may be floats or exact Fractions
(the discretization grid stores exact rational endpoints).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from numbers import Rational


def _as_float(x) -> float:
    return float(x)


@dataclass(frozen=True)
class Interval:
    """]left, right] with left < right.  Infinite endpoints allowed."""

    left: float | Fraction
    right: float | Fraction

    def __post_init__(self):
        if not _as_float(self.left) < _as_float(self.right):
            raise ValueError(f"empty interval ]{self.left}, {self.right}]")

    @property
    def a(self) -> float:
        return _as_float(self.left)

    @property
    def b(self) -> float:
        return _as_float(self.right)

    @property
    def width(self) -> float:
        return self.b - self.a

    def contains(self, y) -> bool:
        """Exact membership test (Fractions compared exactly when available)."""
        left, right = self.left, self.right
        if isinstance(left, Rational) or isinstance(right, Rational):
            yq = Fraction(y) if not isinstance(y, Rational) else y
            lo = left if not math.isinf(_as_float(left)) else None
            hi = right if not math.isinf(_as_float(right)) else None
            if lo is not None and yq <= lo:
                return False
            if hi is not None and yq > hi:
                return False
            return True
        return self.a < y <= self.b

    def intersect(self, other: "Interval") -> "Interval | None":
        lo = self.left if self.a >= other.a else other.left
        hi = self.right if self.b <= other.b else other.right
        if _as_float(lo) >= _as_float(hi):
            return None
        return Interval(lo, hi)

    def split_at_zero(self) -> list["Interval"]:
        """Split into pieces not containing 0 in the interior."""
        if self.a < 0.0 < self.b:
            return [Interval(self.left, 0.0), Interval(0.0, self.right)]
        return [self]


Region = tuple[Interval, ...]


def as_region(spec) -> Region:
    """Normalize an interval, an (a, b) pair, or a sequence of either into a Region."""
    if isinstance(spec, Interval):
        return (spec,)
    if isinstance(spec, (tuple, list)) and len(spec) == 2 and all(
        isinstance(x, (int, float, Fraction)) for x in spec
    ):
        return (Interval(spec[0], spec[1]),)
    return tuple(p if isinstance(p, Interval) else Interval(p[0], p[1]) for p in spec)


def region_contains(region: Region, y) -> bool:
    return any(p.contains(y) for p in region)
