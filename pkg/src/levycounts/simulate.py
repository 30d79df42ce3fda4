"""Compound-Poisson path sampling, the path kernels, and count extraction."""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .intervals import Interval, Region, as_region
from .measures import MeasureSpec, interval_mass
from .numerics import DivergenceError, QuantileTable, build_quantile_table
from .grid import DiscretizedMeasure, GridLayout, bin_positions_array


@dataclass(frozen=True)
class RandomStream:
    """Reproducible stream: (seed, index) fully determines the draws."""

    seed: int
    index: int = 0

    def generator(self) -> np.random.Generator:
        ss = np.random.SeedSequence(entropy=self.seed, spawn_key=(self.index,))
        return np.random.default_rng(ss)

    def substream(self, index: int) -> "RandomStream":
        return RandomStream(self.seed, index)


@dataclass
class JumpPath:
    """Finite-activity trajectory: drift slope plus sorted jumps."""

    horizon: float
    drift: float
    times: np.ndarray
    sizes: np.ndarray

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        self.sizes = np.asarray(self.sizes, dtype=float)
        if self.times.size:
            if not np.all(np.diff(self.times) > 0):
                raise ValueError("jump times must be strictly increasing")
            if self.times[-1] > self.horizon or self.times[0] <= 0:
                raise ValueError("jump times must lie in ]0, T]")
            if np.any(self.sizes == 0.0):
                raise ValueError("jump sizes must be nonzero")

    @property
    def n_jumps(self) -> int:
        return int(self.times.size)


@dataclass
class CountVector:
    """One nonnegative jump count per grid interval, in grid order."""

    grid: GridLayout
    counts: np.ndarray

    def __post_init__(self):
        self.counts = np.asarray(self.counts, dtype=np.int64)
        if self.counts.shape != (len(self.grid),):
            raise ValueError("count vector length must match the grid")
        if np.any(self.counts < 0):
            raise ValueError("counts must be nonnegative")


def region_outside_identity(m: int) -> Region:
    """{|y| > 1/m}, the finite-activity restriction used by the statistic."""
    return (Interval(-math.inf, -1.0 / m), Interval(1.0 / m, math.inf))


# per-(spec, region) samplers; specs hash by identity
_SAMPLERS: dict = {}

DEFAULT_RESOLUTION = 2**14


def _region_key(region: Region) -> tuple:
    return tuple((p.a, p.b) for p in region)


def region_sampler(
    spec: MeasureSpec, region, resolution: int = DEFAULT_RESOLUTION
) -> list[QuantileTable]:
    """Quantile tables for each region component with positive mass (cached)."""
    region = as_region(region)
    key = (id(spec), _region_key(region), resolution)
    if key not in _SAMPLERS:
        tables = []
        for piece in region:
            clipped = []
            for sup in spec.dominating.support:
                inter = piece.intersect(sup)
                if inter is not None:
                    clipped.extend(inter.split_at_zero())
            for sub in clipped:
                mass = interval_mass(spec, sub).value
                if mass > 0.0:
                    tables.append(build_quantile_table(spec, sub, resolution))
        _SAMPLERS[key] = (spec, tables)
    return _SAMPLERS[key][1]


def region_mass(spec: MeasureSpec, region) -> float:
    """nu(region); raises DivergenceError when infinite."""
    region = as_region(region)
    total = 0.0
    for piece in region:
        total += interval_mass(spec, piece).value
    return total


def simulate_path(
    spec: MeasureSpec,
    region,
    T: float,
    drift: float,
    rng: RandomStream,
    resolution: int = DEFAULT_RESOLUTION,
) -> JumpPath:
    """Sample a compound-Poisson path of the measure restricted to `region`.

    Jump count per region component is Poisson(T * mass); times are uniform
    on ]0, T]; sizes come from the component's quantile table.  Infinite
    region mass raises: restrict to {|y| > 1/m} first (region_outside_identity).
    """
    if T <= 0:
        raise ValueError("T must be positive")
    try:
        tables = region_sampler(spec, region, resolution)
    except DivergenceError as exc:
        raise ValueError(
            "region has infinite jump intensity; restrict to {|y| > 1/m} "
            "via region_outside_identity(m)"
        ) from exc
    g = rng.generator()
    sizes_parts = []
    for table in tables:
        n = int(g.poisson(T * table.mass))
        if n:
            sizes_parts.append(table.sample(g.random(n)))
    sizes = np.concatenate(sizes_parts) if sizes_parts else np.empty(0)
    n_total = sizes.size
    # uniform times; ties have probability zero but re-draw defensively
    times = g.random(n_total) * T
    while n_total > 1 and np.unique(times).size < n_total:
        times = g.random(n_total) * T
    order = np.argsort(times, kind="stable")
    return JumpPath(horizon=T, drift=drift, times=times[order], sizes=sizes[order])


def kernel_pi1(path: JumpPath) -> JumpPath:
    """Keep only the pure-jump part: drop the drift."""
    return replace(path, drift=0.0)


def kernel_pi2(path: JumpPath, eta_tilde: float) -> JumpPath:
    """Shift the trajectory by -t * eta_tilde: decrease the drift slope."""
    return replace(path, drift=path.drift - eta_tilde)


def extract_statistic(path: JumpPath, layout: GridLayout) -> CountVector:
    """Per-bin jump counts; jumps in the identity region are ignored."""
    counts = np.zeros(len(layout), dtype=np.int64)
    if path.n_jumps:
        pos = bin_positions_array(layout.m, path.sizes)
        pos = pos[pos >= 0]
        if pos.size:
            counts = np.bincount(pos, minlength=len(layout)).astype(np.int64)
    return CountVector(grid=layout, counts=counts)


# cached per-bin masses for the direct count sampler
_BIN_MASSES: dict = {}


def bin_masses(spec: MeasureSpec, layout: GridLayout) -> np.ndarray:
    key = (id(spec), layout.m)
    if key not in _BIN_MASSES:
        masses = np.array(
            [interval_mass(spec, gi.interval).value for gi in layout.intervals]
        )
        _BIN_MASSES[key] = (spec, masses)
    return _BIN_MASSES[key][1]


def sample_counts_direct(
    spec: MeasureSpec, layout: GridLayout, T: float, rng: RandomStream
) -> CountVector:
    """One draw from the product-Poisson count experiment."""
    masses = bin_masses(spec, layout)
    g = rng.generator()
    counts = g.poisson(T * masses)
    return CountVector(grid=layout, counts=counts)
