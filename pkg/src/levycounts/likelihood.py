"""Exponential change-of-measure log-likelihoods on finite-activity regions.

Everything here is restricted to a region of finite jump intensity, so the
limiting expression for the log-density becomes an exact finite sum:

    U_T = sum over jumps of log r(jump size)  -  T * int_region (r - 1) d(base),

with r the density ratio of the target measure against the base.  The
ratio of the discretized measure against the original one additionally
splits into nonnegative and nonpositive parts, each with the compensator
of the opposite sign class (reproduced exactly as in the source split).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .intervals import Interval, Region, as_region
from .grid import DiscretizedMeasure, bin_positions_array
from .measures import MeasureSpec
from .numerics import DEFAULT_TOL, QuadratureResult, integrate
from .simulate import JumpPath


@dataclass
class LikelihoodReport:
    """Pathwise change-of-measure report for discretized vs original measure."""

    u_value: float
    compensator: float
    jump_sum: float
    a_plus: float
    a_minus: float
    ratio: float
    singular: bool = False


def _ratio_fn(measure):
    """Ratio against the shared dominating measure, vectorized."""
    if isinstance(measure, DiscretizedMeasure):
        return measure.ratio_at, measure.spec.dominating
    if isinstance(measure, MeasureSpec):
        return (lambda y: np.asarray(measure.ratio(y), dtype=float)), measure.dominating
    raise TypeError(f"unsupported measure type {type(measure)!r}")


def _mass_on_region(measure, region: Region, tol) -> float:
    """Total mass of `measure` on the region."""
    from .measures import interval_mass

    if isinstance(measure, DiscretizedMeasure):
        # piecewise constant: sum ratio_J * nutilde(J ∩ region), plus the
        # identity region (ratio 1) where it overlaps
        base = measure.spec.base()
        total = 0.0
        for i, gi in enumerate(measure.grid.intervals):
            for piece in region:
                inter = piece.intersect(gi.interval)
                if inter is not None:
                    total += measure.ratios[i] * interval_mass(base, inter, tol).value
        ident = measure.grid.identity_region
        for piece in region:
            inter = piece.intersect(ident)
            if inter is not None:
                total += interval_mass(base, inter, tol).value
        return total
    total = 0.0
    for piece in region:
        total += interval_mass(measure, piece, tol).value
    return total


def log_density_u(
    path: JumpPath,
    numerator,
    denominator,
    region,
    tol: float = DEFAULT_TOL,
) -> float:
    """log of d(numerator)/d(denominator) restricted to `region`, along `path`.

    Both measures must be finite on the region and share the dominating
    measure.  A jump where the numerator ratio vanishes yields -inf.
    """
    region = as_region(region)
    r_num, dom_n = _ratio_fn(numerator)
    r_den, dom_d = _ratio_fn(denominator)
    if dom_n is not dom_d:
        raise ValueError("numerator and denominator must share the dominating measure")
    jump_sum = 0.0
    if path.n_jumps:
        num_vals = np.atleast_1d(r_num(path.sizes))
        den_vals = np.atleast_1d(r_den(path.sizes))
        if np.any(num_vals <= 0.0):
            return -math.inf
        jump_sum = float(np.sum(np.log(num_vals) - np.log(den_vals)))
    comp = path.horizon * (
        _mass_on_region(numerator, region, tol) - _mass_on_region(denominator, region, tol)
    )
    return jump_sum - comp


@dataclass
class LogDensityContext:
    """Precomputed compensator for repeated log-density evaluations."""

    r_num: object
    r_den: object
    compensator_rate: float  # int_region (numerator - denominator) masses per unit time

    def log_density(self, path: JumpPath) -> float:
        jump_sum = 0.0
        if path.n_jumps:
            num_vals = np.atleast_1d(self.r_num(path.sizes))
            den_vals = np.atleast_1d(self.r_den(path.sizes))
            if np.any(num_vals <= 0.0):
                return -math.inf
            jump_sum = float(np.sum(np.log(num_vals) - np.log(den_vals)))
        return jump_sum - path.horizon * self.compensator_rate


def log_density_context(
    numerator, denominator, region, tol: float = DEFAULT_TOL
) -> LogDensityContext:
    region = as_region(region)
    r_num, dom_n = _ratio_fn(numerator)
    r_den, dom_d = _ratio_fn(denominator)
    if dom_n is not dom_d:
        raise ValueError("numerator and denominator must share the dominating measure")
    rate = _mass_on_region(numerator, region, tol) - _mass_on_region(
        denominator, region, tol
    )
    return LogDensityContext(r_num, r_den, rate)


def _signed_part_masses(
    spec: MeasureSpec, disc: DiscretizedMeasure, region: Region, tol
) -> tuple[float, float]:
    """(P, N) with P = int (disc - ratio)^+ d nu~ and N = int (ratio - disc)^+ d nu~
    over the region; bin-by-bin so each integrand is smooth up to one kink."""
    dom = spec.dominating
    P = N = 0.0
    pieces: list[tuple[Interval, float]] = []
    for i, gi in enumerate(disc.grid.intervals):
        for reg in region:
            inter = reg.intersect(gi.interval)
            if inter is not None:
                pieces.append((inter, float(disc.ratios[i])))
    ident = disc.grid.identity_region
    for reg in region:
        inter = reg.intersect(ident)
        if inter is not None:
            pieces.append((inter, 1.0))
    for inter, level in pieces:
        for sup in dom.support:
            clip = inter.intersect(sup)
            if clip is None:
                continue
            for sub in clip.split_at_zero():
                fp = lambda y: np.maximum(level - spec.ratio(y), 0.0) * dom.density(y)
                fn = lambda y: np.maximum(spec.ratio(y) - level, 0.0) * dom.density(y)
                P += integrate(
                    fp,
                    sub,
                    singular_at_zero=dom.singularity_order_at_zero,
                    tail_decay=dom.tail_decay_hint,
                    tol=tol,
                ).value
                N += integrate(
                    fn,
                    sub,
                    singular_at_zero=dom.singularity_order_at_zero,
                    tail_decay=dom.tail_decay_hint,
                    tol=tol,
                ).value
    return P, N


@dataclass
class RatioSplitContext:
    """Path-independent pieces of the ratio split, precomputable once."""

    spec: MeasureSpec
    disc: DiscretizedMeasure
    region: Region
    pos_mass: float  # int (disc - ratio)^+ d nu~ over region
    neg_mass: float  # int (ratio - disc)^+ d nu~ over region
    T: float

    @property
    def l1_on_region(self) -> float:
        return self.pos_mass + self.neg_mass


def ratio_split_context(
    spec: MeasureSpec,
    disc: DiscretizedMeasure,
    region,
    T: float,
    tol: float = DEFAULT_TOL,
) -> RatioSplitContext:
    region = as_region(region)
    P, N = _signed_part_masses(spec, disc, region, tol)
    return RatioSplitContext(spec, disc, region, P, N, T)


def ratio_split_on(path: JumpPath, ctx: RatioSplitContext) -> LikelihoodReport:
    """Ratio split along one path, with precomputed compensators."""
    spec, disc = ctx.spec, ctx.disc
    sum_plus = sum_minus = 0.0
    singular = False
    if path.n_jumps:
        rho = np.asarray(spec.ratio(path.sizes), dtype=float)
        rbar = np.atleast_1d(disc.ratio_at(path.sizes))
        if np.any(rho <= 0.0):
            singular = True
            rho = np.where(rho <= 0.0, np.nan, rho)
        logs = np.log(rbar) - np.log(rho)
        sum_plus = float(np.sum(logs[logs > 0]))
        sum_minus = float(np.sum(logs[logs <= 0]))
    # each sign class carries the compensator of the opposite one, as in
    # the source split; the compensator of f^- is -(neg mass), of f^+ is +(pos mass)
    a_plus = sum_plus + ctx.T * ctx.neg_mass
    a_minus = sum_minus - ctx.T * ctx.pos_mass
    jump_sum = sum_plus + sum_minus
    comp = ctx.T * (ctx.pos_mass - ctx.neg_mass)
    u = jump_sum - comp
    return LikelihoodReport(
        u_value=u,
        compensator=comp,
        jump_sum=jump_sum,
        a_plus=a_plus,
        a_minus=a_minus,
        ratio=math.exp(u) if not singular else 0.0,
        singular=singular,
    )


def ratio_split(
    path: JumpPath,
    spec: MeasureSpec,
    disc: DiscretizedMeasure,
    region,
    T: float | None = None,
    tol: float = DEFAULT_TOL,
) -> LikelihoodReport:
    """Split the discretized-vs-original likelihood ratio into A+ and A-."""
    ctx = ratio_split_context(spec, disc, region, T if T is not None else path.horizon, tol)
    return ratio_split_on(path, ctx)
