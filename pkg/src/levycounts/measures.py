"""Dominating measures, measure specs, and their scalar functionals.

A jump measure is always entered as a pair (dominating measure, ratio):
the dominating measure has a density against Lebesgue, the jump measure
has density ratio(y) against the dominating one.  Three built-in classes
are provided (finite measures with Lipschitz ratios, Gaussian-damped
inverse-square measures, tempered stable measures) plus fully custom
pairs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .intervals import Interval, Region, as_region
from .numerics import (
    DEFAULT_TOL,
    DivergenceError,
    QuadratureResult,
    integrate,
)

INF = math.inf


@dataclass(eq=False)
class DominatingMeasure:
    """Reference measure with a density against Lebesgue on R \\ {0}."""

    density: Callable
    support: Region
    singularity_order_at_zero: float = 0.0
    tail_decay_hint: str = "exponential"
    name: str = "custom"

    def __post_init__(self):
        self.support = as_region(self.support)


@dataclass(eq=False)
class MeasureSpec:
    """A jump measure nu = ratio * dominating."""

    dominating: DominatingMeasure
    ratio: Callable
    class_tag: str = "custom"
    params: dict = field(default_factory=dict)
    name: str = "custom"

    def density(self, y):
        return self.ratio(y) * self.dominating.density(y)

    def base(self) -> "MeasureSpec":
        """The dominating measure itself, as a spec with ratio 1."""
        return MeasureSpec(
            self.dominating, _one, class_tag="custom", name=self.dominating.name
        )


def _one(y):
    return np.ones_like(np.asarray(y, dtype=float))


@dataclass
class Functionals:
    """Scalar functionals of a measure spec, with quadrature error estimates."""

    eta: float
    gamma_star: float
    hellinger: float
    m4_moment: float
    errors: dict = field(default_factory=dict)

    @property
    def eta_finite(self) -> bool:
        return math.isfinite(self.eta)

    @property
    def m4_finite(self) -> bool:
        return math.isfinite(self.m4_moment)


# ---------------------------------------------------------------------------
# built-in classes


def gaussian_dominating(scale: float = 1.0) -> DominatingMeasure:
    """Finite reference measure with density exp(-y^2 / (2 scale^2))."""

    def dens(y):
        y = np.asarray(y, dtype=float)
        return np.exp(-(y**2) / (2.0 * scale**2))

    return DominatingMeasure(
        density=dens,
        support=((-INF, 0.0), (0.0, INF)),
        singularity_order_at_zero=0.0,
        tail_decay_hint="gaussian",
        name=f"gaussian(scale={scale})",
    )


def uniform01_dominating() -> DominatingMeasure:
    """Lebesgue measure restricted to ]0, 1]."""
    return DominatingMeasure(
        density=lambda y: np.ones_like(np.asarray(y, dtype=float)),
        support=((0.0, 1.0),),
        singularity_order_at_zero=0.0,
        tail_decay_hint="compact",
        name="uniform]0,1]",
    )


def example1(
    ratio: Callable,
    L: float,
    K: float,
    dominating: DominatingMeasure | None = None,
    name: str = "example1",
) -> MeasureSpec:
    """Finite measure with an L-Lipschitz ratio, |ratio(0)| <= K.

    Any finite dominating measure with a finite small-jump first moment is
    accepted; the default is the Gaussian-tail reference measure.
    """
    if L <= 0 or K <= 0:
        raise ValueError("L and K must be positive")
    dom = dominating if dominating is not None else gaussian_dominating()
    return MeasureSpec(
        dom, ratio, class_tag="example1", params={"L": L, "K": K}, name=name
    )


def example1_wave(amplitude: float, frequency: float = 1.0) -> MeasureSpec:
    """Default smooth family for the finite-measure class: 1 + a sin(w y)."""
    if not 0.0 < amplitude < 1.0:
        raise ValueError("amplitude must lie in ]0, 1[")

    def ratio(y):
        return 1.0 + amplitude * np.sin(frequency * np.asarray(y, dtype=float))

    return example1(
        ratio,
        L=amplitude * frequency,
        K=1.0 + amplitude,
        name=f"example1_wave(a={amplitude},w={frequency})",
    )


def inverse_square_dominating() -> DominatingMeasure:
    return DominatingMeasure(
        density=lambda y: np.asarray(y, dtype=float) ** -2.0,
        support=((-INF, 0.0), (0.0, INF)),
        singularity_order_at_zero=2.0,
        tail_decay_hint="polynomial",
        name="y^-2",
    )


def example2(lam: float, eps: float = 0.5, M: float = 2.0) -> MeasureSpec:
    """Measure with Lebesgue density exp(-lam y^2) y^-2, eps <= lam <= M."""
    if not (0 < eps <= lam <= M):
        raise ValueError("require 0 < eps <= lam <= M")

    def ratio(y):
        return np.exp(-lam * np.asarray(y, dtype=float) ** 2)

    return MeasureSpec(
        inverse_square_dominating(),
        ratio,
        class_tag="example2",
        params={"lam": lam, "eps": eps, "M": M},
        name=f"example2(lam={lam})",
    )


def tempered_dominating(alpha: float, c1: float, c2: float, eps: float) -> DominatingMeasure:
    def dens(y):
        y = np.asarray(y, dtype=float)
        ay = np.abs(y)
        with np.errstate(divide="ignore", invalid="ignore"):
            out = np.where(
                y < 0,
                c1 * np.exp(-eps * ay) / ay ** (1.0 + alpha),
                c2 * np.exp(-eps * ay) / ay ** (1.0 + alpha),
            )
        return out

    return DominatingMeasure(
        density=dens,
        support=((-INF, 0.0), (0.0, INF)),
        singularity_order_at_zero=1.0 + alpha,
        tail_decay_hint="exponential",
        name=f"tempered(alpha={alpha},eps={eps})",
    )


def example3(
    alpha: float,
    c1: float,
    c2: float,
    lam1: float,
    lam2: float,
    eps: float = 0.5,
    M: float = 2.0,
) -> MeasureSpec:
    """Tempered stable measure: C |y|^-(1+alpha) exp(-lam |y|) on each side."""
    if not alpha < 1:
        raise ValueError("require alpha < 1")
    if not (0 < eps <= lam1 <= M and eps <= lam2 <= M):
        raise ValueError("require eps <= lam_j <= M")

    def ratio(y):
        y = np.asarray(y, dtype=float)
        return np.where(
            y < 0,
            np.exp(-np.abs(y) * (lam1 - eps)),
            np.exp(-y * (lam2 - eps)),
        )

    return MeasureSpec(
        tempered_dominating(alpha, c1, c2, eps),
        ratio,
        class_tag="example3",
        params={
            "alpha": alpha,
            "c1": c1,
            "c2": c2,
            "lam1": lam1,
            "lam2": lam2,
            "eps": eps,
            "M": M,
        },
        name=f"example3(alpha={alpha},lam1={lam1},lam2={lam2})",
    )


def custom(dominating: DominatingMeasure, ratio: Callable, name: str = "custom") -> MeasureSpec:
    return MeasureSpec(dominating, ratio, class_tag="custom", name=name)


# ---------------------------------------------------------------------------
# operations


def ratio_eval(spec: MeasureSpec, y: float) -> float:
    """Pointwise ratio d nu / d nu~ at y != 0."""
    if y == 0.0 and spec.dominating.singularity_order_at_zero > 0:
        raise ValueError("ratio undefined at y = 0 for singular dominating measures")
    val = float(np.asarray(spec.ratio(y)))
    if val < 0:
        raise ValueError(f"negative ratio {val} at y={y}")
    return val


def interval_mass(
    spec: MeasureSpec, interval, tol: float = DEFAULT_TOL
) -> QuadratureResult:
    """nu(interval) = int_interval ratio d nu~, restricted to the support."""
    interval = interval if isinstance(interval, Interval) else Interval(*interval)
    dom = spec.dominating
    total = QuadratureResult(0.0, 0.0, 0, True)
    for sup in dom.support:
        piece = interval.intersect(sup)
        if piece is None:
            continue
        for sub in piece.split_at_zero():
            res = integrate(
                spec.density,
                sub,
                singular_at_zero=dom.singularity_order_at_zero,
                tail_decay=dom.tail_decay_hint,
                tol=tol,
            )
            total = total + res
    if total.diverged:
        raise DivergenceError(
            f"divergent mass of {spec.name} on ]{interval.a}, {interval.b}]"
        )
    return total


def _measure_integral(spec: MeasureSpec, g, interval, tol) -> QuadratureResult:
    """int_interval g(y) nu(dy) with support/singularity handling; may diverge."""
    interval = interval if isinstance(interval, Interval) else Interval(*interval)
    dom = spec.dominating
    total = QuadratureResult(0.0, 0.0, 0, True)
    f = lambda y: g(y) * spec.density(y)
    for sup in dom.support:
        piece = interval.intersect(sup)
        if piece is None:
            continue
        for sub in piece.split_at_zero():
            total = total + integrate(
                f,
                sub,
                singular_at_zero=max(dom.singularity_order_at_zero, 1e-9),
                tail_decay=dom.tail_decay_hint,
                tol=tol,
            )
    return total


def functionals(spec: MeasureSpec, tol: float = DEFAULT_TOL) -> Functionals:
    """eta, gamma*, the Hellinger-type integral, and the small-jump moment."""
    errors: dict[str, float] = {}

    m4 = _measure_integral(spec, np.abs, Interval(-1.0, 1.0), tol)
    if m4.diverged:
        m4_val = INF
        errors["m4_moment"] = INF
    else:
        m4_val = m4.value
        errors["m4_moment"] = m4.error_estimate

    if math.isfinite(m4_val):
        eta = _measure_integral(spec, lambda y: y, Interval(-INF, INF), tol)
        eta_val = INF if eta.diverged else eta.value
        errors["eta"] = INF if eta.diverged else eta.error_estimate
    else:
        eta_val = INF
        errors["eta"] = INF

    dom = spec.dominating
    gs = QuadratureResult(0.0, 0.0, 0, True)
    g_int = lambda y: y * (spec.ratio(y) - 1.0) * dom.density(y)
    for sup in dom.support:
        piece = Interval(-1.0, 1.0).intersect(sup)
        if piece is None:
            continue
        for sub in piece.split_at_zero():
            gs = gs + integrate(
                g_int,
                sub,
                singular_at_zero=max(dom.singularity_order_at_zero - 2.0, 1e-9),
                tail_decay=dom.tail_decay_hint,
                tol=tol,
            )
    errors["gamma_star"] = gs.error_estimate

    hel = QuadratureResult(0.0, 0.0, 0, True)
    h_int = lambda y: (np.sqrt(spec.ratio(y)) - 1.0) ** 2 * dom.density(y)
    for sup in dom.support:
        for sub in sup.split_at_zero():
            hel = hel + integrate(
                h_int,
                sub,
                singular_at_zero=max(dom.singularity_order_at_zero - 2.0, 1e-9),
                tail_decay=dom.tail_decay_hint,
                tol=tol,
            )
    if hel.diverged:
        raise DivergenceError("Hellinger-type integral diverges (condition M2 fails)")
    errors["hellinger"] = hel.error_estimate

    return Functionals(
        eta=eta_val,
        gamma_star=gs.value,
        hellinger=max(hel.value, 0.0),
        m4_moment=m4_val,
        errors=errors,
    )


def lipschitz_check(
    spec: MeasureSpec, n_pairs: int = 1000, span: float = 5.0
) -> tuple[bool, float]:
    """Sampled Lipschitz/K check for the finite-measure class.

    Deterministic grid: pairs (y_i, y_i + h) with y_i uniform on [-span, span]
    and h cycling over {0.5, 0.1, 0.01}.  Returns (ok, worst slope).
    """
    L = spec.params.get("L")
    K = spec.params.get("K")
    if L is None or K is None:
        raise ValueError("lipschitz_check requires an example1 spec")
    ys = np.linspace(-span, span, n_pairs)
    hs = np.tile(np.array([0.5, 0.1, 0.01]), n_pairs // 3 + 1)[:n_pairs]
    r = np.asarray(spec.ratio(ys), dtype=float)
    r2 = np.asarray(spec.ratio(ys + hs), dtype=float)
    slopes = np.abs(r2 - r) / hs
    worst = float(np.max(slopes))
    ok = worst <= L * (1 + 1e-12) and abs(float(np.asarray(spec.ratio(0.0)))) <= K
    return ok, worst
