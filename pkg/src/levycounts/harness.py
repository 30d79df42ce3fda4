"""Experiment harness: condition reports, bound sweeps, count-law and
likelihood Monte-Carlo checks.

The supremum over the full nonparametric measure class is replaced
everywhere by a maximum over a documented finite parameter grid; every
report records the grid and the master seed so runs can be reproduced
exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import stats as _sstats

from .intervals import Interval
from .grid import discretize, grid_intervals, l1_error, L1Error
from .likelihood import (
    log_density_context,
    ratio_split_context,
    ratio_split_on,
)
from .measures import (
    MeasureSpec,
    DivergenceError,
    example1_wave,
    example2,
    example3,
    functionals,
    gaussian_dominating,
    interval_mass,
)
from .numerics import DEFAULT_TOL, integrate
from .simulate import (
    RandomStream,
    extract_statistic,
    region_outside_identity,
    simulate_path,
)

INF = math.inf


# ---------------------------------------------------------------------------
# condition reports


@dataclass
class ConditionReport:
    spec_name: str
    m1_by_construction: bool
    m2_value: float
    m2_error: float
    m2_converged: bool
    m3_table: dict  # m -> L1Error
    m4_nu: float
    m4_nutilde: float

    @property
    def m4_nu_finite(self) -> bool:
        return math.isfinite(self.m4_nu)

    @property
    def m4_nutilde_finite(self) -> bool:
        return math.isfinite(self.m4_nutilde)

    @property
    def m4_holds(self) -> bool:
        return self.m4_nu_finite and self.m4_nutilde_finite


def check_conditions(
    spec: MeasureSpec, m_list, tol: float = DEFAULT_TOL
) -> ConditionReport:
    """Evaluate the admissibility conditions numerically.

    A failing small-jump moment is a finding (reported as infinite), not
    an error; a divergent Hellinger-type integral is reported as
    non-converged.
    """
    try:
        fns = functionals(spec, tol)
        m2_value, m2_err, m2_ok = fns.hellinger, fns.errors["hellinger"], True
        m4_nu = fns.m4_moment
    except DivergenceError:
        m2_value, m2_err, m2_ok = INF, INF, False
        m4_nu = INF
    base_fns = functionals(spec.base(), tol)
    m3 = {}
    for m in m_list:
        disc = discretize(spec, int(m), tol)
        m3[int(m)] = l1_error(spec, disc, None, tol)
    return ConditionReport(
        spec_name=spec.name,
        m1_by_construction=True,
        m2_value=m2_value,
        m2_error=m2_err,
        m2_converged=m2_ok,
        m3_table=m3,
        m4_nu=m4_nu,
        m4_nutilde=base_fns.m4_moment,
    )


# ---------------------------------------------------------------------------
# closed-form bound terms for the example classes


def example_bound_terms(class_tag: str, params: dict, m: int) -> dict:
    """Closed-form decay envelopes for the three example classes.

    example1 terms jointly dominate the full discretization error;
    example3's mid term dominates one side of the finite-bin component;
    example2's mid terms come from a garbled source display and are
    reported as indicative envelopes only (not asserted against).
    """
    if m < 1:
        raise ValueError("m must be positive")
    if class_tag == "example1":
        L, K = params["L"], params["K"]
        if L <= 0 or K <= 0:
            raise ValueError("require positive L, K")
        dom = params.get("dominating") or gaussian_dominating()
        base = MeasureSpec(dom, lambda y: np.ones_like(np.asarray(y, dtype=float)))
        mid_mass = (
            interval_mass(base, Interval(-m, -1.0 / m)).value
            + interval_mass(base, Interval(1.0 / m, m)).value
        )
        tail = 2.0 * (
            integrate(
                lambda y: (K + L * np.abs(y)) * dom.density(y), Interval(m, INF)
            ).value
            + integrate(
                lambda y: (K + L * np.abs(y)) * dom.density(y), Interval(-INF, -m)
            ).value
        )
        ident = integrate(
            lambda y: (K + L * np.abs(y) + 1.0) * dom.density(y),
            Interval(-1.0 / m, 1.0 / m),
        ).value
        return {
            "bin": L / m * mid_mass,
            "tail": tail,
            "identity": ident,
            "total": L / m * mid_mass + tail + ident,
        }
    if class_tag == "example2":
        eps, M = params["eps"], params["M"]
        if eps <= 0 or M < eps:
            raise ValueError("require 0 < eps <= M")
        C = math.sqrt(1.0 / (3.0 * eps))
        mid_lip = 2.0 * M * C / m * (1.0 - m / math.ceil(C * m))
        mid_decay = math.sqrt(2.0 * M) * math.exp(-0.5) / m * max(1.0 / C - 1.0 / m, 0.0)
        return {
            "identity": M / m,
            "C": C,
            "mid_lipschitz": mid_lip,
            "mid_decay": mid_decay,
            "tail": 2.0 / m,
        }
    if class_tag == "example3":
        alpha = params["alpha"]
        c1, c2 = params["c1"], params["c2"]
        eps, M = params["eps"], params["M"]
        if not (0 < alpha < 1 and eps <= M):
            raise ValueError("require 0 < alpha < 1 and eps <= M")
        mid = max(c1, c2) * (M - eps) * (
            m ** (alpha - 1.0) / alpha - 1.0 / (alpha * m ** (alpha + 1.0))
        )
        return {"mid": mid}
    raise ValueError(f"no closed-form bound terms for class {class_tag!r}")


# ---------------------------------------------------------------------------
# sweeps over m and parameter grids


@dataclass
class SweepResult:
    class_tag: str
    m_list: list
    param_grid: list  # list of param dicts
    rows: list  # dicts: params, m, identity/bin/tail/total, error, bound, bound_ok
    worst_case: dict  # m -> max total D over the grid
    worst_error: dict  # m -> error estimate of the worst-case cell
    worst_bin: dict  # m -> max finite-bin component over the grid
    monotone_ok: bool
    bound_ok: bool


def default_param_grid(class_tag: str, n_points: int = 9) -> list[dict]:
    """Log-spaced default grids; the sweep maximum stands in for the class sup."""
    if class_tag == "example1":
        return [
            {"amplitude": float(a), "frequency": 1.0}
            for a in np.geomspace(0.1, 0.9, n_points)
        ]
    if class_tag == "example2":
        return [
            {"lam": float(l), "eps": 0.5, "M": 2.0}
            for l in np.geomspace(0.5, 2.0, n_points)
        ]
    if class_tag == "example3":
        # lam1 = lam2 swept jointly: the error splits additively by side, so
        # the grid diagonal attains the product-grid maximum
        return [
            {
                "alpha": 0.5,
                "c1": 1.0,
                "c2": 1.0,
                "lam": float(l),
                "eps": 0.5,
                "M": 2.0,
            }
            for l in np.geomspace(0.5, 2.0, n_points)
        ]
    raise ValueError(f"no default grid for class {class_tag!r}")


def build_class_spec(class_tag: str, params: dict) -> MeasureSpec:
    if class_tag == "example1":
        return example1_wave(params["amplitude"], params.get("frequency", 1.0))
    if class_tag == "example2":
        return example2(params["lam"], params.get("eps", 0.5), params.get("M", 2.0))
    if class_tag == "example3":
        lam1 = params.get("lam1", params.get("lam"))
        lam2 = params.get("lam2", params.get("lam"))
        return example3(
            params["alpha"],
            params.get("c1", 1.0),
            params.get("c2", 1.0),
            lam1,
            lam2,
            params.get("eps", 0.5),
            params.get("M", 2.0),
        )
    raise ValueError(f"unknown measure class {class_tag!r}")


def _bound_for(class_tag: str, spec: MeasureSpec, params: dict, m: int):
    """(bound value or None, component it bounds: 'total' | 'bin')."""
    if class_tag == "example1":
        terms = example_bound_terms(
            "example1", {"L": spec.params["L"], "K": spec.params["K"]}, m
        )
        return terms["total"], "total"
    if class_tag == "example3":
        terms = example_bound_terms("example3", {**params, **spec.params}, m)
        return 2.0 * terms["mid"], "bin"  # both sides
    return None, None


def m3_sweep(
    class_tag: str,
    param_grid: list[dict] | None,
    m_list,
    tol: float = DEFAULT_TOL,
) -> SweepResult:
    """Tabulate the discretization error over (parameter, m) with envelopes.

    Divergent cells are marked (total = inf) and the sweep continues.
    """
    grid = param_grid if param_grid is not None else default_param_grid(class_tag)
    if not grid:
        raise ValueError("parameter grid must be nonempty")
    m_list = [int(m) for m in m_list]
    rows = []
    worst: dict[int, float] = {m: 0.0 for m in m_list}
    worst_err: dict[int, float] = {m: 0.0 for m in m_list}
    worst_bin: dict[int, float] = {m: 0.0 for m in m_list}
    bound_ok = True
    base_masses_cache: dict[int, np.ndarray] = {}
    for params in grid:
        spec = build_class_spec(class_tag, params)
        for m in m_list:
            if m not in base_masses_cache:
                layout = grid_intervals(m)
                base = spec.base()
                base_masses_cache[m] = np.array(
                    [interval_mass(base, gi.interval, tol).value for gi in layout.intervals]
                )
            row = {"params": dict(params), "m": m}
            try:
                disc = discretize(spec, m, tol, base_masses=base_masses_cache[m])
                d = l1_error(spec, disc, None, tol)
                row.update(
                    identity=d.identity_term,
                    bin=d.bin_term,
                    tail=d.tail_term,
                    total=d.total,
                    error=d.error_estimate,
                    diverged=False,
                )
                worst[m] = max(worst[m], d.total)
                worst_err[m] = max(worst_err[m], d.error_estimate)
                worst_bin[m] = max(worst_bin[m], d.bin_term)
                bound, scope = _bound_for(class_tag, spec, params, m)
                row["bound"] = bound
                row["bound_scope"] = scope
                if bound is not None:
                    checked = d.total if scope == "total" else d.bin_term
                    ok = checked <= bound + 10.0 * d.error_estimate + 1e-12
                    row["bound_ok"] = ok
                    bound_ok = bound_ok and ok
            except DivergenceError:
                row.update(total=INF, diverged=True)
            rows.append(row)
    ms = sorted(m_list)
    monotone_ok = all(
        worst[ms[i + 1]] <= worst[ms[i]] + 2.0 * (worst_err[ms[i]] + worst_err[ms[i + 1]])
        for i in range(len(ms) - 1)
    )
    return SweepResult(
        class_tag=class_tag,
        m_list=m_list,
        param_grid=grid,
        rows=rows,
        worst_case=worst,
        worst_error=worst_err,
        worst_bin=worst_bin,
        monotone_ok=monotone_ok,
        bound_ok=bound_ok,
    )


# ---------------------------------------------------------------------------
# count-law goodness of fit


@dataclass
class GofReport:
    replications: int
    master_seed: int
    lambdas: np.ndarray  # T * nu(J) per bin
    empirical_means: np.ndarray
    chi2_stats: np.ndarray
    p_values: np.ndarray
    covariance: np.ndarray
    max_abs_cov_z: float
    bonferroni_level: float = 0.001

    @property
    def all_bins_pass(self) -> bool:
        n_tested = int(np.sum(np.isfinite(self.chi2_stats)))
        if n_tested == 0:
            return True
        level = self.bonferroni_level / n_tested
        return bool(np.all(self.p_values >= level))

    @property
    def covariances_pass(self) -> bool:
        return bool(self.max_abs_cov_z <= 4.0)


def _poisson_chi2(counts: np.ndarray, lam: float, min_expected: float = 5.0):
    """Pooled chi-square of observed counts against Poisson(lam).

    Returns (stat, p); vacuous bins give (nan, 1).
    """
    n = counts.size
    if lam <= 0.0:
        return (math.nan, 1.0) if np.all(counts == 0) else (math.inf, 0.0)
    kmax = int(counts.max())
    probs = _sstats.poisson.pmf(np.arange(kmax + 1), lam)
    probs = np.append(probs, max(_sstats.poisson.sf(kmax, lam), 0.0))
    observed = np.bincount(counts, minlength=kmax + 2).astype(float)
    expected = n * probs
    # pool adjacent cells left to right until each group expects >= min_expected
    groups_obs, groups_exp = [], []
    acc_o = acc_e = 0.0
    for o, e in zip(observed, expected):
        acc_o += o
        acc_e += e
        if acc_e >= min_expected:
            groups_obs.append(acc_o)
            groups_exp.append(acc_e)
            acc_o = acc_e = 0.0
    if acc_e > 0.0 and groups_exp:
        groups_obs[-1] += acc_o
        groups_exp[-1] += acc_e
    if len(groups_exp) < 2:
        return math.nan, 1.0
    go, ge = np.array(groups_obs), np.array(groups_exp)
    stat = float(np.sum((go - ge) ** 2 / ge))
    dof = len(ge) - 1
    return stat, float(_sstats.chi2.sf(stat, dof))


def count_law_check(
    spec: MeasureSpec,
    m: int,
    T: float,
    replications: int,
    rng: RandomStream,
    tol: float = DEFAULT_TOL,
) -> GofReport:
    """Simulate paths restricted to {|y| > 1/m}, extract counts, test the
    product-Poisson law bin by bin plus pairwise covariances."""
    layout = grid_intervals(m)
    lambdas = T * np.array(
        [interval_mass(spec, gi.interval, tol).value for gi in layout.intervals]
    )
    region = region_outside_identity(m)
    counts = np.empty((replications, len(layout)), dtype=np.int64)
    for r in range(replications):
        path = simulate_path(spec, region, T, 0.0, rng.substream(r))
        counts[r] = extract_statistic(path, layout).counts
    stats = np.empty(len(layout))
    pvals = np.empty(len(layout))
    for i in range(len(layout)):
        stats[i], pvals[i] = _poisson_chi2(counts[:, i], lambdas[i])
    cov = np.cov(counts, rowvar=False) if len(layout) > 1 else np.zeros((1, 1))
    max_z = 0.0
    n = replications
    # the z-score normalization sqrt(lam_i lam_j / n) is only a valid standard
    # error when the expected coincidence mass n lam_i lam_j is large; below
    # that the estimator is a scaled sparse Poisson and a 4-sigma gate is
    # meaningless, so such pairs are skipped
    min_coincidence_mass = 25.0
    for i in range(len(layout)):
        for j in range(i + 1, len(layout)):
            if n * lambdas[i] * lambdas[j] >= min_coincidence_mass:
                z = cov[i, j] / math.sqrt(lambdas[i] * lambdas[j] / n)
                max_z = max(max_z, abs(z))
    return GofReport(
        replications=replications,
        master_seed=rng.seed,
        lambdas=lambdas,
        empirical_means=counts.mean(axis=0),
        chi2_stats=stats,
        p_values=pvals,
        covariance=cov,
        max_abs_cov_z=max_z,
    )


# ---------------------------------------------------------------------------
# martingale and L1-bound Monte-Carlo checks


@dataclass
class LemmaChecks:
    replications: int
    master_seed: int
    d_region: float
    bound_2sinh: float
    martingale_mean: float
    martingale_se: float
    abs_one_minus_r_mean: float
    abs_one_minus_r_se: float
    sinh_identity_mean: float
    sinh_identity_se: float

    @property
    def martingale_pass(self) -> bool:
        return abs(self.martingale_mean - 1.0) <= 4.0 * self.martingale_se + 1e-9

    @property
    def l1_bound_pass(self) -> bool:
        return (
            self.abs_one_minus_r_mean
            <= self.bound_2sinh + 4.0 * self.abs_one_minus_r_se + 1e-9
        )

    @property
    def sinh_identity_pass(self) -> bool:
        return (
            abs(self.sinh_identity_mean - self.bound_2sinh)
            <= 4.0 * self.sinh_identity_se + 1e-9
        )

    @property
    def all_pass(self) -> bool:
        return self.martingale_pass and self.l1_bound_pass and self.sinh_identity_pass


def lemma_checks(
    spec: MeasureSpec,
    m: int,
    T: float,
    replications: int,
    rng: RandomStream,
    region=None,
    tol: float = DEFAULT_TOL,
) -> LemmaChecks:
    """Monte-Carlo verification of the martingale identity, the sinh bound on
    E|1 - R|, and the exact sinh identity for E[e^{A+} - e^{A-}]."""
    if region is None:
        region = region_outside_identity(m)
    disc = discretize(spec, m, tol)
    ctx = ratio_split_context(spec, disc, region, T, tol)
    d_region = ctx.l1_on_region
    bound = 2.0 * math.sinh(T * d_region)

    abs_vals = np.empty(replications)
    sinh_vals = np.empty(replications)
    for r in range(replications):
        path = simulate_path(spec, region, T, 0.0, rng.substream(r))
        rep = ratio_split_on(path, ctx)
        abs_vals[r] = abs(1.0 - rep.ratio)
        sinh_vals[r] = math.exp(rep.a_plus) - math.exp(rep.a_minus)

    base = spec.base()
    ldc = log_density_context(spec, base, region, tol)
    mart_vals = np.empty(replications)
    for r in range(replications):
        path = simulate_path(base, region, T, 0.0, rng.substream(replications + r))
        mart_vals[r] = math.exp(ldc.log_density(path))

    def mse(a):
        return float(a.mean()), float(a.std(ddof=1) / math.sqrt(a.size))

    mm, ms = mse(mart_vals)
    am, as_ = mse(abs_vals)
    sm, ss = mse(sinh_vals)
    return LemmaChecks(
        replications=replications,
        master_seed=rng.seed,
        d_region=d_region,
        bound_2sinh=bound,
        martingale_mean=mm,
        martingale_se=ms,
        abs_one_minus_r_mean=am,
        abs_one_minus_r_se=as_,
        sinh_identity_mean=sm,
        sinh_identity_se=ss,
    )
