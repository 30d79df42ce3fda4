"""Config-driven batch front end.

Each subcommand reads one strict JSON configuration, dispatches to the
library, and writes delimited tables (CSV), structured reports (JSON),
two-column plot data (.dat), and rendered figures (PNG) into the output
directory.  Re-running with the same config and seed reproduces every
output byte for byte.

Exit codes: 0 success, 1 a claimed property failed its gate, 2 bad
usage/config, 3 numerical divergence.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import math
import os
import sys
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from .intervals import Interval, as_region
from .grid import discretize, grid_intervals, l1_error
from .harness import (
    build_class_spec,
    check_conditions,
    count_law_check,
    default_param_grid,
    example_bound_terms,
    lemma_checks,
    m3_sweep,
)
from .measures import MeasureSpec, custom, functionals, uniform01_dominating
from .numerics import DEFAULT_TOL, DivergenceError
from .simulate import (
    RandomStream,
    region_outside_identity,
    sample_counts_direct,
    extract_statistic,
    simulate_path,
)

PNG_METADATA = {"Software": "levycounts"}


class ConfigError(ValueError):
    pass


class CheckFailure(RuntimeError):
    pass


# named built-ins for "custom" measure configs
def _uniform01_linear() -> MeasureSpec:
    return custom(
        uniform01_dominating(), lambda y: np.asarray(y, dtype=float), "uniform01_linear"
    )


def _uniform01_flat() -> MeasureSpec:
    return custom(
        uniform01_dominating(),
        lambda y: np.ones_like(np.asarray(y, dtype=float)),
        "uniform01",
    )


CUSTOM_MEASURES = {
    "uniform01": _uniform01_flat,
    "uniform01_linear": _uniform01_linear,
}


def spec_from_config(mcfg: dict) -> MeasureSpec:
    if not isinstance(mcfg, dict):
        raise ConfigError("'measure' must be an object")
    unknown = set(mcfg) - {"class", "params", "name"}
    if unknown:
        raise ConfigError(f"unknown measure fields: {sorted(unknown)}")
    cls = mcfg.get("class")
    if cls == "custom":
        name = mcfg.get("name") or (mcfg.get("params") or {}).get("name")
        if name not in CUSTOM_MEASURES:
            raise ConfigError(
                f"unknown custom measure {name!r}; available: {sorted(CUSTOM_MEASURES)}"
            )
        return CUSTOM_MEASURES[name]()
    if cls in ("example1", "example2", "example3"):
        try:
            return build_class_spec(cls, mcfg.get("params") or {})
        except (KeyError, ValueError) as exc:
            raise ConfigError(f"bad params for {cls}: {exc}") from exc
    raise ConfigError(f"field 'measure.class' must name a known class, got {cls!r}")


def region_from_config(value, m: int | None):
    if value is None or value == "outside_identity":
        if m is None:
            raise ConfigError("region 'outside_identity' needs field 'm'")
        return region_outside_identity(m)
    if value == "full":
        return (Interval(-math.inf, 0.0), Interval(0.0, math.inf))
    try:
        return as_region(value)
    except Exception as exc:
        raise ConfigError(f"bad 'region': {exc}") from exc


def _require_keys(cfg: dict, required: set[str], optional: set[str]):
    missing = required - set(cfg)
    if missing:
        raise ConfigError(f"missing config fields: {sorted(missing)}")
    unknown = set(cfg) - required - optional
    if unknown:
        raise ConfigError(f"unknown config fields: {sorted(unknown)}")


def _positive_int(cfg, key):
    v = cfg.get(key)
    if not isinstance(v, int) or v < 1:
        raise ConfigError(f"field {key!r} must be a positive integer, got {v!r}")
    return v


COMMON_OPTIONAL = {"seed", "out_dir", "tolerance", "threads"}


def _jsonable(obj):
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return {k: _jsonable(v) for k, v in dataclasses.asdict(obj).items()}
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, float) and math.isinf(obj):
        return "inf" if obj > 0 else "-inf"
    return obj


def _write_json(path: Path, payload):
    path.write_text(json.dumps(_jsonable(payload), indent=2, sort_keys=True) + "\n")


def _write_csv(path: Path, header, rows):
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for row in rows:
            w.writerow([repr(v) if isinstance(v, float) else v for v in row])


def _write_dat(path: Path, xs, ys):
    with path.open("w") as fh:
        for x, y in zip(xs, ys):
            fh.write(f"{x!r} {y!r}\n")


def _savefig(fig, path: Path):
    fig.savefig(path, dpi=120, metadata=PNG_METADATA)
    plt.close(fig)


# ---------------------------------------------------------------------------
# subcommands


def cmd_discretize(cfg: dict, out: Path, tol: float, seed: int) -> int:
    _require_keys(cfg, {"measure", "m"}, COMMON_OPTIONAL)
    m = _positive_int(cfg, "m")
    spec = spec_from_config(cfg["measure"])
    disc = discretize(spec, m, tol)
    d = l1_error(spec, disc, None, tol)

    rows = []
    for i, gi in enumerate(disc.grid.intervals):
        rows.append(
            (
                i,
                gi.tag,
                float(gi.interval.a),
                float(gi.interval.b),
                float(disc.ratios[i]),
                float(disc.nu_masses[i]),
                float(disc.nutilde_masses[i]),
            )
        )
    _write_csv(
        out / "grid.csv",
        ["index", "tag", "left", "right", "ratio", "nu_mass", "nutilde_mass"],
        rows,
    )
    _write_json(
        out / "dm.json",
        {
            "config": cfg,
            "m": m,
            "identity_term": d.identity_term,
            "bin_term": d.bin_term,
            "tail_term": d.tail_term,
            "total": d.total,
            "error_estimate": d.error_estimate,
        },
    )
    finite = [
        (0.5 * (r[2] + r[3]), r[4]) for r in rows if r[1] == "finite"
    ]
    if finite:
        xs, ys = zip(*finite)
        _write_dat(out / "ratio.dat", xs, ys)
        fig, ax = plt.subplots(figsize=(7, 4))
        for r in rows:
            if r[1] == "finite":
                ax.hlines(r[4], r[2], r[3], colors="C0")
        grid_y = np.linspace(-m + 1e-6, m, 801)
        grid_y = grid_y[np.abs(grid_y) > 1.0 / m]
        try:
            ax.plot(grid_y, np.asarray(spec.ratio(grid_y), dtype=float), "C1", lw=0.8)
        except Exception:
            pass
        ax.set_xlabel("jump size")
        ax.set_ylabel("density ratio")
        ax.set_title(f"piecewise-constant ratio, m={m}, D={d.total:.4g}")
        _savefig(fig, out / "discretize.png")
    print(f"discretize: m={m} bins={len(disc.grid)} D={d.total:.6g}")
    return 0


def cmd_bound(cfg: dict, out: Path, tol: float, seed: int) -> int:
    _require_keys(cfg, {"measure", "m_list", "T"}, COMMON_OPTIONAL | {"region"})
    spec = spec_from_config(cfg["measure"])
    T = float(cfg["T"])
    m_list = cfg["m_list"]
    if not isinstance(m_list, list) or not m_list:
        raise ConfigError("field 'm_list' must be a nonempty list")
    rows = []
    for m in m_list:
        if not isinstance(m, int) or m < 1:
            raise ConfigError(f"field 'm_list' entries must be positive integers, got {m!r}")
        disc = discretize(spec, m, tol)
        region = None
        if "region" in cfg and cfg["region"] not in (None, "full"):
            pieces = region_from_config(cfg["region"], m)
            d_total = sum(l1_error(spec, disc, p, tol).total for p in pieces)
            err = sum(l1_error(spec, disc, p, tol).error_estimate for p in pieces)
            d = None
        else:
            d = l1_error(spec, disc, None, tol)
            d_total, err = d.total, d.error_estimate
        terms = {}
        if spec.class_tag in ("example1", "example2", "example3"):
            try:
                terms = example_bound_terms(spec.class_tag, spec.params, m)
            except ValueError:
                terms = {}
        rows.append(
            {
                "m": m,
                "D": d_total,
                "error": err,
                "two_sinh": 2.0 * math.sinh(T * d_total),
                "identity": d.identity_term if d else None,
                "bin": d.bin_term if d else None,
                "tail": d.tail_term if d else None,
                "terms": terms,
            }
        )
    _write_csv(
        out / "bound.csv",
        ["m", "D", "error", "two_sinh", "identity", "bin", "tail"],
        [
            (r["m"], r["D"], r["error"], r["two_sinh"], r["identity"], r["bin"], r["tail"])
            for r in rows
        ],
    )
    _write_json(out / "bound.json", {"config": cfg, "T": T, "rows": rows})
    _write_dat(out / "bound.dat", [r["m"] for r in rows], [r["two_sinh"] for r in rows])
    fig, ax = plt.subplots(figsize=(7, 4))
    ax.plot([r["m"] for r in rows], [r["D"] for r in rows], "o-", label="D_m")
    ax.plot([r["m"] for r in rows], [r["two_sinh"] for r in rows], "s-", label="2 sinh(T D_m)")
    ax.set_xlabel("m")
    ax.set_ylabel("value")
    ax.set_title(f"L1 bound vs m ({spec.name})")
    ax.legend()
    _savefig(fig, out / "bound.png")
    for r in rows:
        print(f"bound: m={r['m']} D={r['D']:.6g} 2sinh(TD)={r['two_sinh']:.6g}")
    return 0


def _drift_value(cfg, spec, tol) -> float:
    policy = cfg.get("drift", 0.0)
    if isinstance(policy, (int, float)):
        return float(policy)
    fns = functionals(spec, tol)
    if policy == "gamma_star":
        return fns.gamma_star
    if policy == "eta":
        if not fns.eta_finite:
            raise DivergenceError("eta is infinite for this measure")
        return fns.eta
    raise ConfigError(f"field 'drift' must be a number, 'gamma_star', or 'eta', got {policy!r}")


def cmd_simulate(cfg: dict, out: Path, tol: float, seed: int) -> int:
    _require_keys(
        cfg,
        {"measure", "T"},
        COMMON_OPTIONAL | {"m", "region", "drift", "paths", "resolution"},
    )
    spec = spec_from_config(cfg["measure"])
    T = float(cfg["T"])
    m = cfg.get("m")
    region = region_from_config(cfg.get("region"), m)
    n_paths = cfg.get("paths", 1)
    if not isinstance(n_paths, int) or n_paths < 1:
        raise ConfigError("field 'paths' must be a positive integer")
    resolution = cfg.get("resolution", 2**14)
    drift = _drift_value(cfg, spec, tol)
    rng = RandomStream(seed)
    summaries = []
    for i in range(n_paths):
        try:
            path = simulate_path(spec, region, T, drift, rng.substream(i), resolution)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        _write_csv(
            out / f"path_{i:04d}.csv",
            ["time", "size"],
            list(zip(path.times.tolist(), path.sizes.tolist())),
        )
        summaries.append({"path": i, "n_jumps": path.n_jumps, "T": T, "drift": drift})
    _write_json(out / "paths.json", {"config": cfg, "seed": seed, "paths": summaries})
    print(f"simulate: wrote {n_paths} path(s), drift={drift:.6g}")
    return 0


def cmd_counts(cfg: dict, out: Path, tol: float, seed: int) -> int:
    _require_keys(
        cfg, {"measure", "m", "T", "replications"}, COMMON_OPTIONAL | {"mode"}
    )
    spec = spec_from_config(cfg["measure"])
    m = _positive_int(cfg, "m")
    T = float(cfg["T"])
    reps = _positive_int(cfg, "replications")
    mode = cfg.get("mode", "direct")
    if mode not in ("direct", "paths"):
        raise ConfigError("field 'mode' must be 'direct' or 'paths'")
    layout = grid_intervals(m)
    rng = RandomStream(seed)
    mat = np.empty((reps, len(layout)), dtype=np.int64)
    region = region_outside_identity(m)
    for r in range(reps):
        if mode == "direct":
            mat[r] = sample_counts_direct(spec, layout, T, rng.substream(r)).counts
        else:
            path = simulate_path(spec, region, T, 0.0, rng.substream(r))
            mat[r] = extract_statistic(path, layout).counts
    tags = [gi.tag if gi.tag != "finite" else f"J({gi.j},{gi.k})" for gi in layout.intervals]
    _write_csv(out / "counts.csv", ["replication"] + tags, [(r, *mat[r]) for r in range(reps)])
    _write_json(
        out / "counts.json",
        {
            "config": cfg,
            "seed": seed,
            "mode": mode,
            "mean_counts": mat.mean(axis=0),
            "bins": tags,
        },
    )
    hot = int(np.argmax(mat.mean(axis=0)))
    fig, ax = plt.subplots(figsize=(7, 4))
    kmax = int(mat[:, hot].max()) if reps else 0
    ax.hist(
        mat[:, hot], bins=np.arange(kmax + 2) - 0.5, density=True, alpha=0.6, label="empirical"
    )
    lam = float(mat[:, hot].mean())
    from scipy import stats as _sstats

    ks = np.arange(kmax + 1)
    ax.plot(ks, _sstats.poisson.pmf(ks, lam), "C1o-", label=f"Poisson({lam:.3g})")
    ax.set_xlabel(f"count in bin {tags[hot]}")
    ax.set_ylabel("probability")
    ax.legend()
    _savefig(fig, out / "counts.png")
    print(f"counts: {reps} replications, mode={mode}")
    return 0


def cmd_verify(cfg: dict, out: Path, tol: float, seed: int) -> int:
    _require_keys(
        cfg, {"measure", "m", "T", "replications"}, COMMON_OPTIONAL | {"region"}
    )
    spec = spec_from_config(cfg["measure"])
    m = _positive_int(cfg, "m")
    T = float(cfg["T"])
    reps = _positive_int(cfg, "replications")
    region = region_from_config(cfg.get("region"), m)
    rng = RandomStream(seed)
    lc = lemma_checks(spec, m, T, reps, rng, region=region, tol=tol)
    gof = count_law_check(spec, m, T, reps, RandomStream(seed + 1), tol)
    cond = check_conditions(spec, [m], tol)
    report = {
        "config": cfg,
        "seed": seed,
        "lemma": lc,
        "gof": {
            "lambdas": gof.lambdas,
            "empirical_means": gof.empirical_means,
            "p_values": gof.p_values,
            "max_abs_cov_z": gof.max_abs_cov_z,
            "all_bins_pass": gof.all_bins_pass,
            "covariances_pass": gof.covariances_pass,
        },
        "conditions": {
            "m2_value": cond.m2_value,
            "m2_converged": cond.m2_converged,
            "m4_nu": cond.m4_nu,
            "m4_holds": cond.m4_holds,
        },
        "passes": {
            "martingale": lc.martingale_pass,
            "l1_bound": lc.l1_bound_pass,
            "sinh_identity": lc.sinh_identity_pass,
            "count_law": gof.all_bins_pass,
            "independence": gof.covariances_pass,
        },
    }
    _write_json(out / "verify.json", report)
    _write_csv(
        out / "verify.csv",
        ["check", "value", "reference", "pass"],
        [
            ("martingale_mean", lc.martingale_mean, 1.0, lc.martingale_pass),
            ("E_abs_1_minus_R", lc.abs_one_minus_r_mean, lc.bound_2sinh, lc.l1_bound_pass),
            ("sinh_identity", lc.sinh_identity_mean, lc.bound_2sinh, lc.sinh_identity_pass),
            ("max_abs_cov_z", gof.max_abs_cov_z, 4.0, gof.covariances_pass),
            ("min_p_value", float(np.min(gof.p_values)), 0.001, gof.all_bins_pass),
        ],
    )
    ok = all(report["passes"].values())
    for name, flag in report["passes"].items():
        print(f"verify: {name}: {'PASS' if flag else 'FAIL'}")
    if not ok:
        raise CheckFailure("one or more verification gates failed")
    return 0


def cmd_sweep(cfg: dict, out: Path, tol: float, seed: int) -> int:
    _require_keys(cfg, {"class", "m_list"}, COMMON_OPTIONAL | {"param_grid"})
    tag = cfg["class"]
    if tag not in ("example1", "example2", "example3"):
        raise ConfigError(f"field 'class' must be example1|example2|example3, got {tag!r}")
    m_list = cfg["m_list"]
    if not isinstance(m_list, list) or not all(isinstance(m, int) and m >= 1 for m in m_list):
        raise ConfigError("field 'm_list' must be a list of positive integers")
    grid_cfg = cfg.get("param_grid")
    sw = m3_sweep(tag, grid_cfg, m_list, tol)
    _write_csv(
        out / "sweep.csv",
        ["params", "m", "identity", "bin", "tail", "total", "error", "bound", "bound_ok"],
        [
            (
                json.dumps(r["params"], sort_keys=True),
                r["m"],
                r.get("identity"),
                r.get("bin"),
                r.get("tail"),
                r.get("total"),
                r.get("error"),
                r.get("bound"),
                r.get("bound_ok"),
            )
            for r in sw.rows
        ],
    )
    ms = sorted(sw.worst_case)
    _write_csv(
        out / "worst.csv",
        ["m", "worst_D", "error"],
        [(m, sw.worst_case[m], sw.worst_error[m]) for m in ms],
    )
    _write_dat(out / "sweep.dat", ms, [sw.worst_case[m] for m in ms])
    _write_json(
        out / "sweep.json",
        {
            "config": cfg,
            "worst_case": sw.worst_case,
            "worst_bin": sw.worst_bin,
            "monotone_ok": sw.monotone_ok,
            "bound_ok": sw.bound_ok,
        },
    )
    fig, ax = plt.subplots(figsize=(7, 4))
    ax.loglog(ms, [sw.worst_case[m] for m in ms], "o-", label="worst-case D_m")
    ax.loglog(ms, [1.0 / m * sw.worst_case[ms[0]] * ms[0] for m in ms], "--", label="~1/m")
    ax.set_xlabel("m")
    ax.set_ylabel("worst-case D_m")
    ax.set_title(f"discretization-error sweep, {tag}")
    ax.legend()
    _savefig(fig, out / "sweep.png")
    print(
        f"sweep: {tag}, worst-case D: "
        + ", ".join(f"m={m}: {sw.worst_case[m]:.5g}" for m in ms)
    )
    if not (sw.monotone_ok and sw.bound_ok):
        raise CheckFailure("sweep gates failed (monotonicity or closed-form bound)")
    return 0


def cmd_conditions(cfg: dict, out: Path, tol: float, seed: int) -> int:
    _require_keys(cfg, {"measure", "m_list"}, COMMON_OPTIONAL)
    spec = spec_from_config(cfg["measure"])
    m_list = cfg["m_list"]
    if not isinstance(m_list, list) or not all(isinstance(m, int) and m >= 1 for m in m_list):
        raise ConfigError("field 'm_list' must be a list of positive integers")
    cond = check_conditions(spec, m_list, tol)
    _write_json(out / "conditions.json", {"config": cfg, "report": cond})
    _write_csv(
        out / "conditions.csv",
        ["m", "identity", "bin", "tail", "total"],
        [
            (m, d.identity_term, d.bin_term, d.tail_term, d.total)
            for m, d in cond.m3_table.items()
        ],
    )
    print(
        f"conditions: M2={cond.m2_value:.6g} converged={cond.m2_converged} "
        f"M4(nu)={'finite' if cond.m4_nu_finite else 'infinite'} "
        f"M4(ref)={'finite' if cond.m4_nutilde_finite else 'infinite'}"
    )
    return 0


COMMANDS = {
    "discretize": cmd_discretize,
    "bound": cmd_bound,
    "simulate": cmd_simulate,
    "counts": cmd_counts,
    "verify": cmd_verify,
    "sweep": cmd_sweep,
    "conditions": cmd_conditions,
}


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="levycounts",
        description="Numerical lab for jump-measure discretization experiments",
    )
    parser.add_argument("command", choices=sorted(COMMANDS))
    parser.add_argument("--config", required=True, help="path to a JSON config")
    parser.add_argument("--seed", type=int, default=None, help="master seed override")
    parser.add_argument("--out", default=None, help="output directory override")
    parser.add_argument("--threads", type=int, default=1, help="worker count (reserved)")
    parser.add_argument("--tol", type=float, default=None, help="quadrature tolerance override")
    args = parser.parse_args(argv)

    try:
        try:
            cfg = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {args.config!r}: {exc}") from exc
        if not isinstance(cfg, dict):
            raise ConfigError("config must be a JSON object")
        if args.threads < 1:
            raise ConfigError("--threads must be >= 1")
        seed = args.seed if args.seed is not None else cfg.get("seed", 0)
        if not isinstance(seed, int):
            raise ConfigError("field 'seed' must be an integer")
        tol = args.tol if args.tol is not None else cfg.get("tolerance", DEFAULT_TOL)
        if not (isinstance(tol, (int, float)) and tol > 0):
            raise ConfigError("field 'tolerance' must be positive")
        out_dir = (
            args.out
            or cfg.get("out_dir")
            or os.environ.get("LEVYCOUNTS_OUT")
            or "levycounts-out"
        )
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        resolved = dict(cfg)
        resolved["seed"] = seed
        resolved["tolerance"] = tol
        resolved["out_dir"] = str(out)
        (out / f"{args.command}_config.json").write_text(
            json.dumps(resolved, indent=2, sort_keys=True) + "\n"
        )
        return COMMANDS[args.command](cfg, out, float(tol), seed)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except DivergenceError as exc:
        print(f"divergence: {exc}", file=sys.stderr)
        return 3
    except CheckFailure as exc:
        print(f"check failed: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
