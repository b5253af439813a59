"""Configuration-driven command line runner.

Every operation of the library is reachable through a subcommand; each run
writes a manifest.json (full configuration echo, computed constants, fitted
exponents, pass flags) plus CSV profiles for any produced grid function.
Options may come from command-line flags or from a flat key=value file passed
with --config (flags win).  Exit codes: 0 success, 2 configuration error,
3 convergence failure, 4 verification failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__
from .barriers import (
    classify_zone6,
    collar_points,
    make_existence_pair,
    make_nonexistence_family,
    make_special_pair,
    verify_barrier,
)
from .errors import (
    AmbiguousRegimeError,
    ConvergenceError,
    DomainError,
    FraclapError,
    VerificationError,
)
from .exponents import ProblemParams, classify_regime, find_tau0
from .fields import SourceField
from .grid import Grid1D, GridFunction
from .operator import assemble
from .quadrature import QuadratureConfig, eval_C, eval_C_derivatives
from .rates import fit_exponent, verify_prop32
from .solvers import IterationConfig, solve_blowup, solve_linear, solve_semilinear

EXIT_CONFIG, EXIT_CONVERGENCE, EXIT_VERIFICATION = 2, 3, 4


def _grid_spec(text: str) -> np.ndarray:
    """Parse lo:hi:step into an inclusive grid."""
    try:
        lo, hi, step = (float(v) for v in text.split(":"))
    except ValueError as exc:
        raise DomainError(f"grid spec {text!r} is not lo:hi:step") from exc
    if step <= 0 or hi < lo:
        raise DomainError(f"grid spec {text!r} must have lo <= hi and step > 0")
    n = int(round((hi - lo) / step))
    return lo + step * np.arange(n + 1)


def _load_config(path: str) -> dict:
    out = {}
    for raw in Path(path).read_text().splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise DomainError(f"config line {raw!r} is not key=value")
        key, val = (s.strip() for s in line.split("=", 1))
        out[key.replace("-", "_")] = val
    return out


def _write_manifest(outdir: Path, payload: dict) -> None:
    payload = dict(payload)
    payload["library_version"] = __version__
    payload["timestamp"] = time.strftime("%Y-%m-%dT%H:%M:%S", time.gmtime())
    outdir.mkdir(parents=True, exist_ok=True)
    with (outdir / "manifest.json").open("w") as fh:
        json.dump(payload, fh, sort_keys=True, indent=2, default=float)
        fh.write("\n")


def _write_error(outdir: Path, kind: str, message: str) -> None:
    outdir.mkdir(parents=True, exist_ok=True)
    with (outdir / "error.json").open("w") as fh:
        json.dump({"error": kind, "message": message}, fh, sort_keys=True, indent=2)
        fh.write("\n")


def _echo(args: argparse.Namespace) -> dict:
    skip = {"func"}
    return {k: v for k, v in vars(args).items() if k not in skip}


def _source_from(args) -> SourceField:
    gamma = getattr(args, "gamma", None)
    if gamma is None:
        return SourceField.zero()
    return SourceField.power_collar(gamma, kappa_f=getattr(args, "kappa_f", 1.0))


def _build_grid(args, extra=()) -> Grid1D:
    include = list(extra)
    for shell in getattr(args, "levels", ()) or ():
        include.append(1.0 / shell)
    return Grid1D.graded(args.n, args.grading, include=include)


def _levels(args, grid: Grid1D) -> tuple:
    levels = tuple(args.levels)
    if getattr(args, "full_level", False):
        levels = levels + (int(2.0 / grid.min_spacing),)
    return levels


# --------------------------------------------------------------------------
# subcommands
# --------------------------------------------------------------------------


def cmd_ctau(args, outdir: Path) -> int:
    cfg = QuadratureConfig(abs_tol=args.abs_tol, rel_tol=args.rel_tol)
    rows = []
    taus = _grid_spec(args.tau_grid) if args.tau_grid else [args.tau]
    if taus[0] is None:
        raise DomainError("ctau needs --tau or --tau-grid")
    for tau in taus:
        c = eval_C(float(tau), args.alpha, cfg)
        c1, c2 = eval_C_derivatives(float(tau), args.alpha, cfg)
        rows.append((float(tau), c, c1, c2))
    outdir.mkdir(parents=True, exist_ok=True)
    with (outdir / "ctau.csv").open("w") as fh:
        fh.write("tau,C,C1,C2\n")
        for row in rows:
            fh.write(",".join(repr(v) for v in row) + "\n")
    _write_manifest(
        outdir,
        {
            "command": "ctau",
            "config": _echo(args),
            "n_points": len(rows),
            "C_first": rows[0][1],
            "C_last": rows[-1][1],
            "convex_everywhere": bool(all(r[3] > 0 for r in rows)),
        },
    )
    return 0


def cmd_tau0(args, outdir: Path) -> int:
    kc = find_tau0(args.alpha, tol=args.tol)
    _write_manifest(
        outdir,
        {
            "command": "tau0",
            "config": _echo(args),
            "tau0": kc.tau0,
            "p_star": kc.p_star,
            "residual": abs(kc.tau0_residual),
            "deviation_from_alpha_minus_1": kc.tau0 - (args.alpha - 1.0),
        },
    )
    return 0


def cmd_regime(args, outdir: Path) -> int:
    kc = find_tau0(args.alpha)
    params = ProblemParams(args.alpha, args.p, source=_source_from(args))
    report = classify_regime(params, gamma=args.gamma, tau=args.tau, kc=kc)
    _write_manifest(
        outdir,
        {
            "command": "regime",
            "config": _echo(args),
            "tau0": kc.tau0,
            "p_star": kc.p_star,
            **report.to_dict(),
        },
    )
    return 0


def cmd_solve(args, outdir: Path) -> int:
    source = _source_from(args)
    if source.kind == "power_collar" and source.kappa_f < 0:
        raise DomainError("solve expects a nonnegative source")
    params = ProblemParams(args.alpha, args.p, source=source)
    grid = _build_grid(args)
    op = assemble(grid, args.alpha)
    f_vals = source.value(grid.nodes)
    sub = GridFunction.zeros(grid)
    super_ = solve_linear(op, 0.0, f_vals)
    cfg = IterationConfig(max_iters=args.max_iters, sup_tol=args.sup_tol, shift_mode=args.shift_mode)
    u, trace = solve_semilinear(params, op, sub, super_, cfg)
    outdir.mkdir(parents=True, exist_ok=True)
    u.to_csv(outdir / "solution.csv")
    _write_manifest(
        outdir,
        {
            "command": "solve",
            "config": _echo(args),
            "trace": trace.to_dict(),
            "sup_norm": float(np.max(np.abs(u.values))),
            "profiles": ["solution.csv"],
        },
    )
    return 0


def cmd_blowup(args, outdir: Path) -> int:
    kc = find_tau0(args.alpha)
    params = ProblemParams(args.alpha, args.p, source=_source_from(args))
    grid = _build_grid(args)
    levels = _levels(args, grid)
    cfg = IterationConfig(
        max_iters=args.max_iters,
        sup_tol=args.sup_tol,
        exhaustion_levels=levels,
        shift_mode=args.shift_mode,
    )
    result = solve_blowup(params, grid, kc, cfg, family_t=args.family_t)
    outdir.mkdir(parents=True, exist_ok=True)
    profiles = []
    for lev in result.levels:
        name = f"level_{lev.shell}.csv"
        lev.solution.to_csv(outdir / name)
        profiles.append(name)
    result.final.to_csv(outdir / "solution.csv")
    profiles.append("solution.csv")

    regime = classify_regime(params, kc=kc)
    # by default keep the window clear of the deepest imposed shell, where
    # the level solution is pinned to the barrier data
    fit_lo = args.fit_lo if args.fit_lo is not None else 2.5 / max(levels)
    fit_hi = args.fit_hi if args.fit_hi is not None else max(0.02, 10.0 / max(levels))
    window = (fit_lo, fit_hi)
    fit = fit_exponent(result.final, window)
    # the critical-rate family carries the root exponent, not the zone rate
    predicted = kc.tau0 if args.family_t is not None else regime.predicted_exponent
    fit_ok = (
        predicted is not None
        and abs(fit.exponent - predicted) <= args.fit_tol * abs(predicted)
    )
    _write_manifest(
        outdir,
        {
            "command": "blowup",
            "config": _echo(args),
            "tau0": kc.tau0,
            "p_star": kc.p_star,
            "zone": regime.zone.value,
            "predicted_exponent": predicted,
            "fit": fit.to_dict(),
            "fit_within_tolerance": bool(fit_ok),
            "monotone_in_levels": result.monotone_in_levels,
            "sandwich_ok": result.sandwich_ok,
            "positive_on_final_shell": bool(
                np.all(result.final.values[result.final_free] > 0)
            ),
            "levels": [lev.trace.to_dict() | {"shell": lev.shell} for lev in result.levels],
            "profiles": profiles,
        },
    )
    return 0 if fit_ok else EXIT_VERIFICATION


def cmd_verify_barriers(args, outdir: Path) -> int:
    kc = find_tau0(args.alpha)
    params = ProblemParams(args.alpha, args.p, source=_source_from(args))
    collar = collar_points()
    if args.family_t is not None and args.tau is not None:
        fam, report = make_nonexistence_family(params, kc, args.family_t, args.tau)
        payload = {"family": fam.describe(), "report": json.loads(report.to_json())}
        ok = report.passed
    elif args.family_t is not None:
        sup, sub = make_special_pair(params, kc, args.family_t)
        r_sup = verify_barrier(sup, params, "super", collar)
        r_sub = verify_barrier(sub, params, "sub", collar)
        payload = {
            "super": json.loads(r_sup.to_json()),
            "sub": json.loads(r_sub.to_json()),
            "super_terms": sup.describe(),
            "sub_terms": sub.describe(),
        }
        ok = r_sup.passed and r_sub.passed
    else:
        regime = classify_regime(params, kc=kc)
        sup, sub = make_existence_pair(params, kc, regime)
        r_sup = verify_barrier(sup, params, "super", collar)
        r_sub = verify_barrier(sub, params, "sub", collar)
        payload = {
            "zone": regime.zone.value,
            "super": json.loads(r_sup.to_json()),
            "sub": json.loads(r_sub.to_json()),
            "super_terms": sup.describe(),
            "sub_terms": sub.describe(),
        }
        ok = r_sup.passed and r_sub.passed
    _write_manifest(
        outdir,
        {"command": "verify-barriers", "config": _echo(args), "passed": bool(ok), **payload},
    )
    return 0 if ok else EXIT_VERIFICATION


def cmd_verify_prop32(args, outdir: Path) -> int:
    kc = find_tau0(args.alpha)
    report = verify_prop32(args.alpha, args.tau, kc)
    _write_manifest(
        outdir,
        {"command": "verify-prop32", "config": _echo(args), **report.to_dict()},
    )
    return 0 if report.passed else EXIT_VERIFICATION


def _sweep_point(job) -> dict:
    alpha, p, tau, t, kc_tau0, kc_pstar = job
    from .quadrature import KernelConstants

    kc = KernelConstants(alpha=alpha, tau0=kc_tau0, p_star=kc_pstar)
    row = {"p": p, "tau": tau, "predicted_exponent": ""}
    try:
        regime = classify_regime(ProblemParams(alpha, p), tau=tau, kc=kc)
        row["regime"] = regime.zone.value
        if regime.predicted_exponent is not None:
            row["predicted_exponent"] = repr(regime.predicted_exponent)
    except (DomainError, AmbiguousRegimeError):
        row["regime"] = "boundary"
    try:
        zone, role = classify_zone6(p, tau, kc)
    except (DomainError, AmbiguousRegimeError) as exc:
        row.update(zone="boundary", role="", mu=float("nan"), passed=False, note=str(exc))
        return row
    try:
        params = ProblemParams(alpha, p)
        fam, report = make_nonexistence_family(params, kc, t, tau)
        row.update(
            zone=f"zone{zone}",
            role=role,
            mu=fam.terms[1][0],
            passed=bool(report.passed),
            note="",
        )
    except (VerificationError, DomainError) as exc:
        row.update(zone=f"zone{zone}", role=role, mu=float("nan"), passed=False, note=str(exc))
    return row


def cmd_sweep(args, outdir: Path) -> int:
    kc = find_tau0(args.alpha)
    ps = _grid_spec(args.p_grid)
    taus = _grid_spec(args.tau_grid)
    jobs = [
        (args.alpha, float(p), float(tau), args.family_t, kc.tau0, kc.p_star)
        for p in ps
        for tau in taus
    ]
    workers = int(os.environ.get("FRACLAP_THREADS", "1"))
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_sweep_point, jobs))
    else:
        rows = [_sweep_point(j) for j in jobs]
    rows.sort(key=lambda r: (r["p"], r["tau"]))
    outdir.mkdir(parents=True, exist_ok=True)
    with (outdir / "zone_map.csv").open("w") as fh:
        fh.write("p,tau,zone,role,mu,passed,regime,predicted_exponent,note\n")
        for r in rows:
            fh.write(
                f'{r["p"]!r},{r["tau"]!r},{r["zone"]},{r["role"]},{r["mu"]!r},'
                f'{r["passed"]},{r["regime"]},{r["predicted_exponent"]},"{r["note"]}"\n'
            )
    n_passed = sum(1 for r in rows if r["passed"])
    _write_manifest(
        outdir,
        {
            "command": "sweep",
            "config": _echo(args),
            "tau0": kc.tau0,
            "p_star": kc.p_star,
            "n_points": len(rows),
            "n_passed": n_passed,
            "outputs": ["zone_map.csv"],
        },
    )
    return 0


# --------------------------------------------------------------------------
# argument wiring
# --------------------------------------------------------------------------


def _add_common(sp):
    sp.add_argument("--out", default="fraclap-out", help="output directory")
    sp.add_argument("--config", default=None, help="flat key=value config file")
    sp.add_argument("--seed", type=int, default=0, help="seed for randomized diagnostics")


def _add_problem(sp, with_p=True):
    sp.add_argument("--alpha", type=float, default=None)
    if with_p:
        sp.add_argument("--p", type=float, default=None)
    sp.add_argument("--gamma", type=float, default=None, help="source exponent (power collar)")
    sp.add_argument("--kappa-f", type=float, default=1.0, help="source amplitude")


def _add_solver(sp):
    sp.add_argument("--n", type=int, default=1001, help="interior grid nodes")
    sp.add_argument("--grading", type=float, default=3.0)
    sp.add_argument("--max-iters", type=int, default=20000)
    sp.add_argument("--sup-tol", type=float, default=1e-9)
    sp.add_argument(
        "--shift-mode", choices=("scalar", "nodewise", "adaptive"), default="adaptive"
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fraclap",
        description="critical constants, barriers and blow-up solves for the "
        "fractional semilinear problem on the unit interval",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("ctau", help="kernel constant C and its derivatives")
    _add_common(sp)
    sp.add_argument("--alpha", type=float, default=None)
    sp.add_argument("--tau", type=float, default=None)
    sp.add_argument("--tau-grid", default=None, help="lo:hi:step")
    sp.add_argument("--abs-tol", type=float, default=1e-12)
    sp.add_argument("--rel-tol", type=float, default=1e-10)
    sp.set_defaults(func=cmd_ctau)

    sp = sub.add_parser("tau0", help="critical exponent tau0 and p*")
    _add_common(sp)
    sp.add_argument("--alpha", type=float, default=None)
    sp.add_argument("--tol", type=float, default=1e-10)
    sp.set_defaults(func=cmd_tau0)

    sp = sub.add_parser("regime", help="classify parameters against the existence/nonexistence zones")
    _add_common(sp)
    _add_problem(sp)
    sp.add_argument("--tau", type=float, default=None)
    sp.set_defaults(func=cmd_regime)

    sp = sub.add_parser("solve", help="bounded monotone semilinear solve")
    _add_common(sp)
    _add_problem(sp)
    _add_solver(sp)
    sp.set_defaults(func=cmd_solve)

    sp = sub.add_parser("blowup", help="boundary blow-up solve by exhaustion")
    _add_common(sp)
    _add_problem(sp)
    _add_solver(sp)
    sp.add_argument(
        "--levels",
        type=lambda s: tuple(int(v) for v in s.split(",")),
        default=(8, 16, 32, 64, 128),
    )
    sp.add_argument("--full-level", action="store_true",
                    help="append a shell below grid resolution (needs f > 0)")
    sp.add_argument("--family-t", type=float, default=None,
                    help="critical-rate family parameter t")
    sp.add_argument("--fit-lo", type=float, default=None,
                    help="fit window start (default: 2.5 / deepest shell)")
    sp.add_argument("--fit-hi", type=float, default=None,
                    help="fit window end (default: max(0.02, 10 / deepest shell))")
    sp.add_argument("--fit-tol", type=float, default=0.05)
    sp.set_defaults(func=cmd_blowup)

    sp = sub.add_parser("verify-barriers", help="verify super/sub-solution constructions")
    _add_common(sp)
    _add_problem(sp)
    sp.add_argument("--tau", type=float, default=None)
    sp.add_argument("--family-t", type=float, default=None)
    sp.set_defaults(func=cmd_verify_barriers)

    sp = sub.add_parser("verify-prop32", help="verify barrier asymptotics for one tau")
    _add_common(sp)
    sp.add_argument("--alpha", type=float, default=None)
    sp.add_argument("--tau", type=float, default=None)
    sp.set_defaults(func=cmd_verify_prop32)

    sp = sub.add_parser("sweep", help="zone map over a (p, tau) grid")
    _add_common(sp)
    sp.add_argument("--alpha", type=float, default=None)
    sp.add_argument("--p-grid", default=None, help="lo:hi:step")
    sp.add_argument("--tau-grid", default=None, help="lo:hi:step")
    sp.add_argument("--family-t", type=float, default=1.0)
    sp.set_defaults(func=cmd_sweep)

    return parser


REQUIRED = {
    "ctau": ("alpha",),
    "tau0": ("alpha",),
    "regime": ("alpha", "p"),
    "solve": ("alpha", "p"),
    "blowup": ("alpha", "p"),
    "verify-barriers": ("alpha", "p"),
    "verify-prop32": ("alpha", "tau"),
    "sweep": ("alpha", "p_grid", "tau_grid"),
}

_CASTS = {
    "alpha": float, "p": float, "gamma": float, "kappa_f": float, "tau": float,
    "tol": float, "abs_tol": float, "rel_tol": float, "sup_tol": float,
    "fit_lo": float, "fit_hi": float, "fit_tol": float, "family_t": float,
    "grading": float, "n": int, "max_iters": int, "seed": int,
    "levels": lambda s: tuple(int(v) for v in s.split(",")),
    "full_level": lambda s: s.lower() in ("1", "true", "yes"),
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "config", None):
        try:
            overrides = _load_config(args.config)
        except (OSError, DomainError) as exc:
            print(f"fraclap: config error: {exc}", file=sys.stderr)
            return EXIT_CONFIG
        ns = vars(args)
        for key, raw in overrides.items():
            if key not in ns:
                print(f"fraclap: config error: unknown key {key!r}", file=sys.stderr)
                return EXIT_CONFIG
            # a flag given on the command line wins over the file
            if ns[key] == parser.get_default(key) or ns[key] is None:
                cast = _CASTS.get(key, str)
                ns[key] = cast(raw)
        args = argparse.Namespace(**ns)
    missing = [k for k in REQUIRED.get(args.command, ()) if getattr(args, k, None) is None]
    if missing:
        print(f"fraclap: config error: missing required option(s) {missing}", file=sys.stderr)
        return EXIT_CONFIG

    outdir = Path(args.out)
    try:
        return args.func(args, outdir)
    except (DomainError, AmbiguousRegimeError) as exc:
        _write_error(outdir, type(exc).__name__, str(exc))
        print(f"fraclap: {exc}", file=sys.stderr)
        return EXIT_CONFIG if isinstance(exc, DomainError) else EXIT_VERIFICATION
    except ConvergenceError as exc:
        _write_error(outdir, "ConvergenceError", str(exc))
        print(f"fraclap: convergence failure: {exc}", file=sys.stderr)
        return EXIT_CONVERGENCE
    except (VerificationError, FraclapError) as exc:
        _write_error(outdir, type(exc).__name__, str(exc))
        print(f"fraclap: verification failure: {exc}", file=sys.stderr)
        return EXIT_VERIFICATION


if __name__ == "__main__":
    sys.exit(main())
