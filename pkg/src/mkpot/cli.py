"""Command-line surface.

Subcommands: verify, stability, mkp-check, psh, residual, solve-semiflat,
legendre, fit.  Global flags: --config (JSON defaults, overridden by explicit
flags), --json (report path), --seed, --threads, --no-plots.

Exit codes: 0 success; 1 verification failure; 2 I/O or configuration error;
3 stability verdict other than stable_negative; 4 solver reported FAILED.

Reports are canonical JSON (sorted keys, fixed layout), so repeated runs with
the same configuration and seed are byte-identical.  Whenever a CSV table is
written, a figure with the same stem is rendered next to it unless plotting
is disabled.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import io as mio
from .cones import DEFAULT_SEED, ConeSampleConfig
from .forms import Form, standard_structures
from .gridforms import GridForm
from .scalars import PolyScalar, TrigScalar

EXIT_OK = 0
EXIT_VERIFY_FAIL = 1
EXIT_IO = 2
EXIT_NOT_STABLE = 3
EXIT_SOLVER_FAILED = 4

_S, RHO0, SIGMA0, _OMEGA0 = standard_structures()


class CliError(Exception):
    def __init__(self, message: str, code: int = EXIT_IO):
        super().__init__(message)
        self.code = code


def _check_range(name: str, value, lo, hi):
    if not (lo <= value <= hi):
        raise CliError(f"{name} = {value} outside the documented range [{lo}, {hi}]")
    return value


def _write_report(obj, path, also_print: bool = True) -> None:
    text = mio.dump_report(obj)
    if path:
        Path(path).write_text(text)
    if also_print and not path:
        sys.stdout.write(text)


def _maybe_plot(fn, *args) -> str | None:
    try:
        return fn(*args)
    except Exception as exc:  # rendering must never block the numeric output
        print(f"warning: figure rendering failed: {exc}", file=sys.stderr)
        return None


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def cmd_verify(args) -> int:
    from .verify import run_battery

    only = args.only.split(",") if args.only else None
    try:
        results = run_battery(only)
    except KeyError as exc:
        raise CliError(str(exc))
    report = {
        "command": "verify",
        "seed": args.seed,
        "checks": [r.as_dict() for r in results],
        "all_passed": all(r.passed for r in results),
    }
    _write_report(report, args.json, also_print=False)
    for r in results:
        print(f"{'PASS' if r.passed else 'FAIL'}  {r.name}: {r.detail}")
    return EXIT_OK if report["all_passed"] else EXIT_VERIFY_FAIL


def cmd_stability(args) -> int:
    from .stable import STABLE_NEGATIVE, analyze_stable

    try:
        form = mio.read_form(args.form)
    except Exception as exc:
        raise CliError(f"cannot read form file {args.form!r}: {exc}")
    if form.degree != 3:
        raise CliError(f"stability analysis needs a degree-3 form, got degree {form.degree}")
    try:
        analysis = analyze_stable(form)
    except ValueError as exc:
        raise CliError(str(exc))
    report = mio.stable_analysis_to_json(analysis)
    report["command"] = "stability"
    _write_report(report, args.json, also_print=False)
    print(f"lambda = {report['lambda']}")
    print(f"verdict = {analysis.verdict} (exact: {analysis.exact})")
    if analysis.J is not None:
        print("J =")
        for row in analysis.J_array:
            print("  " + " ".join(f"{x:+.6f}" for x in row))
        print(f"dual = {analysis.dual!r}")
    return EXIT_OK if analysis.verdict == STABLE_NEGATIVE else EXIT_NOT_STABLE


def cmd_mkp_check(args) -> int:
    from .potential import flat_example_check, mkp_forms

    report: dict = {"command": "mkp-check"}
    if args.phi:
        phi = _read_phi(args.phi)
        res = mkp_forms(phi)
        report["rho_out"] = mio.form_to_json(res.rho_out)
        report["sigma_out"] = mio.form_to_json(res.sigma_out)
        report["consistent"] = res.consistent
        ok = res.consistent
    else:
        rep = flat_example_check()
        report["flat_example"] = rep.as_dict()
        ok = rep.all_ok
    _write_report(report, args.json, also_print=False)
    print(mio.dump_report(report), end="")
    return EXIT_OK if ok else EXIT_VERIFY_FAIL


def cmd_psh(args) -> int:
    from .potential import classify_psh, classify_sl_psh

    phi = _read_phi(args.phi)
    samples = _check_range("--samples", args.samples, 100, 10_000_000)
    cfg = ConeSampleConfig(sample_count=samples, seed=args.seed,
                           strict_threshold=args.strict_threshold,
                           zero_tolerance=args.zero_tolerance)
    classical = classify_psh(phi, cfg)
    sl = classify_sl_psh(phi, cfg)
    report = {
        "command": "psh",
        "seed": args.seed,
        "classical": classical.as_dict(),
        "special_lagrangian": sl.as_dict(),
    }
    _write_report(report, args.json, also_print=False)
    print(f"classical: {classical.classification}")
    print(f"special-lagrangian: {sl.classification}")
    return EXIT_OK


def cmd_residual(args) -> int:
    from .residuals import HessianField, eq11_density, eq13_lhs, eq14_lhs

    phi = _read_phi(args.phi)
    if not isinstance(phi, (PolyScalar, TrigScalar, Fraction)):
        raise CliError("residual evaluation needs an exact potential file")
    if isinstance(phi, Fraction):
        phi = PolyScalar.const(phi)
    rng = np.random.default_rng(args.seed)
    pts = rng.uniform(-1.0, 1.0, size=(args.points, 6))
    if args.equation in ("9", "11"):
        dens = eq11_density(phi)
        values = np.array([_eval_exact_scalar(dens, p) for p in pts])
        label = "density"
    elif args.equation == "13":
        h = HessianField.from_potential(phi)
        expr = eq13_lhs(h)
        values = np.array([_eval_exact_scalar(expr, p) for p in pts])
        label = "local_expression"
    else:  # 14
        h = HessianField.from_potential(phi)
        expr = eq14_lhs(h)
        values = np.array([_eval_exact_scalar(expr, p) for p in pts])
        label = "sigma2"
    report = {
        "command": "residual",
        "equation": args.equation,
        "seed": args.seed,
        "points": int(args.points),
        "statistic": label,
        "min": float(values.min()),
        "max": float(values.max()),
        "mean": float(values.mean()),
        "std": float(values.std()),
    }
    _write_report(report, args.json, also_print=False)
    if args.csv:
        rows = [[i] + [float(x) for x in pts[i]] + [float(values[i])] for i in range(len(values))]
        mio.write_csv(args.csv, ["index", "x1", "x2", "x3", "x4", "x5", "x6", label], rows)
        if not args.no_plots:
            from .plots import residual_histogram

            _maybe_plot(residual_histogram, values, Path(args.csv).with_suffix(".png"),
                        f"equation {args.equation} {label}")
    print(mio.dump_report(report), end="")
    return EXIT_OK


def cmd_solve_semiflat(args) -> int:
    from .semiflat import (SemiflatProblem, convergence_study, manufactured_problem,
                           semiflat_newton)

    n = _check_range("--N", args.N, 4, 512)
    report: dict = {"command": "solve-semiflat", "N": n, "forcing": args.forcing}
    rows = None
    if args.convergence:
        try:
            ns = [int(x) for x in args.convergence.split(",")]
        except ValueError:
            raise CliError(f"bad --convergence list {args.convergence!r}")
        for nv in ns:
            _check_range("--convergence entries", nv, 4, 512)
        rows = convergence_study(tuple(ns), eps=args.eps, forcing="analytic")
        report["convergence"] = rows

    if args.rhs:
        grid = mio.read_grid_csv(args.rhs)
        if grid.degree != 0 or len(grid.axes) != 3:
            raise CliError("rhs grid must be a degree-0 form on a 3-axis grid")
        q = _parse_q(args.Q)
        problem = SemiflatProblem(f=grid.coeff(0), Q=q, n=grid.n,
                                  newton_tol=args.newton_tol)
    else:
        eps = _check_range("--eps", args.eps, 0.0, 0.4)
        problem, p_star = manufactured_problem(n, eps, args.forcing)
        report["manufactured_eps"] = eps
    sol, rep = semiflat_newton(problem)
    report["solver"] = rep.as_dict()
    if not args.rhs:
        err = sol.p - p_star
        err -= err.mean()
        report["recovery_max_error"] = float(np.abs(err).max())

    if args.out_grid:
        mio.write_grid_csv(GridForm.from_scalar(sol.p, (1, 3, 5), sol.n), args.out_grid)
    if args.csv and rows is not None:
        mio.write_csv(args.csv, ["N", "max_err", "l2_err", "order"],
                      [[r["n"], r["max_err"], r["l2_err"], r["order"]] for r in rows])
        if not args.no_plots:
            from .plots import convergence_figure

            _maybe_plot(convergence_figure, rows, Path(args.csv).with_suffix(".png"))
    if args.json and not args.no_plots:
        from .plots import newton_history_figure

        _maybe_plot(newton_history_figure, rep.as_dict(), Path(args.json).with_suffix(".png"))
    _write_report(report, args.json, also_print=False)
    print(f"solver status: {rep.status} after {rep.iterations} iterations "
          f"(residual {rep.final_residual:.3e})")
    if rows is not None:
        for r in rows:
            print(f"  N={r['n']:4d}  max_err={r['max_err']:.3e}  order={r['order']:.3f}")
    return EXIT_OK if rep.status == "converged" else EXIT_SOLVER_FAILED


def cmd_legendre(args) -> int:
    from .legendre import QuadraticPotential, legendre_experiment
    from .semiflat import manufactured_problem, semiflat_newton

    subset = None
    if args.subset:
        axis_to_pos = {1: 0, 3: 1, 5: 2}
        try:
            subset = tuple(sorted(axis_to_pos[int(x)] for x in args.subset.split(",")))
        except (KeyError, ValueError):
            raise CliError(f"--subset must list odd axes from 1,3,5; got {args.subset!r}")
    if args.quadratic:
        try:
            diag = [float(x) for x in args.quadratic.split(",")]
        except ValueError:
            raise CliError(f"bad --quadratic {args.quadratic!r}")
        if len(diag) != 3 or min(diag) <= 0:
            raise CliError("--quadratic needs three positive diagonal entries")
        phi = QuadraticPotential(np.diag(diag))
    else:
        n = _check_range("--N", args.N, 8, 128)
        problem, _ = manufactured_problem(n, args.eps, "discrete")
        sol, rep = semiflat_newton(problem)
        if rep.status != "converged":
            raise CliError(f"semiflat solve failed: {rep.status}", EXIT_SOLVER_FAILED)
        phi = sol
    report = legendre_experiment(phi, subset=subset, n_y=args.n_y).as_dict()
    report["command"] = "legendre"
    _write_report(report, args.json, also_print=False)
    print(mio.dump_report(report), end="")
    return EXIT_OK


def cmd_fit(args) -> int:
    from .continuity import continuity_fit

    t = _check_range("--t", args.t, 0.0, 1.0)
    n = _check_range("--N", args.N, 2, 16)
    cutoff = _check_range("--cutoff", args.cutoff, 0, n // 2)
    target = _read_target(args.target, t, n)
    p_t, rep = continuity_fit(target, n=n, cutoff=cutoff)
    report = rep.as_dict()
    report["command"] = "fit"
    report["seed"] = args.seed
    _write_report(report, args.json, also_print=False)
    if args.out_grid:
        mio.write_grid_csv(p_t, args.out_grid)
    if args.csv:
        mio.write_csv(args.csv, ["k", "residual", "fitted"],
                      [["".join(str(c) for c in row["k"]), row["residual"], row["fitted"]]
                       for row in rep.per_mode])
        if not args.no_plots and rep.per_mode:
            from .plots import mode_residual_figure

            _maybe_plot(mode_residual_figure, rep.per_mode, Path(args.csv).with_suffix(".png"))
    print(f"fit t={t}: global residual {rep.global_residual:.3e} "
          f"({rep.fitted_modes} fitted modes)")
    return EXIT_OK


def _read_target(path, t: float, n: int):
    from .continuity import ContinuityTarget, manufactured_target

    if not path:
        return ContinuityTarget(t=t, rho=RHO0, sigma=SIGMA0)
    try:
        obj = json.loads(Path(path).read_text())
    except Exception as exc:
        raise CliError(f"cannot read target file {path!r}: {exc}")
    kind = obj.get("kind", "constant")
    if kind == "flat":
        return ContinuityTarget(t=t, rho=RHO0, sigma=SIGMA0)
    if kind == "constant":
        return ContinuityTarget(
            t=t,
            rho=mio.form_from_json(obj["rho"]),
            sigma=mio.form_from_json(obj["sigma"]),
        )
    if kind == "manufactured":
        psi = TrigScalar()
        for mode in obj.get("modes", []):
            freq = tuple(mode["freq"])
            amp = Fraction(str(mode.get("amp", "1")))
            fn = mode.get("fn", "cos")
            term = (TrigScalar.cosine(freq, amp) if fn == "cos"
                    else TrigScalar.sine(freq, amp))
            psi = psi + term
        return manufactured_target(t, psi, n=n)
    if kind == "grid":
        rho = mio.read_grid_csv(obj["rho_csv"])
        sigma = mio.read_grid_csv(obj["sigma_csv"])
        return ContinuityTarget(t=t, rho=rho, sigma=sigma)
    raise CliError(f"unknown target kind {kind!r}")


# ---------------------------------------------------------------------------
# helpers
# ---------------------------------------------------------------------------

def _read_phi(path):
    try:
        return mio.read_potential(path)
    except Exception as exc:
        raise CliError(f"cannot read potential file {path!r}: {exc}")


def _eval_exact_scalar(value, point) -> float:
    if isinstance(value, (Fraction, int)):
        return float(value)
    return value.eval(point)


def _parse_q(text: str) -> np.ndarray:
    if not text:
        return np.eye(3)
    vals = [float(x) for x in text.split(",")]
    if len(vals) == 3:
        return np.diag(vals)
    if len(vals) == 9:
        return np.array(vals).reshape(3, 3)
    raise CliError("--Q needs 3 (diagonal) or 9 (full) comma-separated entries")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mkpot",
        description="Exact and numerical toolkit for mirror potentials on the "
                    "flat six-dimensional symplectic model",
    )
    parser.add_argument("--config", help="JSON file with default option values")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--json", help="write the machine-readable report here")
        p.add_argument("--seed", type=int, default=DEFAULT_SEED,
                       help=f"sampling seed (default {DEFAULT_SEED}, fixed, not time-based)")
        p.add_argument("--threads", type=int, default=1,
                       help="reserved; numeric kernels are vectorized single-process")
        p.add_argument("--no-plots", action="store_true",
                       help="skip figure rendering next to CSV outputs")

    p = sub.add_parser("verify", help="run the exact identity battery")
    p.add_argument("--only", help="comma-separated subset of checks")
    common(p)
    p.set_defaults(fn=cmd_verify)

    p = sub.add_parser("stability", help="Hitchin analysis of a degree-3 form file")
    p.add_argument("form", help="form JSON file")
    common(p)
    p.set_defaults(fn=cmd_stability)

    p = sub.add_parser("mkp-check", help="potential map of a phi file (or the flat example)")
    p.add_argument("--phi", help="degree-0 form JSON file")
    common(p)
    p.set_defaults(fn=cmd_mkp_check)

    p = sub.add_parser("psh", help="plurisubharmonicity classifiers")
    p.add_argument("--phi", required=True, help="degree-0 form JSON file")
    p.add_argument("--samples", type=int, default=2000)
    p.add_argument("--strict-threshold", type=float, default=1e-6)
    p.add_argument("--zero-tolerance", type=float, default=1e-9)
    common(p)
    p.set_defaults(fn=cmd_psh)

    p = sub.add_parser("residual", help="equation residual statistics for a potential")
    p.add_argument("--phi", required=True)
    p.add_argument("--equation", choices=("9", "11", "13", "14"), required=True)
    p.add_argument("--points", type=int, default=64)
    p.add_argument("--csv", help="write per-point values here (figure rendered alongside)")
    common(p)
    p.set_defaults(fn=cmd_residual)

    p = sub.add_parser("solve-semiflat", help="sigma2 Newton solver on the odd torus")
    p.add_argument("--N", type=int, default=64, help="grid points per axis (4..512)")
    p.add_argument("--manufactured", dest="eps_spec", default="eps=0.05",
                   help="manufactured perturbation, e.g. eps=0.05")
    p.add_argument("--forcing", choices=("discrete", "analytic"), default="discrete",
                   help="manufactured forcing: solver stencil or continuum sigma2")
    p.add_argument("--rhs", help="grid CSV with the right-hand side (overrides manufactured)")
    p.add_argument("--Q", default="", help="quadratic part, 3 or 9 comma-separated entries")
    p.add_argument("--convergence", help="comma-separated resolutions for the error table")
    p.add_argument("--newton-tol", type=float, default=1e-10)
    p.add_argument("--csv", help="write the convergence table here")
    p.add_argument("--out-grid", help="write the solved periodic part as grid CSV")
    common(p)
    p.set_defaults(fn=cmd_solve_semiflat)

    p = sub.add_parser("legendre", help="convex conjugation experiments")
    p.add_argument("--quadratic", help="three positive diagonal entries, e.g. 1,2,4")
    p.add_argument("--subset", help="odd axes to conjugate, e.g. 1 or 1,3")
    p.add_argument("--N", type=int, default=32, help="solver grid for the manufactured input")
    p.add_argument("--eps", type=float, default=0.05)
    p.add_argument("--n-y", type=int, default=24, help="transform grid points per axis")
    common(p)
    p.set_defaults(fn=cmd_legendre)

    p = sub.add_parser("fit", help="frequency-space fitter for the deformation family")
    p.add_argument("--t", type=float, required=True)
    p.add_argument("--target", help="target JSON (kinds: flat, constant, manufactured, grid)")
    p.add_argument("--N", type=int, default=4, help="T^6 grid points per axis (2..16)")
    p.add_argument("--cutoff", type=int, default=1, help="frequency cutoff")
    p.add_argument("--csv", help="write the per-mode residual table here")
    p.add_argument("--out-grid", help="write the fitted periodic part as grid CSV")
    common(p)
    p.set_defaults(fn=cmd_fit)

    return parser


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    # --config supplies defaults; explicit flags win because set_defaults runs
    # before parsing
    config_path = None
    for i, tok in enumerate(argv):
        if tok == "--config" and i + 1 < len(argv):
            config_path = argv[i + 1]
        elif tok.startswith("--config="):
            config_path = tok.split("=", 1)[1]
    if config_path:
        try:
            defaults = json.loads(Path(config_path).read_text())
        except Exception as exc:
            print(f"error: cannot read config {config_path!r}: {exc}", file=sys.stderr)
            return EXIT_IO
        if not isinstance(defaults, dict):
            print("error: config file must hold a JSON object", file=sys.stderr)
            return EXIT_IO
        mapped = {k.replace("-", "_"): v for k, v in defaults.items()}
        parser.set_defaults(**mapped)
        for action in parser._subparsers._group_actions:  # subparser defaults shadow the parent's
            for sub_parser in action.choices.values():
                sub_parser.set_defaults(**{
                    k: v for k, v in mapped.items()
                    if any(k == a.dest for a in sub_parser._actions)
                })
    try:
        args = parser.parse_args(argv)
        if hasattr(args, "eps_spec"):
            spec = args.eps_spec
            if not spec.startswith("eps="):
                raise CliError(f"--manufactured expects eps=<value>, got {spec!r}")
            args.eps = float(spec.split("=", 1)[1])
        return args.fn(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code


if __name__ == "__main__":
    sys.exit(main())
