"""Command-line front end: ``parentvol {analytic,mc,ising,fit,verify}``."""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import analytic, ising, montecarlo, validate
from .betafit import FitError, fit_beta_cdf, small_eps_coefficient
from .ensembles import EnsembleSpec, PureState, biased_gaussians
from .montecarlo import EmpiricalCurve
from .report import canonical_json, envelope, to_csv

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2
WORKERS_ENV = "PARENTVOL_WORKERS"
DEFAULT_GRID_POINTS = 25
# execution-only options; they never change results and are kept out of the embedded config
_EXEC_KEYS = {"workers", "out", "format", "config", "command", "func", "canary"}


class UsageError(ValueError):
    pass


def parse_int_list(text: str) -> list[int]:
    try:
        return [int(t) for t in str(text).split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def parse_grid(text: str) -> list[float]:
    """Tolerance grid: ``a,b,c`` explicit, ``a..b[:n]`` log-spaced, ``lin:a..b[:n]`` linear."""
    text = str(text).strip()
    try:
        linear = text.startswith("lin:")
        if linear:
            text = text[4:]
        if ".." in text:
            lo_hi, _, count = text.partition(":")
            lo, hi = (float(v) for v in lo_hi.split(".."))
            n = int(count) if count else DEFAULT_GRID_POINTS
            if linear:
                return [float(v) for v in np.linspace(lo, hi, n)]
            if lo <= 0:
                raise argparse.ArgumentTypeError("log-spaced grids need a positive lower end")
            return [float(v) for v in np.logspace(np.log10(lo), np.log10(hi), n)]
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"cannot parse epsilon grid {text!r}") from None


def _default_workers() -> int:
    try:
        return max(1, int(os.environ.get(WORKERS_ENV, "1")))
    except ValueError:
        return 1


def _resolved_config(args) -> dict:
    return {k: v for k, v in sorted(vars(args).items()) if k not in _EXEC_KEYS}


def _emit(args, report: dict, rows: list[dict], columns: list[str] | None = None) -> None:
    text = canonical_json(report) if args.format == "json" else to_csv(rows, columns)
    if args.out in (None, "-"):
        sys.stdout.write(text)
    else:
        Path(args.out).write_text(text)


# -- analytic -----------------------------------------------------------------------


def _lv_row(quantity: str, value, **params) -> dict:
    return {"quantity": quantity, **params, **value.to_dict()}


def cmd_analytic(args) -> int:
    wanted = [q for q in ("total", "hypersurface", "eps_vol", "rel_vol", "stirling", "ti_bound", "delta_ti")
              if getattr(args, q)]
    if not wanted and not args.fig1:
        raise UsageError("choose at least one quantity (--total, --hypersurface, --eps-vol, --rel-vol, "
                         "--stirling, --ti-bound, --delta-ti, --fig1)")
    rows: list[dict] = []
    eps_list = args.eps or [0.01]
    for N in args.N or []:
        spec = None
        if any(q in wanted for q in ("total", "hypersurface", "eps_vol")):
            spec = analytic.ManifoldSpec(N, args.k, "complex")
        if "total" in wanted:
            rows.append(_lv_row("total_volume", analytic.total_volume(spec), N=N, k=args.k))
        if "hypersurface" in wanted:
            rows.append(_lv_row("hypersurface", analytic.hypersurface(spec, args.L), N=N, k=args.k, L=args.L))
        for e in eps_list:
            if "eps_vol" in wanted:
                rows.append(_lv_row("epsilon_volume", analytic.epsilon_volume(spec, e), N=N, k=args.k, epsilon=e))
            if "rel_vol" in wanted:
                rows.append(_lv_row("relative_volume", analytic.relative_volume_paper(N, e, args.field),
                                    N=N, epsilon=e, field=args.field))
            if "stirling" in wanted:
                value, eps_max = analytic.relative_volume_stirling(N, e)
                rows.append(_lv_row("relative_volume_stirling", value, N=N, epsilon=e))
                rows.append(_lv_row("epsilon_max_stirling", eps_max, N=N))
    if "ti_bound" in wanted or "delta_ti" in wanted:
        missing = [f for f in ("d", "t", "n", "M") if getattr(args, f) is None]
        if missing:
            raise UsageError(f"TI bounds need --{', --'.join(missing)}")
        ti = analytic.TIBoundSpec(args.d, args.t, args.n, args.M, args.k, args.delta, args.k_prime,
                                  eps_list[0] if "delta_ti" in wanted else 0.0)
        params = dict(d=ti.d, t=ti.t, n=ti.n, M=ti.M, k=ti.k, nu=ti.nu, kappa=ti.kappa)
        if "ti_bound" in wanted:
            rows.append(_lv_row("ti_bound", analytic.ti_bound(ti), **params))
        if "delta_ti" in wanted:
            rows.append(_lv_row("delta_ti_relative_bound", analytic.delta_ti_relative_bound(ti), **params,
                                delta=ti.delta, k_prime=ti.k_prime, epsilon=ti.epsilon, kappa_prime=ti.kappa_prime))
    if not rows and not args.fig1:
        raise UsageError("N: no dimension given (use --N)")
    body: dict = {"results": rows}
    csv_rows, columns = rows, None
    if args.fig1:
        if not args.N or not args.eps:
            raise UsageError("--fig1 needs --N and --eps")
        series = {
            str(N): [analytic.relative_volume_paper(N, e, args.field).log10_abs for e in args.eps] for N in args.N
        }
        body["fig1"] = {"field": args.field, "epsilons": list(args.eps), "log10_relative_volume": series}
        columns = ["epsilon"] + [f"log10_rel_N{N}" for N in args.N]
        csv_rows = [
            {"epsilon": e, **{f"log10_rel_N{N}": series[str(N)][i] for N in args.N}} for i, e in enumerate(args.eps)
        ]
    elif rows:
        columns = sorted({k for r in rows for k in r if k != "meta"}, key=lambda c: (c != "quantity", c))
    _emit(args, envelope("analytic", _resolved_config(args), body), csv_rows, columns)
    return EXIT_OK


# -- mc -------------------------------------------------------------------------------

_CURVE_COLUMNS = ["epsilon", "hits", "trials", "fraction", "ci_low", "ci_high"]


def _curve_rows(curve: EmpiricalCurve, **extra) -> list[dict]:
    return [
        {**extra, "epsilon": float(e), "hits": int(h), "trials": curve.trials, "fraction": float(f),
         "ci_low": float(lo), "ci_high": float(hi)}
        for e, h, f, lo, hi in zip(curve.epsilons, curve.hits, curve.fractions, curve.ci_low, curve.ci_high)
    ]


def cmd_mc(args) -> int:
    if args.N < 1:
        raise UsageError("N must be >= 1")
    spec = EnsembleSpec(args.N, args.k, args.field, args.seed)
    grid = args.eps or [0.05, 0.1, 0.2, 0.3]
    kw = dict(workers=args.workers, chunk=args.chunk, confidence=args.confidence, ci_method=args.ci)
    if args.compare:
        rep = montecarlo.compare_with_paper(args.N, grid, args.trials, args.field, args.criterion,
                                            master_seed=args.seed, mode=args.mode, **kw)
        curve = rep.curve
        body = {"curve": curve.to_dict(), "comparison": rep.to_dict()}
        rows = [dict(r, hits=int(h), trials=curve.trials) for r, h in zip(rep.rows(), curve.hits)]
        columns = ["epsilon", "hits", "trials", "mc_estimate", "ci_low", "ci_high", "paper_value", "oracle_value"]
    else:
        curve = montecarlo.estimate_unrestricted(spec, PureState.basis(args.N), grid, args.trials, args.criterion,
                                                 mode=args.mode, **kw)
        oracle = (montecarlo.exact_haar_tail(args.N, curve.epsilons, args.field, args.criterion)
                  if args.N >= 2 else np.ones(curve.epsilons.size))
        body = {"curve": curve.to_dict(), "oracle_value": [float(v) for v in np.atleast_1d(oracle)]}
        rows = [dict(r, oracle_value=float(o)) for r, o in zip(_curve_rows(curve), np.atleast_1d(oracle))]
        columns = _CURVE_COLUMNS + ["oracle_value"]
    body["degenerate_count"] = curve.degenerate_count
    _emit(args, envelope("mc", _resolved_config(args), body), rows, columns)
    return EXIT_OK


# -- ising ----------------------------------------------------------------------------


def _fit_dict(curve: EmpiricalCurve) -> dict:
    try:
        fit = fit_beta_cdf(curve)
    except FitError as exc:
        return {"error": str(exc)}
    return fit.to_dict()


def cmd_ising(args) -> int:
    grid = args.eps or list(ising.ISING_GRID)
    runs, rows = [], []
    for n in args.n:
        spec = ising.IsingSpec(n, args.g, (args.jmin, args.jmax), args.target_J, args.seed)
        audit = None
        if args.audit:
            Path(args.audit).mkdir(parents=True, exist_ok=True)
            audit = Path(args.audit) / f"ising_n{n}_couplings.csv"
        curve = ising.ising_sweep(spec, grid, args.trials, args.criterion, workers=args.workers, chunk=args.chunk,
                                  confidence=args.confidence, ci_method=args.ci, audit_path=audit)
        run = {"n": n, "spec": spec.to_dict(), "curve": curve.to_dict(), "degenerate_count": curve.degenerate_count}
        if not args.no_fit:
            run["fit"] = _fit_dict(curve)
        runs.append(run)
        rows += _curve_rows(curve, n=n)
    _emit(args, envelope("ising", _resolved_config(args), {"runs": runs}), rows, ["n"] + _CURVE_COLUMNS)
    return EXIT_OK


# -- fit --------------------------------------------------------------------------------


def _load_curves(path: Path) -> list[tuple[str, EmpiricalCurve]]:
    if path.suffix.lower() == ".csv":
        with open(path, newline="") as fh:
            recs = list(csv.DictReader(fh))
        if not recs:
            raise UsageError(f"{path}: empty CSV")
        groups: dict[str, list[dict]] = {}
        for r in recs:
            groups.setdefault(r.get("n") or r.get("N") or "curve", []).append(r)
        out = []
        for label, rs in groups.items():
            trials = int(float(rs[0]["trials"]))
            out.append((label, EmpiricalCurve([float(r["epsilon"]) for r in rs],
                                              [int(float(r["hits"])) for r in rs], trials,
                                              rs[0].get("criterion") or "fidelity")))
        return out
    data = json.loads(path.read_text())
    if "runs" in data:
        return [(str(r.get("n", i)), EmpiricalCurve.from_dict(r["curve"])) for i, r in enumerate(data["runs"])]
    if "curve" in data:
        return [("curve", EmpiricalCurve.from_dict(data["curve"]))]
    if "epsilons" in data:
        return [("curve", EmpiricalCurve.from_dict(data))]
    raise UsageError(f"{path}: no curve found (expected 'runs', 'curve' or a bare curve object)")


def cmd_fit(args) -> int:
    path = Path(args.input)
    if not path.exists():
        raise UsageError(f"input: {path} does not exist")
    fits, rows = [], []
    for label, curve in _load_curves(path):
        if args.confidence is not None:
            curve = curve.with_confidence(args.confidence)
        fit = _fit_dict(curve)
        fits.append({"label": label, "fit": fit})
        rows.append({"label": label, **fit})
    status = EXIT_FAIL if any("error" in f["fit"] for f in fits) else EXIT_OK
    config = _resolved_config(args)
    config["input_sha256"] = hashlib.sha256(path.read_bytes()).hexdigest()
    _emit(args, envelope("fit", config, {"fits": fits}), rows,
          ["label", "alpha", "beta", "rmse", "small_eps_coeff", "objective", "n_points", "error"])
    return status


# -- verify -------------------------------------------------------------------------------


def cmd_verify(args) -> int:
    if args.canary:
        with biased_gaussians(args.canary):
            checks = validate.run_all(args.quick, args.workers)
    else:
        checks = validate.run_all(args.quick, args.workers)
    ok = all(c.passed for c in checks)
    body = {"passed": ok, "checks": [c.to_dict() for c in checks],
            "failed": [c.name for c in checks if not c.passed]}
    config = _resolved_config(args)
    if args.canary:
        config["canary_bias"] = args.canary
    _emit(args, envelope("verify", config, body), [c.to_dict() for c in checks],
          ["name", "passed", "statistic", "p_value", "detail"])
    return EXIT_OK if ok else EXIT_FAIL


# -- parser ---------------------------------------------------------------------------------


def build_parser() -> tuple[argparse.ArgumentParser, dict[str, argparse.ArgumentParser]]:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="master seed (64-bit unsigned)")
    common.add_argument("--workers", type=int, default=_default_workers(),
                        help=f"worker processes (default from ${WORKERS_ENV}, else 1)")
    common.add_argument("--out", default=None, help="output file (default stdout)")
    common.add_argument("--format", choices=("json", "csv"), default="json")
    common.add_argument("--config", default=None, help="JSON key-value file; explicit flags win")

    def trials(criterion: str) -> argparse.ArgumentParser:
        # a fresh parent per subcommand: argparse shares parent actions by reference
        p = argparse.ArgumentParser(add_help=False)
        p.add_argument("--trials", type=int, default=100_000)
        p.add_argument("--criterion", choices=("overlap", "fidelity"), default=criterion)
        p.add_argument("--confidence", type=float, default=montecarlo.DEFAULT_CONFIDENCE)
        p.add_argument("--ci", choices=("wilson", "clopper-pearson"), default="wilson")
        p.add_argument("--eps", type=parse_grid, default=None,
                       help="tolerance grid: a,b,c | a..b[:n] (log-spaced) | lin:a..b[:n]")
        return p

    parser = argparse.ArgumentParser(prog="parentvol", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    subs = {}

    p = sub.add_parser("analytic", parents=[common], help="closed-form volumes and bounds")
    p.add_argument("--N", type=parse_int_list, default=None)
    p.add_argument("--k", type=float, default=1.0)
    p.add_argument("--L", type=int, default=1)
    p.add_argument("--field", choices=("complex", "real"), default="complex")
    p.add_argument("--eps", type=parse_grid, default=None)
    for flag in ("total", "hypersurface", "eps-vol", "rel-vol", "stirling", "ti-bound", "delta-ti", "fig1"):
        p.add_argument(f"--{flag}", action="store_true")
    p.add_argument("--d", type=int)
    p.add_argument("--t", type=int)
    p.add_argument("--n", type=int)
    p.add_argument("--M", type=int)
    p.add_argument("--delta", type=float, default=0.0)
    p.add_argument("--k-prime", type=float, default=None)
    p.set_defaults(func=cmd_analytic)
    subs["analytic"] = p

    p = sub.add_parser("mc", parents=[common, trials("overlap")], help="Monte Carlo relative volumes")
    p.add_argument("--N", type=int, required=True)
    p.add_argument("--k", type=float, default=1.0)
    p.add_argument("--field", choices=("complex", "real"), default="complex")
    p.add_argument("--mode", choices=("eigvec", "full-h"), default="eigvec")
    p.add_argument("--compare", action="store_true", help="add closed-form and exact-oracle columns")
    p.add_argument("--chunk", type=int, default=montecarlo.DEFAULT_CHUNK)
    p.set_defaults(func=cmd_mc)
    subs["mc"] = p

    p = sub.add_parser("ising", parents=[common, trials("fidelity")], help="random-coupling Ising experiment")
    p.add_argument("--n", type=parse_int_list, default=[4, 6, 8])
    p.add_argument("--g", type=float, default=1.0)
    p.add_argument("--jmin", type=float, default=0.0)
    p.add_argument("--jmax", type=float, default=2.0)
    p.add_argument("--target-J", type=float, default=1.0)
    p.add_argument("--chunk", type=int, default=ising.DEFAULT_ISING_CHUNK)
    p.add_argument("--audit", default=None, help="directory for per-trial coupling CSVs")
    p.add_argument("--no-fit", action="store_true")
    p.set_defaults(func=cmd_ising)
    subs["ising"] = p

    p = sub.add_parser("fit", parents=[common], help="Beta-CDF fit of a saved curve")
    p.add_argument("--input", required=True, help="JSON report from mc/ising, or CSV with epsilon,hits,trials")
    p.add_argument("--confidence", type=float, default=None)
    p.set_defaults(func=cmd_fit)
    subs["fit"] = p

    p = sub.add_parser("verify", parents=[common], help="statistical validation of the samplers")
    p.add_argument("--quick", action="store_true", help="1e4 instead of 1e5 draws")
    p.add_argument("--canary", type=float, default=0.0, help=argparse.SUPPRESS)
    p.set_defaults(func=cmd_verify)
    subs["verify"] = p
    return parser, subs


def _apply_config_file(argv, subs) -> None:
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("command", nargs="?")
    pre.add_argument("--config", default=None)
    known, _ = pre.parse_known_args(argv)
    if not known.config or known.command not in subs:
        return
    try:
        cfg = json.loads(Path(known.config).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"config: cannot read {known.config}: {exc}") from None
    if not isinstance(cfg, dict):
        raise UsageError("config: expected a JSON object of key-value pairs")
    parser = subs[known.command]
    dests = {a.dest: a for a in parser._actions}
    values = {}
    for key, value in cfg.items():
        dest = key.replace("-", "_")
        if dest not in dests:
            raise UsageError(f"config: unknown option {key!r} for {known.command}")
        action = dests[dest]
        if action.type is not None and isinstance(value, str):
            value = action.type(value)
        elif action.type in (parse_grid, parse_int_list) and isinstance(value, (int, float)):
            value = [value]
        values[dest] = value
    parser.set_defaults(**values)


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser, subs = build_parser()
    try:
        _apply_config_file(argv, subs)
    except (UsageError, argparse.ArgumentTypeError) as exc:
        print(f"parentvol: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_USAGE
    if getattr(args, "workers", 1) < 1:
        print("parentvol: error: workers must be >= 1", file=sys.stderr)
        return EXIT_USAGE
    try:
        return args.func(args)
    except (UsageError, ValueError) as exc:
        print(f"parentvol {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
