"""Command-line interface: ``dpdg <subcommand> ...``.

Exit codes: 0 success, 1 usage or input error, 2 numerical failure,
3 file-system failure.
"""

import argparse
import csv
import json
import math
import os
import sys

import numpy as np

from .errors import DpdgError, NoConvergence
from .estimators import fit_mdpdge, fit_rmdpdge
from .influence import influence_curve, write_influence_csv
from .models import PRESETS, fix_constraint, get_preset
from .rao import mdpde_rao_exponential, rao_statistic
from .simulation import DEFAULT_SEED, load_config, reproduce_tables, run_grid

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC, EXIT_IO = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


# -- parsing helpers ------------------------------------------------------------------

def _floats(text, what):
    try:
        vals = [float(v) for v in str(text).split(",") if v.strip() != ""]
    except ValueError:
        raise UsageError(f"{what}: expected comma-separated numbers, got {text!r}") from None
    if not vals or not all(math.isfinite(v) for v in vals):
        raise UsageError(f"{what}: expected finite numbers, got {text!r}")
    return vals


def _grid(text):
    parts = str(text).split(":")
    if len(parts) != 3:
        raise UsageError(f"--grid must be LO:HI:N, got {text!r}")
    try:
        lo, hi, n = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError:
        raise UsageError(f"--grid must be LO:HI:N, got {text!r}") from None
    if n < 0:
        raise UsageError("--grid point count must be >= 0")
    return np.linspace(lo, hi, n)


def _constraint(text, d):
    """Parse ``fix:i=v[,j=w...]`` with 1-based coordinates."""
    if not text.startswith("fix:"):
        raise UsageError(f"constraint must look like fix:i=v, got {text!r}")
    fixed = {}
    for item in text[4:].split(","):
        if "=" not in item:
            raise UsageError(f"bad constraint item {item!r}; expected i=v")
        i, v = item.split("=", 1)
        try:
            i, v = int(i), float(v)
        except ValueError:
            raise UsageError(f"bad constraint item {item!r}; expected integer=number") from None
        if not 1 <= i <= d:
            raise UsageError(f"constraint index {i} out of range 1..{d}")
        fixed[i - 1] = v
    return fix_constraint(d, fixed)


def read_data(path):
    """Read a numeric CSV; a non-numeric first row is treated as a header."""
    rows = []
    width = None
    with open(path, newline="") as fh:
        for lineno, rec in enumerate(csv.reader(fh), start=1):
            if not rec or all(f.strip() == "" for f in rec):
                continue
            try:
                vals = [float(f) for f in rec]
            except ValueError:
                if lineno == 1 and not rows:
                    continue
                raise UsageError(f"{path}:{lineno}: non-numeric value in row {rec!r}") from None
            if not all(math.isfinite(v) for v in vals):
                raise UsageError(f"{path}:{lineno}: non-finite value")
            if width is None:
                width = len(vals)
            elif len(vals) != width:
                raise UsageError(f"{path}:{lineno}: expected {width} columns, found {len(vals)}")
            rows.append(vals)
    if not rows:
        raise UsageError(f"{path}: no observations")
    return np.array(rows, dtype=float)


def _model(name, data=None, m=None):
    if name not in PRESETS:
        raise UsageError(f"unknown model {name!r}; choose from {', '.join(PRESETS)}")
    if name == "mvnormal":
        m = m or (data.shape[1] if data is not None else 2)
    model = get_preset(name, m=m or 2)
    if data is not None and data.shape[1] != model.m:
        raise UsageError(f"model {name} expects {model.m} data column(s), file has {data.shape[1]}")
    return model


def _emit(obj, as_json, text):
    if as_json:
        print(json.dumps(obj, indent=2))
    else:
        print(text)


def _fmt(v):
    return "[" + ", ".join(f"{x:.6g}" for x in np.atleast_1d(v)) + "]"


# -- subcommands --------------------------------------------------------------------------

def cmd_estimate(args):
    data = read_data(args.data)
    model = _model(args.model, data, args.m)
    if args.constraint:
        cons = _constraint(args.constraint, model.d)
        rep = fit_rmdpdge(data, model, args.tau, cons)
    else:
        rep = fit_mdpdge(data, model, args.tau)
    text = "\n".join([
        f"method:       {rep.method}",
        f"theta_hat:    {_fmt(rep.theta_hat)}",
        f"std_errors:   {_fmt(rep.std_errors)}",
        f"tau:          {rep.tau:g}",
        f"converged:    {str(rep.converged).lower()}",
        f"iterations:   {rep.iterations}",
        f"score_norm:   {rep.score_norm:.3g}",
        f"kkt_residual: {rep.kkt_residual:.3g}",
    ] + ([f"lambda:       {_fmt(rep.lam)}"] if rep.lam.size else []))
    _emit(rep.to_dict(), args.json, text)
    if not rep.converged:
        raise NoConvergence(rep.message or "fit did not converge", rep)
    return EXIT_OK


def cmd_test(args):
    data = read_data(args.data)
    if args.mdpde_beta is not None:
        if data.shape[1] != 1:
            raise UsageError("--mdpde-beta needs one data column")
        theta0 = _floats(args.null, "--null")
        if len(theta0) != 1:
            raise UsageError("--mdpde-beta test needs a scalar --null")
        rep = mdpde_rao_exponential(data[:, 0], theta0[0], args.mdpde_beta, args.alpha)
    else:
        model = _model(args.model, data, args.m)
        theta0 = _floats(args.null, "--null")
        if len(theta0) != model.d:
            raise UsageError(f"--null needs {model.d} value(s) for model {model.name}")
        rep = rao_statistic(data, model, theta0, args.tau, args.alpha)
    text = "\n".join([
        f"method:         {rep.method}",
        f"statistic:      {rep.statistic:.6g}",
        f"df:             {rep.df}",
        f"critical_value: {rep.critical_value:.6g}",
        f"p_value:        {rep.p_value:.6g}",
        f"reject:         {str(rep.reject).lower()}",
    ])
    _emit(rep.to_dict(), args.json, text)
    return EXIT_OK


def cmd_influence(args):
    model = _model(args.model, None, None)
    theta = _floats(args.theta, "--theta")
    taus = _floats(args.tau, "--tau")
    curves = influence_curve(model, theta, taus, _grid(args.grid))
    write_influence_csv(curves, args.out)
    print(f"wrote {sum(len(c.y_grid) for c in curves)} rows to {args.out}")
    return EXIT_OK


def cmd_simulate(args):
    try:
        cfg = load_config(args.config, reps=args.reps, seed=args.seed)
    except (ValueError, TypeError) as exc:
        if isinstance(exc, DpdgError):
            raise
        raise UsageError(f"{args.config}: {exc}") from None
    os.makedirs(args.out, exist_ok=True)
    res = run_grid(cfg)
    path = os.path.join(args.out, "simulation.csv")
    res.to_csv(path)
    print(f"wrote {len(res.rows)} rows to {path}")
    return EXIT_OK


def cmd_reproduce(args):
    res = reproduce_tables(args.out, reps=args.reps, seed=args.seed)
    clean = [c for c in res.cells if c.status == "CLEAN"]
    ok = sum(c.within for c in clean)
    print(f"wrote {', '.join(sorted(res.paths.values()))}")
    print(f"clean cells within tolerance: {ok}/{len(clean)}")
    return EXIT_OK


def build_parser():
    p = _Parser(prog="dpdg", description="Robust Gaussian-working-model estimation and score tests.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    e = sub.add_parser("estimate", help="fit the (restricted) MDPDGE")
    e.add_argument("--model", required=True, choices=PRESETS)
    e.add_argument("--tau", type=float, required=True)
    e.add_argument("--data", required=True)
    e.add_argument("--constraint", help="coordinate fixing, e.g. fix:2=1 (1-based)")
    e.add_argument("--m", type=int, help="observation dimension for mvnormal (default: data columns)")
    e.add_argument("--json", action="store_true")
    e.set_defaults(func=cmd_estimate)

    t = sub.add_parser("test", help="Rao-type test of a simple null")
    t.add_argument("--model", required=True, choices=PRESETS)
    t.add_argument("--null", required=True, help="comma-separated theta0")
    t.add_argument("--tau", type=float, default=0.0)
    t.add_argument("--alpha", type=float, default=0.05)
    t.add_argument("--data", required=True)
    t.add_argument("--mdpde-beta", type=float, help="use the parametric exponential DPD score test instead")
    t.add_argument("--m", type=int)
    t.add_argument("--json", action="store_true")
    t.set_defaults(func=cmd_test)

    i = sub.add_parser("influence", help="tabulate influence curves")
    i.add_argument("--model", required=True, choices=PRESETS)
    i.add_argument("--theta", required=True)
    i.add_argument("--tau", required=True, help="comma-separated tuning parameters")
    i.add_argument("--grid", required=True, help="LO:HI:N")
    i.add_argument("--out", required=True)
    i.set_defaults(func=cmd_influence)

    s = sub.add_parser("simulate", help="Monte Carlo size/power grid from a TOML config")
    s.add_argument("--config", required=True)
    s.add_argument("--out", required=True)
    s.add_argument("--reps", type=int)
    s.add_argument("--seed", type=int)
    s.set_defaults(func=cmd_simulate)

    r = sub.add_parser("reproduce-tables", help="rerun the published size/power study")
    r.add_argument("--out", required=True)
    r.add_argument("--reps", type=int, default=10000)
    r.add_argument("--seed", type=int, default=DEFAULT_SEED)
    r.set_defaults(func=cmd_reproduce)
    return p


def run_cli(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if getattr(args, "alpha", None) is not None and not 0 < args.alpha < 1:
            raise UsageError("--alpha must lie in (0, 1)")
        if getattr(args, "reps", None) is not None and args.reps < 1:
            raise UsageError("--reps must be >= 1")
        return args.func(args)
    except UsageError as exc:
        print(f"dpdg: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"dpdg: IOError: {exc}", file=sys.stderr)
        return EXIT_IO
    except (DpdgError, ArithmeticError, np.linalg.LinAlgError) as exc:
        print(f"dpdg: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ValueError as exc:
        print(f"dpdg: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


def main(argv=None):
    sys.exit(run_cli(argv))


if __name__ == "__main__":
    main()
