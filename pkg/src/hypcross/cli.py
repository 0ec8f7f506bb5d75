"""Command line entry point: ``hypcross <subcommand> ...``.

Exit codes: 0 success, 1 config error, 2 numerical failure, 3 resource cap.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from . import lab
from .classes import _random_real_coeffs
from .cutoff import balancing_threshold, block_decompose
from .discretization import dt1_point_search
from .exceptions import (
    AliasingError,
    ConfigError,
    InsufficientGridError,
    MissingSamplesError,
    RankDeficientError,
    ResourceCapError,
)
from .index_sets import hyperbolic_cross
from .sampling_recovery import is_nl_net, random_points, sparse_grid
from .trigpoly import TrigPoly, norm

EXIT_OK, EXIT_CONFIG, EXIT_NUMERICAL, EXIT_CAP = 0, 1, 2, 3
# these subclass ValueError, so they are caught before plain parameter errors
NUMERICAL_ERRORS = (AliasingError, InsufficientGridError, MissingSamplesError, RankDeficientError,
                    ArithmeticError, np.linalg.LinAlgError)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def _p(text: str) -> float:
    return float("inf") if text.lower() in ("inf", "infinity") else float(text)


def cmd_cross(args, out):
    Q = hyperbolic_cross(args.n, args.d, shell_only=args.shell)
    header = [f"k_{j + 1}" for j in range(args.d)] + [f"s_{j + 1}" for j in range(args.d)]
    out.write(",".join(header) + "\n")
    for row in Q.to_csv_rows():
        out.write(row + "\n")


def cmd_grid(args, out):
    pts = sparse_grid(args.n, args.d)
    if args.check_net is not None:
        l = args.check_net
        extra = random_points(2**l, args.d, args.seed) if args.extra else None
        test = pts.union(extra) if extra is not None else pts
        res = is_nl_net(test, args.n, l)
        print(f"# ({args.n},{l})-net: ok={res.ok} worst_s={res.worst_s} outside={res.worst_outside} "
              f"violations={res.violations}", file=sys.stderr)
    for row in pts.to_rows():
        out.write(row + "\n")


def cmd_decompose(args, out):
    Q = hyperbolic_cross(args.n, args.d, shell_only=True)
    f = TrigPoly(Q, _random_real_coeffs(Q, np.random.default_rng(args.seed)))
    if args.auto_threshold:
        m = args.m if args.m is not None else max(1, 2 ** (args.n - 2))
        T = balancing_threshold(args.n, m, args.p)
    else:
        T = args.T
    dec = block_decompose(f, T, args.p)
    cols = [f"s_{j + 1}" for j in range(args.d)] + ["t1_l2", "t2_sup"]
    out.write(",".join(cols) + "\n")
    for s in sorted(dec.t1):
        vals = [str(v) for v in s] + [repr(norm(dec.t1[s], 2)), repr(norm(dec.t2[s], float("inf")))]
        out.write(",".join(vals) + "\n")


def cmd_recover(args, out):
    rows = lab.recovery_cell(args.method, args.d, args.n, args.q, args.family, args.r, args.p, args.seed,
                             truncation=args.truncation)
    out.write(lab.rows_to_csv(rows))


def cmd_discretize(args, out):
    Q = hyperbolic_cross(args.n, args.d)
    res = dt1_point_search(Q, args.q, args.B, args.c_factor, args.trials, args.seed)
    payload = res.report.to_dict()
    payload.update({"budget_m": res.m, "success_rate": res.success_rate, "success": res.success,
                    "trials": args.trials, "seed": args.seed, "c_factor": args.c_factor, "B": args.B})
    out.write(json.dumps(payload, indent=2) + "\n")
    return EXIT_OK if res.success else EXIT_NUMERICAL


def _write_report(report, formats, outdir, stem):
    paths = []
    for fmt in formats:
        paths.append(lab.emit(report, fmt, os.path.join(outdir, f"{stem}.{fmt}")))
    return paths


def cmd_sweep(args, out):
    cfg = lab.SweepConfig.load(args.config, {"output_dir": args.out})
    report = lab.run_sweep(cfg)
    outdir = cfg.output_dir or lab.default_output_dir()
    for path in _write_report(report, cfg.formats, outdir, f"sweep_{cfg.experiment}"):
        out.write(path + "\n")


def cmd_report(args, out):
    try:
        with open(args.input) as fh:
            rows = lab.rows_from_csv(fh.read())
    except OSError as exc:
        raise ConfigError(f"cannot read {args.input}: {exc}") from exc
    report = lab.Report(rows)
    if args.fit:
        report.fit_all(loglog=args.loglog)
    outdir = args.out or lab.default_output_dir()
    stem = os.path.splitext(os.path.basename(args.input))[0] + "_report"
    for path in _write_report(report, ["json", "svg"], outdir, stem):
        out.write(path + "\n")
    table = lab.reference_table(report)
    if table:
        path = os.path.join(outdir, f"{stem}_shapes.json")
        with open(path, "w") as fh:
            json.dump(table, fh, indent=2)
        out.write(path + "\n")


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="hypcross", description="Hyperbolic cross approximation and sampling experiments.")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("cross", help="list Q_n (or the shell) with block labels")
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--shell", action="store_true")
    p.set_defaults(func=cmd_cross)

    p = sub.add_parser("grid", help="list the sparse grid SG(n) as k/2^l rows")
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--check-net", type=int, metavar="L", help="report the (n, L)-net check on stderr")
    p.add_argument("--extra", action="store_true", help="add 2^L random points before the net check")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_grid)

    p = sub.add_parser("decompose", help="cutoff block decomposition of a random shell polynomial")
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--p", type=_p, required=True)
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--T", type=float)
    g.add_argument("--auto-threshold", action="store_true")
    p.add_argument("--m", type=int, help="budget for --auto-threshold (default 2^(n-2))")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_decompose)

    p = sub.add_parser("recover", help="recovery error of one operator on one sampled function")
    p.add_argument("--method", choices=lab.METHODS, required=True)
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--q", type=_p, default=2.0)
    p.add_argument("--family", choices=lab.FAMILIES, default="w")
    p.add_argument("--r", type=float, default=0.4)
    p.add_argument("--p", type=_p, default=4.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--truncation", type=int)
    p.set_defaults(func=cmd_recover)

    p = sub.add_parser("discretize", help="random point search for the Marcinkiewicz window")
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--q", type=_p, default=2.0)
    p.add_argument("--B", type=float, default=1.0)
    p.add_argument("--c-factor", type=float, default=2.0)
    p.add_argument("--trials", type=int, default=20)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_discretize)

    p = sub.add_parser("sweep", help="run a JSON-configured sweep")
    p.add_argument("--config", required=True)
    p.add_argument("--out", help=f"output directory (default ${lab.OUTPUT_ENV} or .)")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("report", help="fit exponents to a sweep CSV and write JSON/SVG")
    p.add_argument("input")
    p.add_argument("--fit", action="store_true")
    p.add_argument("--loglog", action="store_true", help="include the log log log m term")
    p.add_argument("--out")
    p.set_defaults(func=cmd_report)
    return ap


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    args = build_parser().parse_args(argv)
    try:
        code = args.func(args, out)
    except ResourceCapError as exc:
        print(f"hypcross: resource cap: {exc}", file=sys.stderr)
        return EXIT_CAP
    except ConfigError as exc:
        print(f"hypcross: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NUMERICAL_ERRORS as exc:
        print(f"hypcross: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except ValueError as exc:
        print(f"hypcross: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return code or EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
