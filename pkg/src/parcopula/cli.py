"""Command-line front end.

Subcommands::

    parcopula fit DATA.csv --family gaussian
    parcopula split-fit DATA.csv --family frank --subsets 10
    parcopula simulate --family gumbel --rows 50000 --subsets 10 20 --replicates 10
    parcopula report RESULTS_DIR

Errors go to stderr as one line, ``parcopula: error[<kind>]: <message>``.
Exit codes: 0 success, 2 usage error, 3 data error, 4 convergence failure.
"""

from __future__ import annotations

import argparse
import datetime as _dt
import json
import math
import sys
from pathlib import Path

from parcopula import __version__
from parcopula.copulas import CopulaDomainError, CopulaFamily, CopulaModel
from parcopula.mpl import fit
from parcopula.parallel import CombineError, PartitionError, Scheme, default_workers, fit_parallel
from parcopula.pseudo_obs import DataError, check_data, normalized_ranks
from parcopula.results import (
    REPLICATE_COLUMNS,
    SUMMARY_COLUMNS,
    TIMING_COLUMNS,
    SchemaError,
    fmt,
    read_data_csv,
    read_table,
    replicate_rows,
    summary_row,
    timing_row,
    write_table,
)
from parcopula.simulation import (
    DEFAULT_REPLICATES,
    DEFAULT_ROWS,
    DEFAULT_SUBSETS,
    DEFAULT_THETA,
    QUAD_CHANGE_FLAG,
    StudyError,
    run_grid,
)

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_CONVERGENCE = 0, 2, 3, 4
DEFAULT_SEED = 20160101
FIT_COLUMNS = ["family", "n", "theta_hat", "se", "sigma2", "loglik", "iterations", "converged"]
SPLIT_COLUMNS = ["block", "n", "theta_hat", "sigma2", "weight", "converged"]


class CLIError(Exception):
    def __init__(self, kind: str, message: str, code: int):
        super().__init__(message)
        self.kind = kind
        self.code = code


def _fail(kind, message, code):
    raise CLIError(kind, message, code)


def _now() -> str:
    return _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds")


def write_manifest(out_dir: Path, command: str, args, seed, started: str) -> None:
    """Record what was run, with which settings, and when."""
    config = {k: (v.value if hasattr(v, "value") else v) for k, v in sorted(vars(args).items())
              if k not in ("func", "command")}
    lines = [
        f"command: {command}",
        f"tool_version: parcopula {__version__}",
        f"seed: {seed if seed is not None else 'none'}",
        f"config: {json.dumps(config, sort_keys=True, default=str)}",
        f"argv: {json.dumps(sys.argv[1:])}",
        f"started: {started}",
        f"finished: {_now()}",
    ]
    (out_dir / "manifest.txt").write_text("\n".join(lines) + "\n", encoding="utf-8")


def _out_dir(path) -> Path:
    out = Path(path)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        _fail("usage", f"cannot create output directory {out}: {exc.strerror}", EXIT_USAGE)
    return out


def _load(path):
    try:
        return check_data(read_data_csv(path))
    except DataError as exc:
        _fail("data", f"{path}: {exc}", EXIT_DATA)


# --------------------------------------------------------------------------
# fit


def cmd_fit(args) -> int:
    started = _now()
    X = _load(args.input)
    try:
        res = fit(args.family, normalized_ranks(X), min_rows=args.min_rows)
    except CopulaDomainError as exc:
        _fail("data", f"{args.input}: {exc}", EXIT_DATA)
    rows = [
        ("family", res.family.value), ("n", res.n), ("theta_hat", res.theta_hat),
        ("se", res.se), ("loglik", res.loglik), ("iterations", res.iterations),
        ("converged", res.converged),
    ]
    for k, v in rows:
        print(f"{k:<11}{fmt(v)}")
    if args.out:
        out = _out_dir(args.out)
        row = {"family": res.family.value, "n": res.n, "theta_hat": res.theta_hat, "se": res.se,
               "sigma2": res.sigma2, "loglik": res.loglik, "iterations": res.iterations,
               "converged": res.converged}
        write_table(out / "fit.csv", "fit", FIT_COLUMNS, [row])
        write_manifest(out, "fit", args, None, started)
    if not res.converged:
        _fail("convergence", res.message or "fit did not converge", EXIT_CONVERGENCE)
    return EXIT_OK


# --------------------------------------------------------------------------
# split-fit


def cmd_split_fit(args) -> int:
    started = _now()
    X = _load(args.input)
    try:
        comb = fit_parallel(args.family, X, args.subsets, workers=args.workers,
                            scheme=args.scheme, min_rows=args.min_rows)
    except PartitionError as exc:
        _fail("data", f"{args.input}: {exc}", EXIT_DATA)
    except CombineError as exc:
        _fail("convergence", str(exc), EXIT_CONVERGENCE)

    print(f"{'m':>5} {'n_m':>8} {'theta_m':>14} {'sigma2_m':>12} {'seconds':>9}")
    for m, (r, sec) in enumerate(zip(comb.per_block, comb.wall_clock_per_block), start=1):
        flag = "" if r.converged else "  excluded"
        print(f"{m:>5} {r.n:>8} {r.theta_hat:>14.8f} {r.sigma2:>12.4e} {sec:>9.4f}{flag}")
    print(f"theta_combined {fmt(comb.theta_combined)}")
    print(f"blocks_used    {comb.blocks_used}/{comb.n_blocks}")

    if args.out:
        out = _out_dir(args.out)
        rows = [
            {"block": m, "n": r.n, "theta_hat": r.theta_hat, "sigma2": r.sigma2,
             "weight": w, "converged": r.converged}
            for m, (r, w) in enumerate(zip(comb.per_block, comb.weights), start=1)
        ]
        rows.append({"block": "combined", "n": sum(r.n for r in comb.per_block),
                     "theta_hat": comb.theta_combined, "sigma2": math.nan,
                     "weight": math.nan, "converged": True})
        # wall-clock stays on stdout so the file is reproducible
        write_table(out / "split_fit.csv", "split-fit", SPLIT_COLUMNS, rows)
        write_manifest(out, "split-fit", args, None, started)
    return EXIT_OK


# --------------------------------------------------------------------------
# simulate


def _families(name):
    if name == "all":
        return list(CopulaFamily)
    return [CopulaFamily.parse(name)]


def cmd_simulate(args) -> int:
    started = _now()
    families = _families(args.family)
    if args.theta is not None and len(families) > 1:
        _fail("usage", "--theta needs a single --family", EXIT_USAGE)
    for fam in families:
        theta = DEFAULT_THETA[fam] if args.theta is None else args.theta
        try:
            CopulaModel(fam, theta)
        except CopulaDomainError as exc:
            _fail("usage", str(exc), EXIT_USAGE)
    for N in args.rows:
        for M in args.subsets:
            if M < 1 or N // M < args.min_rows:
                _fail("usage", f"N={N}, M={M} leaves fewer than {args.min_rows} rows per block",
                      EXIT_USAGE)
    if args.replicates < 1 or args.quad_nodes < 64:
        _fail("usage", "need --replicates >= 1 and --quad-nodes >= 64", EXIT_USAGE)

    out = _out_dir(args.out)
    workers = default_workers() if args.workers is None else args.workers

    def progress(row):
        if not args.quiet:
            print(f"  s={row.s:<4} full={row.theta_full:.6f} combined={row.theta_combined:.6f}",
                  file=sys.stderr)

    reports = []
    for fam in families:
        theta = DEFAULT_THETA[fam] if args.theta is None else args.theta
        if not args.quiet:
            print(f"{fam.value}: theta={theta} N={list(args.rows)} M={list(args.subsets)} "
                  f"S={args.replicates}", file=sys.stderr)
        try:
            reports += run_grid(fam, theta, rows=args.rows, subsets=args.subsets,
                                S=args.replicates, base_seed=args.seed, workers=workers,
                                quad_nodes=args.quad_nodes, scheme=args.scheme,
                                progress=progress)
        except StudyError as exc:
            _fail("convergence", str(exc), EXIT_CONVERGENCE)

    summary = [summary_row(r) for r in reports]
    write_table(out / "summary.csv", "summary", SUMMARY_COLUMNS, summary)
    write_table(out / "timings.csv", "timings", TIMING_COLUMNS, [timing_row(r) for r in reports])
    write_table(out / "replicates.csv", "replicates", REPLICATE_COLUMNS,
                [row for r in reports for row in replicate_rows(r)])
    if not args.no_figures:
        from parcopula.figures import accuracy_figure

        fig_dir = out / "figures"
        fig_dir.mkdir(exist_ok=True)
        for fam in families:
            accuracy_figure(summary, fam.value, fig_dir / f"{fam.value}.svg")
    write_manifest(out, "simulate", args, args.seed, started)

    for r in reports:
        if r.quadrature_flagged:
            c = r.config
            print(f"parcopula: warning[quadrature]: {c.family.value} N={c.N} M={c.M}: "
                  f"L1/L2 changed by more than {QUAD_CHANGE_FLAG:.0%} under node doubling",
                  file=sys.stderr)
    print(render_accuracy(summary))
    return EXIT_OK


# --------------------------------------------------------------------------
# report


def _collect(dirs):
    summaries, timings, problems = [], [], []
    paths = []
    for d in dirs:
        d = Path(d)
        if not d.is_dir():
            problems.append(f"{d}: not a directory")
            continue
        paths += sorted(d.rglob("summary.csv"))
    for p in paths:
        try:
            summaries += read_table(p, "summary", SUMMARY_COLUMNS)
        except SchemaError as exc:
            problems.append(str(exc))
            continue
        tp = p.with_name("timings.csv")
        if not tp.exists():
            problems.append(f"{tp}: missing, timing table will omit these cells")
            continue
        try:
            timings += read_table(tp, "timings", TIMING_COLUMNS)
        except SchemaError as exc:
            problems.append(str(exc))
    return summaries, timings, problems


def _family_order(rows):
    order = {f.value: i for i, f in enumerate(CopulaFamily)}
    return sorted({r["family"] for r in rows}, key=lambda f: order.get(f, 99))


def timing_rows(timings):
    """Table-1 layout: one row per (family, N), one column per M, then full data."""
    Ms = sorted({int(r["M"]) for r in timings})
    cells = {}
    for r in timings:
        cells.setdefault((r["family"], int(r["N"])), []).append(r)
    out = []
    for fam in _family_order(timings):
        for N in sorted(n for f, n in cells if f == fam):
            group = cells[(fam, N)]
            row = {"family": fam, "N": N}
            for M in Ms:
                vals = [float(r["mean_subset_s"]) for r in group if int(r["M"]) == M]
                row[f"M{M}"] = sum(vals) / len(vals) if vals else math.nan
            full = [float(r["mean_full_s"]) for r in group]
            row["full"] = sum(full) / len(full)
            out.append(row)
    return Ms, out


def render_timing(timings) -> str:
    Ms, rows = timing_rows(timings)
    head = f"{'Copula':<10}{'N':>9}" + "".join(f"{'M=' + str(M):>12}" for M in Ms) + f"{'Full':>12}"
    lines = ["Mean wall-clock seconds per fit", head, "-" * len(head)]
    last = None
    for r in rows:
        name = r["family"].capitalize() if r["family"] != last else ""
        last = r["family"]
        lines.append(f"{name:<10}{r['N']:>9}" + "".join(f"{r[f'M{M}']:>12.4g}" for M in Ms)
                     + f"{r['full']:>12.4g}")
    return "\n".join(lines)


def render_accuracy(summary) -> str:
    head = (f"{'Copula':<10}{'N':>9}{'M':>6}{'S':>5}{'bias':>13}{'mse':>13}"
            f"{'rel_l1':>13}{'rel_l2':>13}")
    lines = ["Combined vs full-data estimates", head, "-" * len(head)]
    for fam in _family_order(summary):
        rows = sorted((r for r in summary if r["family"] == fam),
                      key=lambda r: (int(r["N"]), int(r["M"])))
        for i, r in enumerate(rows):
            name = fam.capitalize() if i == 0 else ""
            lines.append(f"{name:<10}{int(r['N']):>9}{int(r['M']):>6}{int(r['S']):>5}"
                         f"{float(r['bias']):>13.3e}{float(r['mse']):>13.3e}"
                         f"{float(r['rel_l1']):>13.3e}{float(r['rel_l2']):>13.3e}")
    return "\n".join(lines)


def cmd_report(args) -> int:
    summaries, timings, problems = _collect(args.results)
    for msg in problems:
        print(f"parcopula: warning[data]: {msg}", file=sys.stderr)
    if not summaries:
        _fail("data", "no results found", EXIT_DATA)

    if timings:
        print(render_timing(timings))
        print()
    print(render_accuracy(summaries))

    out = _out_dir(args.out if args.out else args.results[0])
    if timings:
        Ms, rows = timing_rows(timings)
        cols = ["family", "N"] + [f"M{M}" for M in Ms] + ["full"]
        write_table(out / "report_timing.csv", "report-timing", cols, rows)
    acc_cols = ["family", "N", "M", "S", "bias", "mse", "rel_l1", "rel_l2"]
    acc = sorted(summaries, key=lambda r: (_family_order(summaries).index(r["family"]),
                                           int(r["N"]), int(r["M"])))
    write_table(out / "report_accuracy.csv", "report-accuracy", acc_cols, acc)
    return EXIT_OK


# --------------------------------------------------------------------------
# parser


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"parcopula: error[usage]: {message}", file=sys.stderr)
        sys.exit(EXIT_USAGE)


def _family(text):
    try:
        return CopulaFamily.parse(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"unknown family {text!r}") from None


def _positive(text):
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {value}")
    return value


def _seed(text):
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer seed, got {text!r}") from None
    if not 0 <= value < 2 ** 64:
        raise argparse.ArgumentTypeError("seed must be in [0, 2**64)")
    return value


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="parcopula",
                description="Copula parameter estimation by maximum pseudo-likelihood, "
                            "whole or split into independently fitted blocks.")
    p.add_argument("--version", action="version", version=f"parcopula {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp, family_default=None, family_choices=None):
        sp.add_argument("--family", type=str if family_choices else _family,
                        default=family_default, required=family_default is None,
                        choices=family_choices,
                        help="copula family" + (" (default: all three)" if family_choices else ""))
        sp.add_argument("--min-rows", type=_positive, default=30,
                        help="smallest accepted sample or block size (default 30)")
        sp.add_argument("--out", default=None, help="directory for CSV and manifest output")

    f = sub.add_parser("fit", help="fit one copula to a two-column CSV")
    f.add_argument("input", help="CSV with two numeric columns; header optional")
    common(f)
    f.set_defaults(func=cmd_fit)

    s = sub.add_parser("split-fit", help="fit independent blocks and combine")
    s.add_argument("input", help="CSV with two numeric columns; header optional")
    common(s)
    s.add_argument("--subsets", "-M", type=_positive, required=True, help="number of blocks")
    s.add_argument("--workers", type=_positive, default=None,
                   help="worker processes (default: CPU count)")
    s.add_argument("--scheme", type=Scheme, choices=list(Scheme), default=Scheme.CONTIGUOUS,
                   help="row-to-block assignment (default contiguous)")
    s.set_defaults(func=cmd_split_fit)

    m = sub.add_parser("simulate", help="Monte Carlo comparison of split and full fits")
    common(m, family_default="all", family_choices=["all"] + [c.value for c in CopulaFamily])
    m.add_argument("--theta", type=float, default=None,
                   help="true parameter (default gaussian 0.3, frank 5, gumbel 5)")
    m.add_argument("--rows", type=_positive, nargs="+", default=list(DEFAULT_ROWS),
                   help="sample sizes N (default 50000 100000 200000)")
    m.add_argument("--subsets", type=_positive, nargs="+", default=list(DEFAULT_SUBSETS),
                   help="block counts M (default 10 20 100)")
    m.add_argument("--replicates", type=_positive, default=DEFAULT_REPLICATES,
                   help="replicates S per cell (default 50)")
    m.add_argument("--seed", type=_seed, default=DEFAULT_SEED,
                   help=f"base seed (default {DEFAULT_SEED})")
    m.add_argument("--workers", type=_positive, default=None,
                   help="worker processes for block fits (default: CPU count)")
    m.add_argument("--scheme", type=Scheme, choices=list(Scheme), default=Scheme.CONTIGUOUS)
    m.add_argument("--quad-nodes", type=_positive, default=200,
                   help="Gauss-Legendre nodes per axis for L1/L2 (default 200)")
    m.add_argument("--no-figures", action="store_true", help="skip the SVG figures")
    m.add_argument("--quiet", action="store_true", help="no progress output")
    m.set_defaults(func=cmd_simulate)
    m.set_defaults(out="results")

    r = sub.add_parser("report", help="tabulate one or more simulate output directories")
    r.add_argument("results", nargs="+", help="directories searched for summary.csv")
    r.add_argument("--out", default=None, help="where to write the report CSVs "
                                               "(default: first results directory)")
    r.set_defaults(func=cmd_report)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "family", None) is not None and args.func is not cmd_simulate:
        args.family = CopulaFamily.parse(args.family)
    try:
        return args.func(args)
    except CLIError as exc:
        print(f"parcopula: error[{exc.kind}]: {exc}", file=sys.stderr)
        return exc.code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
