"""Command-line front end.

Subcommands::

    fxcov test X.csv Y.csv          # H0: C_XY = C0 with F_T / F_T,p
    fxcov changepoint X.csv Y.csv   # CUSUM tests Z_T / Z_T,p, writes the chart data
    fxcov cidr PRICES.csv           # cumulative intraday returns
    fxcov simulate ...              # size tables and power curves

Input CSVs hold one curve per row (rows = days, columns = grid points).
Exit codes: 0 ok, 2 parse error, 3 conformability, 4 degenerate spectrum,
5 bad flags, 1 anything else.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
import tempfile
from datetime import datetime, timezone

import numpy as np

from fxcov import __version__
from fxcov.dgp import KINDS, run_power_curve, run_size_study
from fxcov.errors import ConformabilityError, DegenerateError, FxcovError, ParseError
from fxcov.fdata import BivariateSeries, FunctionalSeries, Grid, Surface, apply_lag, cidr_transform
from fxcov.pipeline import LEVELS, Settings, run_tests

EXIT_OK = 0
EXIT_PARSE = 2
EXIT_CONFORM = 3
EXIT_DEGENERATE = 4
EXIT_FLAGS = 5

STAT_CHOICES = {
    "test": {"norm": ("F",), "proj": ("Fp",), "both": ("F", "Fp")},
    "changepoint": {"norm": ("Z",), "proj": ("Zp",), "both": ("Z", "Zp")},
}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_FLAGS, f"{self.prog}: error: {message}\n")


# ---------------------------------------------------------------------------
# file io


def read_matrix(path: str, row_labels: bool = False, header: bool = False):
    """Parse a numeric CSV into ``(labels, values)``.

    ``labels`` is ``None`` unless ``row_labels`` is set, in which case the
    first column is kept verbatim.  Diagnostics use 1-based line and column
    numbers as they appear in the file.
    """
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            rows = list(csv.reader(fh))
    except OSError as exc:
        raise ParseError(f"{path}: cannot read ({exc.strerror})") from exc
    except UnicodeDecodeError as exc:
        raise ParseError(f"{path}: not valid UTF-8") from exc

    first = 2 if header else 1
    rows = rows[1:] if header else rows
    labels = [] if row_labels else None
    data = []
    width = None
    for offset, row in enumerate(rows):
        line = first + offset
        if not row or all(not c.strip() for c in row):
            continue
        cells = row[1:] if row_labels else row
        if row_labels:
            labels.append(row[0].strip())
        if width is None:
            width = len(cells)
        elif len(cells) != width:
            raise ParseError(
                f"{path}: line {line} has {len(cells)} values, expected {width} (ragged rows)"
            )
        vals = []
        for j, cell in enumerate(cells):
            try:
                v = float(cell)
            except ValueError:
                col = j + 1 + (1 if row_labels else 0)
                raise ParseError(
                    f"{path}: line {line}, column {col}: non-numeric value {cell.strip()!r}"
                ) from None
            if not np.isfinite(v):
                col = j + 1 + (1 if row_labels else 0)
                raise ParseError(f"{path}: line {line}, column {col}: missing or non-finite value")
            vals.append(v)
        data.append(vals)
    if not data or not width:
        raise ParseError(f"{path}: no data rows")
    return labels, np.array(data)


def _fmt(v: float) -> str:
    return f"{v:.12g}"


def _atomic_write(path: str, text: str) -> None:
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_csv(path: str, header: list[str] | None, rows) -> None:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    if header:
        w.writerow(header)
    for row in rows:
        w.writerow([_fmt(c) if isinstance(c, (float, np.floating)) else c for c in row])
    _atomic_write(path, buf.getvalue())


def write_json(path: str | None, obj) -> None:
    text = json.dumps(obj, indent=2, sort_keys=True) + "\n"
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        _atomic_write(path, text)


# ---------------------------------------------------------------------------
# manifest


def _manifest(args: argparse.Namespace, parser: argparse.ArgumentParser, inputs: list[str]) -> dict:
    params = {}
    for action in parser._actions:
        if action.dest in ("help", "command", "func") or action.dest not in vars(args):
            continue
        if action.option_strings == []:
            continue
        value = getattr(args, action.dest)
        params[action.dest] = {
            "value": value,
            "default": action.default,
            "overridden": value != action.default,
        }
    return {
        "subcommand": args.command,
        "inputs": inputs,
        "parameters": params,
        "version": __version__,
        "started": getattr(args, "_started", None),
        "finished": datetime.now(timezone.utc).isoformat(timespec="seconds"),
    }


def _parse_auto_int(text: str):
    if text == "auto":
        return None
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a positive integer or 'auto', got {text!r}")
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {v}")
    return v


def _parse_levels(text: str) -> tuple[float, ...]:
    try:
        levels = tuple(float(x) for x in text.split(",") if x.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad level list {text!r}")
    if not levels or any(not 0 < a < 1 for a in levels):
        raise argparse.ArgumentTypeError("levels must lie in (0, 1)")
    return levels


def _settings(args) -> Settings:
    return Settings(
        q=args.q,
        v=args.v,
        q_max=args.q_max,
        p=args.p,
        h=args.h,
        n_reps=args.reps,
        bridge_grid=args.grid,
    )


# ---------------------------------------------------------------------------
# subcommands


def _load_pair(args) -> tuple[BivariateSeries, list[str] | None]:
    lx, x = read_matrix(args.x, args.row_labels, args.header)
    ly, y = read_matrix(args.y, args.row_labels, args.header)
    if x.shape[1] != y.shape[1]:
        raise ConformabilityError(
            f"grid sizes differ: {args.x} has {x.shape[1]} columns, {args.y} has {y.shape[1]}"
        )
    if x.shape[0] != y.shape[0]:
        raise ConformabilityError(
            f"sample lengths differ: {args.x} has {x.shape[0]} rows, {args.y} has {y.shape[0]}"
        )
    grid = Grid(x.shape[1])
    fx, fy = FunctionalSeries(grid, x), FunctionalSeries(grid, y)
    if args.cidr:
        fx, fy = cidr_transform(fx), cidr_transform(fy)
    return apply_lag(fx, fy, args.lag), lx


def _report_dict(report, levels) -> dict:
    d = report.to_dict()
    for r in d["results"]:
        r["reject"] = {f"{a:.2f}": r["p_value"] <= a for a in levels}
    return d


def cmd_test(args, parser) -> int:
    b, _ = _load_pair(args)
    C0 = None
    if args.c0:
        _, c0 = read_matrix(args.c0)
        if c0.shape != (b.grid.R, b.grid.R):
            raise ConformabilityError(
                f"C0 must be {b.grid.R} x {b.grid.R}, {args.c0} is {c0.shape[0]} x {c0.shape[1]}"
            )
        C0 = Surface(b.grid, c0)
    report = run_tests(b, STAT_CHOICES["test"][args.stat], _settings(args), args.seed, C0)
    out = _report_dict(report, args.level)
    out["manifest"] = _manifest(args, parser, [args.x, args.y] + ([args.c0] if args.c0 else []))
    write_json(args.out, out)
    return EXIT_OK


MIN_SEGMENT = 10


def _changepoint_node(b: BivariateSeries, labels, offset: int, depth: int, args) -> tuple[dict, list]:
    stats = STAT_CHOICES["changepoint"][args.stat]
    report = run_tests(b, stats, _settings(args), args.seed)
    node = _report_dict(report, args.level)
    node["start"] = offset
    node["stop"] = offset + b.T
    main = report.results[0]
    k = main.argmax
    node["khat"] = offset + k
    if labels is not None:
        node["khat_label"] = labels[b.lag + offset + k - 1] if k > 0 else None
    chart = [(offset, report)]
    node["segments"] = []
    if depth > 0:
        for lo, hi in ((0, k), (k, b.T)):
            if hi - lo < MIN_SEGMENT:
                node["segments"].append({"start": offset + lo, "stop": offset + hi, "skipped": "too short"})
                continue
            sub = BivariateSeries(
                FunctionalSeries(b.grid, b.x.values[lo:hi]),
                FunctionalSeries(b.grid, b.y.values[lo:hi]),
                b.lag,
            )
            child, child_chart = _changepoint_node(sub, labels, offset + lo, depth - 1, args)
            node["segments"].append(child)
            chart.extend(child_chart)
    return node, chart


def _cusum_rows(chart, labels, lag):
    header = ["segment_start", "k", "fraction", "label"]
    names = None
    rows = []
    for offset, report in chart:
        if names is None:
            names = list(report.trajectories)
            for n in names:
                r = report.result(n)
                header += [n] + [f"{n}_q{q}" for q in r.quantiles]
        cols = [report.trajectories[n] for n in names]
        T = report.T
        for k in range(T + 1):
            label = labels[lag + offset + k - 1] if labels is not None and k > 0 else ""
            row = [offset, offset + k, k / T, label]
            for n, c in zip(names, cols):
                row += [c[k]] + list(report.result(n).quantiles.values())
            rows.append(row)
    return header, rows


def cmd_changepoint(args, parser) -> int:
    b, labels = _load_pair(args)
    node, chart = _changepoint_node(b, labels, 0, args.segment, args)
    node["manifest"] = _manifest(args, parser, [args.x, args.y])
    if args.cusum:
        header, rows = _cusum_rows(chart, labels, b.lag)
        write_csv(args.cusum, header, rows)
    write_json(args.out, node)
    return EXIT_OK


def cmd_cidr(args, parser) -> int:
    labels, P = read_matrix(args.prices, args.row_labels, args.header)
    r = cidr_transform(FunctionalSeries(Grid(P.shape[1]), P)).values
    rows = [([labels[i]] if labels is not None else []) + list(r[i]) for i in range(len(r))]
    write_csv(args.out, None, rows)
    return EXIT_OK


def cmd_simulate(args, parser) -> int:
    if args.seed is None:
        raise UsageError("simulate requires --seed")
    settings = Settings.simulation(
        n_reps=args.reps, bridge_grid=args.grid, R=args.R, burn_in=args.burn_in, q=args.q or 3, p=args.p
    )
    kinds = KINDS if args.kind == "both" else (args.kind,)
    if args.power:
        rows = []
        for kind in kinds:
            rows += run_power_curve(
                kind,
                args.T[0],
                alphas=tuple(np.round(np.arange(0.0, args.alpha_max + 1e-9, args.alpha_step), 10)),
                level=args.power_level,
                n_sims=args.sims,
                seed=args.seed,
                settings=settings,
            )
        write_csv(
            args.out,
            ["statistic", "kind", "T", "alpha", "level", "rate", "n_sims"],
            [[r.statistic, r.kind, r.T, r.alpha, r.level, r.rate, r.n_sims] for r in rows],
        )
    else:
        if args.table == 1:
            stats, alphas = ("F", "Fp"), (0.0,)
        else:
            stats, alphas = ("Z", "Zp"), (0.0, 0.5)
        rows = run_size_study(
            Ts=args.T,
            kinds=kinds,
            alphas=alphas,
            levels=args.level,
            statistics=stats,
            n_sims=args.sims,
            seed=args.seed,
            settings=settings,
        )
        table = {}
        for r in rows:
            table.setdefault((r.statistic, r.kind, r.T, r.alpha), {})[r.level] = r.rate
        header = ["statistic", "kind", "T", "alpha"] + [f"{100 * a:g}%" for a in args.level]
        out_rows = [
            [stat, kind, T, alpha] + [rates[a] for a in args.level]
            for (stat, kind, T, alpha), rates in table.items()
        ]
        write_csv(args.out, header, out_rows)
    manifest = _manifest(args, parser, [])
    manifest["design"] = {"q": settings.q, "p": settings.p, "R": settings.R, "burn_in": settings.burn_in}
    write_json(args.manifest or os.path.splitext(args.out)[0] + ".manifest.json", manifest)
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser


def _add_inference_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--lag", type=int, default=0, help="lag l >= 0 (pairs X_{l+i} with Y_i)")
    p.add_argument("--q", type=_parse_auto_int, default=None, help="fPC cutoff per series, or 'auto'")
    p.add_argument("--v", type=float, default=0.90, help="variance threshold for --q auto")
    p.add_argument("--q-max", type=int, default=10, help="cap on the automatic q")
    p.add_argument("--p", type=int, default=3, help="projection dimension")
    p.add_argument("--h", type=_parse_auto_int, default=None, help="bandwidth, or 'auto' = ceil(T^(1/5))")
    p.add_argument("--reps", type=int, default=10_000, help="Monte Carlo replications")
    p.add_argument("--grid", type=int, default=1_000, help="Brownian bridge grid size")
    p.add_argument("--seed", type=int, default=0, help="Monte Carlo seed")
    p.add_argument("--level", type=_parse_levels, default=LEVELS, help="comma-separated levels")
    p.add_argument("--stat", choices=("norm", "proj", "both"), default="both")
    p.add_argument("--cidr", action="store_true", help="inputs are prices; convert to CIDR curves")
    p.add_argument("--row-labels", action="store_true", help="first column holds row labels/dates")
    p.add_argument("--header", action="store_true", help="first line is a header")
    p.add_argument("--out", default=None, help="JSON report path (default: stdout)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="fxcov", description=__doc__.split("\n\n")[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("test", help="test C_XY = C0 with F_T and/or F_T,p")
    p.add_argument("x")
    p.add_argument("y")
    p.add_argument("--c0", default=None, help="CSV with the R x R null surface (default zero)")
    _add_inference_flags(p)
    p.set_defaults(func=cmd_test)

    p = sub.add_parser("changepoint", help="CUSUM test for a change in the cross-covariance")
    p.add_argument("x")
    p.add_argument("y")
    p.add_argument("--cusum", default=None, help="write the CUSUM chart data to this CSV")
    p.add_argument(
        "--segment", type=int, nargs="?", const=1, default=0,
        help="split at the estimated change and retest each part (depth, default 1)",
    )
    _add_inference_flags(p)
    p.set_defaults(func=cmd_changepoint)

    p = sub.add_parser("cidr", help="convert intraday price curves to cumulative intraday returns")
    p.add_argument("prices")
    p.add_argument("--out", required=True)
    p.add_argument("--row-labels", action="store_true")
    p.add_argument("--header", action="store_true")
    p.set_defaults(func=cmd_cidr)

    p = sub.add_parser("simulate", help="reproduce the size tables or power curves")
    p.add_argument("--table", type=int, choices=(1, 2), default=1)
    p.add_argument("--power", action="store_true", help="power curve over alpha instead of a size table")
    p.add_argument("--kind", choices=KINDS + ("both",), default="both")
    p.add_argument("--T", type=int, nargs="+", default=[300])
    p.add_argument("--R", type=int, default=100)
    p.add_argument("--burn-in", type=int, default=100)
    p.add_argument("--sims", type=int, default=1000)
    p.add_argument("--reps", type=int, default=10_000)
    p.add_argument("--grid", type=int, default=1_000)
    p.add_argument("--q", type=int, default=3)
    p.add_argument("--p", type=int, default=3)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--level", type=_parse_levels, default=LEVELS)
    p.add_argument("--power-level", type=float, default=0.05)
    p.add_argument("--alpha-max", type=float, default=0.8)
    p.add_argument("--alpha-step", type=float, default=0.1)
    p.add_argument("--out", required=True)
    p.add_argument("--manifest", default=None)
    p.set_defaults(func=cmd_simulate)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    args._started = datetime.now(timezone.utc).isoformat(timespec="seconds")
    sub = parser._subparsers._group_actions[0].choices[args.command]
    try:
        return args.func(args, sub)
    except ParseError as exc:
        print(f"fxcov: parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except ConformabilityError as exc:
        print(f"fxcov: conformability error: {exc}", file=sys.stderr)
        return EXIT_CONFORM
    except DegenerateError as exc:
        print(f"fxcov: degenerate spectrum: {exc}", file=sys.stderr)
        return EXIT_DEGENERATE
    except UsageError as exc:
        print(f"fxcov: {exc}", file=sys.stderr)
        return EXIT_FLAGS
    except FxcovError as exc:
        print(f"fxcov: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
