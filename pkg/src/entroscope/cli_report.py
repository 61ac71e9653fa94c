"""Command-line driver and report emission.

Every analysis is drivable end to end from here: manifest (or synthetic
table) in, one Report out, emitted as markdown for humans, delimited text
for spreadsheets, or a versioned structured document for machines.

Payloads follow one convention: a "columns" list naming the fields and a
"rows" list of JSON-native rows, plus kind-specific extras. Full precision
is kept everywhere; display rounding to 3 decimals happens only in the
markdown renderer.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from dataclasses import dataclass, field
from datetime import datetime, timezone

from . import __version__, synth
from .chowliu import validate as validate_subset
from .dependence import matrix as dependence_matrix
from .entropy import EntropyProfile, profile
from .errors import DataError, EntroscopeError, UsageError
from .guesswork import guesswork_table
from .ingest import SampleTable, load_manifest, load_table
from .quantize import _canonical_rule, bin_channel, pmf_of
from .sweep import (
    DEFAULT_GRID,
    run_sweep,
    sensitivity,
    size_means,
    top_k,
)

REPORT_SCHEMA = "entroscope/report/v1"
WORKERS_ENV = "ENTROSCOPE_WORKERS"

KINDS = (
    "single_sensor_table",
    "subset_ranking",
    "validation_table",
    "dependence_matrix",
    "sensitivity_curve",
    "sweep_means_curve",
    "guesswork_table",
)

FORMATS = ("markdown", "structured", "delimited")

# markdown column titles where they differ from the machine field names
_MD_TITLES = {
    "modality": "Modality",
    "size": "#",
    "h0": "H0",
    "h1": "H1",
    "h2": "H2",
    "hmin": "Hmin",
    "gap": "H1-Hmin",
    "channel": "Channel",
    "bins": "Bins",
    "order": "Order",
    "direct": "Direct",
    "chowliu": "Chow-Liu",
    "abs_error": "|Error|",
    "bin_count": "Bins",
    "subsets": "Subsets",
    "expected_guesses": "E[guesses]",
}


@dataclass(frozen=True)
class Report:
    kind: str
    payload: dict
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise DataError(f"unknown report kind {self.kind!r}")
        if "columns" not in self.payload or "rows" not in self.payload:
            raise DataError("report payload needs columns and rows")


def _metadata(dataset: str, binning: str) -> dict:
    return {
        "dataset": dataset,
        "binning": str(binning),
        "timestamp": datetime.now(timezone.utc).isoformat(timespec="seconds"),
        "version": __version__,
    }


def _cell_md(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return str(value)
    if isinstance(value, float):
        return f"{value:.3f}"
    return str(value)


def _cell_csv(value) -> str:
    if value is None:
        return ""
    return str(value)


def _title(column: str) -> str:
    return _MD_TITLES.get(column, column)


def emit(report: Report, format: str = "markdown") -> bytes:
    """Serialize a report; same report and format always gives same bytes."""
    if format not in FORMATS:
        raise DataError(f"unknown emission format {format!r}")
    columns = report.payload["columns"]
    rows = report.payload["rows"]

    if format == "structured":
        doc = {
            "schema": REPORT_SCHEMA,
            "kind": report.kind,
            "metadata": report.metadata,
            "payload": report.payload,
        }
        text = json.dumps(doc, sort_keys=True, indent=2, allow_nan=False)
        return (text + "\n").encode("utf-8")

    if format == "delimited":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow([_cell_csv(v) for v in row])
        return buf.getvalue().encode("utf-8")

    lines = [
        "| " + " | ".join(_title(c) for c in columns) + " |",
        "| " + " | ".join("---" for _ in columns) + " |",
    ]
    for row in rows:
        lines.append("| " + " | ".join(_cell_md(v) for v in row) + " |")
    notes = []
    if report.metadata.get("dataset"):
        notes.append(f"dataset: {report.metadata['dataset']}")
    if report.metadata.get("binning"):
        notes.append(f"bins: {report.metadata['binning']}")
    notes.append(f"entroscope {report.metadata.get('version', __version__)}")
    lines.append("")
    lines.append("*" + ", ".join(notes) + "*")
    return ("\n".join(lines) + "\n").encode("utf-8")


def parse_report(data) -> Report:
    """Rebuild a Report from a structured emission."""
    if isinstance(data, bytes):
        data = data.decode("utf-8")
    try:
        doc = json.loads(data)
    except json.JSONDecodeError as exc:
        raise DataError(f"not a structured report: {exc}") from exc
    if not isinstance(doc, dict) or doc.get("schema") != REPORT_SCHEMA:
        raise DataError("not a structured report: missing schema")
    return Report(doc["kind"], doc["payload"], doc.get("metadata", {}))


def _prof_cells(prof: EntropyProfile) -> list:
    return [float(prof.h0), float(prof.h1), float(prof.h2), float(prof.hmin)]


def _none_if_nan(value: float):
    v = float(value)
    return None if math.isnan(v) else v


# ---------------------------------------------------------------------------
# subcommand pipelines

def _parse_rule(text: str) -> str:
    text = str(text).strip()
    try:
        _canonical_rule(text)
    except DataError as exc:
        raise UsageError(str(exc)) from exc
    return text


def _parse_names(text: str) -> list[str]:
    names = [part.strip() for part in text.split(",") if part.strip()]
    if not names:
        raise UsageError("empty channel list")
    return names


def _parse_floats(text: str) -> list[float]:
    try:
        return [float(part) for part in text.split(",") if part.strip()]
    except ValueError as exc:
        raise UsageError(f"bad numeric list {text!r}") from exc


def _parse_ints(text: str) -> list[int]:
    try:
        return [int(part) for part in text.split(",") if part.strip()]
    except ValueError as exc:
        raise UsageError(f"bad integer list {text!r}") from exc


def _load_input(args) -> SampleTable:
    manifest_path = getattr(args, "manifest", None)
    if manifest_path:
        manifest = load_manifest(manifest_path)
        root = getattr(args, "data_root", None)
        if not root:
            root = os.path.dirname(os.path.abspath(manifest_path))
        return load_table(manifest, root)
    if getattr(args, "synthetic", False):
        return synth.sensor_table(seed=args.seed, rows=args.rows)
    raise UsageError("provide --manifest PATH or --synthetic")


def _channel_table(table: SampleTable, rule: str) -> Report:
    rows = []
    for name in table.channels:
        try:
            ch = bin_channel(table.column(name), rule, name=name)
        except EntroscopeError as exc:
            print(f"warning: {name}: {exc}", file=sys.stderr)
            rows.append([name, None, None, None, None, None])
            continue
        prof = profile(pmf_of(ch.codes))
        rows.append([name, int(ch.spec.bin_count), *_prof_cells(prof)])
    payload = {
        "columns": ["channel", "bins", "h0", "h1", "h2", "hmin"],
        "rows": rows,
    }
    return Report("single_sensor_table", payload, _metadata(table.source, rule))


def _cmd_single(args) -> Report:
    return _channel_table(_load_input(args), args.bins)


def _cmd_synth_check(args) -> Report:
    table = synth.sensor_table(seed=args.seed, rows=args.rows)
    return _channel_table(table, args.bins)


def _sweep_results(args, table: SampleTable):
    errors: list = []
    results = run_sweep(
        table,
        args.bins,
        min_size=args.min_size,
        max_size=args.max_size,
        workers=args.workers,
        errors=errors,
    )
    for subset, message in errors:
        print(f"warning: {'+'.join(subset)}: {message}", file=sys.stderr)
    return results, errors


def _ranking_payload(results, errors) -> dict:
    rows = [
        ["+".join(r.subset), r.size, *_prof_cells(r.profile), float(r.gap)]
        for r in results
    ]
    payload = {
        "columns": ["modality", "size", "h0", "h1", "h2", "hmin", "gap"],
        "rows": rows,
    }
    if errors:
        payload["errors"] = [
            {"subset": "+".join(subset), "error": message}
            for subset, message in errors
        ]
    return payload


def _cmd_sweep(args) -> Report:
    table = _load_input(args)
    results, errors = _sweep_results(args, table)
    return Report(
        "subset_ranking", _ranking_payload(results, errors),
        _metadata(table.source, args.bins),
    )


def _cmd_topk(args) -> Report:
    table = _load_input(args)
    results, errors = _sweep_results(args, table)
    ranked = top_k(results, args.k)
    return Report(
        "subset_ranking", _ranking_payload(ranked, errors),
        _metadata(table.source, args.bins),
    )


def _cmd_means(args) -> Report:
    table = _load_input(args)
    results, _ = _sweep_results(args, table)
    rows = [
        [size, count, *_prof_cells(prof)]
        for size, count, prof in size_means(results)
    ]
    payload = {
        "columns": ["size", "subsets", "h0", "h1", "h2", "hmin"],
        "rows": rows,
        "statistic": "mean over all subsets of each size",
    }
    return Report("sweep_means_curve", payload, _metadata(table.source, args.bins))


def _cmd_validate(args) -> Report:
    table = _load_input(args)
    names = _parse_names(args.subset)
    chans = [
        bin_channel(table.column(name), args.bins, name=name, max_bins=2048)
        for name in names
    ]
    rep = validate_subset(chans)
    orders = ("H0", "H1", "H2", "Hmin")
    direct = _prof_cells(rep.direct)
    tree = _prof_cells(rep.chowliu)
    rows = [
        [order, d, c, abs(d - c)]
        for order, d, c in zip(orders, direct, tree)
    ]
    payload = {
        "columns": ["order", "direct", "chowliu", "abs_error"],
        "rows": rows,
        "subset": "+".join(rep.subset),
        "n": int(rep.n),
        "mae": float(rep.mae),
        "rel_error_pct": _none_if_nan(rep.rel_error_pct),
    }
    return Report("validation_table", payload, _metadata(table.source, args.bins))


def _cmd_matrix(args) -> Report:
    table = _load_input(args)
    binned = []
    if args.kind != "pearson":
        for name in table.channels:
            try:
                binned.append(
                    bin_channel(table.column(name), args.bins, name=name,
                                max_bins=2048)
                )
            except EntroscopeError as exc:
                print(f"warning: {name}: {exc}", file=sys.stderr)
    dm = dependence_matrix(table, binned, args.kind)
    rows = [
        [name, *(_none_if_nan(v) for v in dm.values[i])]
        for i, name in enumerate(dm.channels)
    ]
    payload = {
        "columns": ["channel", *dm.channels],
        "rows": rows,
        "kind": dm.kind,
        "missing": [
            {"a": a, "b": b, "reason": reason} for a, b, reason in dm.missing
        ],
    }
    return Report("dependence_matrix", payload, _metadata(table.source, args.bins))


def _cmd_sensitivity(args) -> Report:
    table = _load_input(args)
    names = _parse_names(args.subset)
    grid = _parse_ints(args.grid) if args.grid else DEFAULT_GRID
    curve = sensitivity(table, names, grid)
    rows = [
        [int(count), *_prof_cells(prof)] for count, prof in curve.points
    ]
    payload = {
        "columns": ["bin_count", "h0", "h1", "h2", "hmin"],
        "rows": rows,
        "subset": "+".join(curve.subset),
        "fd_marker": float(curve.markers[0]),
        "scott_marker": float(curve.markers[1]),
    }
    return Report("sensitivity_curve", payload, _metadata(table.source, "fixed_count grid"))


def _cmd_guesswork(args) -> Report:
    if args.from_report:
        with open(args.from_report, "rb") as fh:
            source = parse_report(fh.read())
        if source.kind != "subset_ranking":
            raise DataError(
                f"--from-report needs a subset_ranking report, got {source.kind}"
            )
        idx = source.payload["columns"].index("hmin")
        hmins = [float(row[idx]) for row in source.payload["rows"]]
        dataset = source.metadata.get("dataset", args.from_report)
    elif args.hmin:
        hmins = _parse_floats(args.hmin)
        dataset = "manual"
    else:
        raise UsageError("provide --hmin values or --from-report PATH")
    rates = _parse_floats(args.rates)
    gt = guesswork_table(hmins, rates)
    rate_cols = [f"q{r:g}" for r in gt.rates]
    rows = [
        [float(h), gt.expected[i], *gt.times[i]]
        for i, h in enumerate(gt.hmins)
    ]
    payload = {
        "columns": ["hmin", "expected_guesses", *rate_cols],
        "rows": rows,
        "rates_per_second": [float(r) for r in gt.rates],
    }
    report = Report("guesswork_table", payload, _metadata(dataset, "n/a"))
    return report


_COMMANDS = {
    "single": _cmd_single,
    "sweep": _cmd_sweep,
    "topk": _cmd_topk,
    "validate": _cmd_validate,
    "matrix": _cmd_matrix,
    "sensitivity": _cmd_sensitivity,
    "means": _cmd_means,
    "guesswork": _cmd_guesswork,
    "synth-check": _cmd_synth_check,
}


# ---------------------------------------------------------------------------
# argument plumbing

class _Parser(argparse.ArgumentParser):
    """argparse that raises instead of exiting, so run() owns exit codes."""

    def error(self, message):
        raise UsageError(message)


def _default_workers() -> int:
    raw = os.environ.get(WORKERS_ENV, "").strip()
    if not raw:
        return 1
    try:
        value = int(raw)
    except ValueError:
        return 1
    return max(1, value)


def build_parser() -> _Parser:
    parser = _Parser(prog="entroscope", description=__doc__.splitlines()[0])

    out = _Parser(add_help=False)
    out.add_argument("--format", choices=FORMATS, default="markdown",
                     help="emission format (default markdown)")
    out.add_argument("--out", metavar="PATH",
                     help="write the report here instead of stdout")

    data = _Parser(add_help=False)
    data.add_argument("--manifest", metavar="PATH",
                      help="dataset manifest file")
    data.add_argument("--data-root", metavar="DIR",
                      help="base directory for manifest paths "
                           "(default: manifest directory)")
    data.add_argument("--synthetic", action="store_true",
                      help="use the built-in synthetic sensor table")
    data.add_argument("--seed", type=int, default=7,
                      help="seed for synthetic data (default 7)")
    data.add_argument("--rows", type=int, default=100_000,
                      help="rows of synthetic data (default 100000)")
    data.add_argument("--bins", type=_parse_rule, default="fd",
                      help="binning rule: fd, scott, or a fixed count")

    sweepish = _Parser(add_help=False)
    sweepish.add_argument("--min-size", type=int, default=2)
    sweepish.add_argument("--max-size", type=int, default=None)
    sweepish.add_argument("--workers", type=int, default=_default_workers(),
                          help=f"parallel workers (default ${WORKERS_ENV} or 1)")

    sub = parser.add_subparsers(dest="command", metavar="COMMAND")

    sub.add_parser("single", parents=[data, out],
                   help="per-channel entropy profile table")
    sub.add_parser("sweep", parents=[data, sweepish, out],
                   help="joint profiles for every channel subset")
    p = sub.add_parser("topk", parents=[data, sweepish, out],
                       help="best subsets by min-entropy")
    p.add_argument("--k", type=int, default=10)
    p = sub.add_parser("validate", parents=[data, out],
                       help="direct vs tree profile on one 2-3 channel subset")
    p.add_argument("--subset", required=True, metavar="A,B[,C]")
    p = sub.add_parser("matrix", parents=[data, out],
                       help="pairwise dependence matrix")
    p.add_argument("--kind", choices=("pearson", "mi"), default="mi")
    p = sub.add_parser("sensitivity", parents=[data, out],
                       help="joint profile vs bin count for one subset")
    p.add_argument("--subset", required=True, metavar="A,B,...")
    p.add_argument("--grid", metavar="N1,N2,...",
                   help="bin counts to test (default 5..2048 geometric)")
    sub.add_parser("means", parents=[data, sweepish, out],
                   help="mean joint profile per subset size")
    p = sub.add_parser("guesswork", parents=[out],
                       help="attacker cost table from min-entropy values")
    p.add_argument("--hmin", metavar="H1,H2,...",
                   help="min-entropy values in bits")
    p.add_argument("--rates", default="1,10,1e3,1e6", metavar="R1,R2,...",
                   help="guess rates per second (default 1,10,1e3,1e6)")
    p.add_argument("--from-report", metavar="PATH",
                   help="take hmin values from a structured subset_ranking report")
    sub.add_parser("synth-check", parents=[data, out],
                   help="profile the built-in synthetic table")
    return parser


def run(argv) -> int:
    """Execute one CLI invocation; returns the process exit code."""
    parser = build_parser()
    try:
        args = parser.parse_args(list(argv))
        if not getattr(args, "command", None):
            raise UsageError("a subcommand is required")
        report = _COMMANDS[args.command](args)
        data = emit(report, args.format)
        if args.out:
            with open(args.out, "wb") as fh:
                fh.write(data)
        else:
            sys.stdout.write(data.decode("utf-8"))
        return 0
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        parser.print_usage(sys.stderr)
        return 1
    except EntroscopeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except SystemExit as exc:  # argparse --help
        code = exc.code
        return int(code) if isinstance(code, int) else 0
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()
