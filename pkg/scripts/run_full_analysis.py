#!/usr/bin/env python3
"""Run the whole pipeline end to end and leave a directory of reports.

Single-channel profiles, the exhaustive subset sweep, the top-10 ranking,
per-size means, a bin-sensitivity curve for the strongest subset, a
dependence matrix, and the attacker-cost table derived from the ranking —
the same artifacts the CLI produces one at a time, chained.

By default it runs on the built-in synthetic table so it works out of the
box; point --manifest/--data-root at a prepared dataset for the real thing.

Usage:
    python3 scripts/run_full_analysis.py --outdir reports/
    python3 scripts/run_full_analysis.py --manifest manifests/uci-har.yaml \
        --data-root /data/uci-har --outdir reports/uci-har --workers 8
"""

import argparse
import os
import sys
import time

from entroscope.cli_report import run


def step(argv: list[str]) -> None:
    print(f"$ entroscope {' '.join(argv)}", file=sys.stderr)
    t0 = time.perf_counter()
    code = run(argv)
    if code != 0:
        raise SystemExit(f"step failed with exit code {code}")
    print(f"  ... {time.perf_counter() - t0:.1f}s", file=sys.stderr)


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--outdir", default="reports",
                        help="directory for the emitted reports")
    parser.add_argument("--manifest", help="dataset manifest (default: synthetic)")
    parser.add_argument("--data-root", help="base directory for manifest paths")
    parser.add_argument("--rows", type=int, default=100_000,
                        help="synthetic rows when no manifest is given")
    parser.add_argument("--seed", type=int, default=7)
    parser.add_argument("--bins", default="fd", help="binning rule (default fd)")
    parser.add_argument("--workers", type=int, default=1)
    args = parser.parse_args()

    os.makedirs(args.outdir, exist_ok=True)
    if args.manifest:
        data = ["--manifest", args.manifest]
        if args.data_root:
            data += ["--data-root", args.data_root]
    else:
        data = ["--synthetic", "--seed", str(args.seed), "--rows", str(args.rows)]
    data += ["--bins", args.bins]
    sweepish = ["--workers", str(args.workers)]

    def out(name: str, format: str = "markdown") -> list[str]:
        ext = {"markdown": "md", "structured": "json", "delimited": "csv"}[format]
        return ["--format", format, "--out",
                os.path.join(args.outdir, f"{name}.{ext}")]

    step(["single", *data, *out("single_channel")])
    step(["matrix", *data, "--kind", "mi", *out("mi_matrix")])
    # the ranking doubles as input for the guesswork step, so emit it
    # structured as well as human-readable
    step(["sweep", *data, *sweepish, *out("sweep_ranking")])
    step(["topk", *data, *sweepish, "--k", "10",
          *out("top10_ranking", "structured")])
    step(["topk", *data, *sweepish, "--k", "10", *out("top10_ranking")])
    step(["means", *data, *sweepish, *out("size_means")])

    # read the winner back out of the top-10 report for the sensitivity curve
    from entroscope.cli_report import parse_report

    with open(os.path.join(args.outdir, "top10_ranking.json"), "rb") as fh:
        ranking = parse_report(fh.read())
    best = ranking.payload["rows"][0][0]
    step(["sensitivity", *data, "--subset", best.replace("+", ","),
          *out("sensitivity_best")])

    step(["guesswork", "--from-report",
          os.path.join(args.outdir, "top10_ranking.json"),
          *out("guesswork_top10")])

    print(f"reports written under {args.outdir}/", file=sys.stderr)


if __name__ == "__main__":
    main()
