"""Command-line front end: run suites, export DOT, annotate, re-report."""

from __future__ import annotations

import argparse
import sys

from . import io
from .experiments import classify_and_aggregate


def _cmd_run(args) -> int:
    suite = io.parse_suite(args.suite)
    return io.run_suite(suite, workers=args.workers)


def _cmd_export_dot(args) -> int:
    network = io.load_network(args.network)
    io.export_dot(network, args.out)
    return 0


def _cmd_annotate_export(args) -> int:
    network = io.load_network(args.network)
    document = io.export_annotations(network, reference=str(args.network))
    io.save_annotations(document, args.out)
    return 0


def _cmd_annotate_apply(args) -> int:
    network = io.load_network(args.network)
    document = io.load_annotations(args.annotations)
    io.save_network(io.import_annotations(network, document), args.out)
    return 0


def _cmd_report(args) -> int:
    records = io.load_records(args.records)
    stats = classify_and_aggregate(records, args.threshold)
    print(io.format_summary_table([io.stats_row(args.records, stats)]), end="")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rulefact",
        description="Rule-fact network training, pruning, and experiment suites",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run every condition in a suite file")
    run.add_argument("suite", help="suite JSON file")
    run.add_argument("--workers", type=int, default=1, help="parallel workers (results identical)")
    run.set_defaults(func=_cmd_run)

    dot = sub.add_parser("export-dot", help="render a network file as a DOT digraph")
    dot.add_argument("network", help="network JSON file")
    dot.add_argument("out", help="output .dot path")
    dot.set_defaults(func=_cmd_export_dot)

    annotate = sub.add_parser("annotate", help="review-and-label round trip")
    annotate_sub = annotate.add_subparsers(dest="annotate_command", required=True)
    exp = annotate_sub.add_parser("export", help="write an annotation sheet for a network")
    exp.add_argument("network")
    exp.add_argument("out")
    exp.set_defaults(func=_cmd_annotate_export)
    app = annotate_sub.add_parser("apply", help="apply an edited annotation sheet")
    app.add_argument("network")
    app.add_argument("annotations")
    app.add_argument("out")
    app.set_defaults(func=_cmd_annotate_apply)

    report = sub.add_parser("report", help="re-aggregate a records CSV")
    report.add_argument("records", help="per-run records CSV")
    report.add_argument("--threshold", type=float, default=0.10, help="high/low error cutoff")
    report.set_defaults(func=_cmd_report)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (FileNotFoundError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
