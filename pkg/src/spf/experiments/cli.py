"""Command line entry point: ``spf run | plot | theory``.

Exit codes: 0 on success, 1 for an invalid config or arguments, 2 for a
runtime failure.
"""
import argparse
import json
import logging
import math
import sys
from pathlib import Path

from ..theory import theory_report
from .config import ConfigError, load_config
from .harness import GridRunError, run_grid
from .report import read_csv, render_heatmap, write_csv

EXIT_OK, EXIT_CONFIG, EXIT_RUNTIME = 0, 1, 2

log = logging.getLogger("spf")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def _build_parser():
    parser = _Parser(prog="spf", description="Sparse power factorization experiments.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    run = sub.add_parser("run", help="run a Monte Carlo grid from a config file")
    run.add_argument("config")
    run.add_argument("--out", help="output directory (overrides output_dir)")
    run.add_argument("--workers", type=int, default=1)
    run.add_argument("--measure-rip", action="store_true",
                     help="record a Monte Carlo RIP estimate per trial")

    plot = sub.add_parser("plot", help="render a success-rate heatmap from a results CSV")
    plot.add_argument("csv")
    plot.add_argument("--x", required=True)
    plot.add_argument("--y", required=True)
    plot.add_argument("--out", help="SVG path (default: next to the CSV)")

    theory = sub.add_parser("theory", help="print the closed-form convergence quantities")
    theory.add_argument("--delta", type=float, required=True)
    theory.add_argument("--nu", type=float, required=True)
    theory.add_argument("--pu", type=float, default=1.0, help="captured mass ||P_J1 u||")
    theory.add_argument("--pv", type=float, default=1.0, help="captured mass ||P_J2 v||")
    return parser


def _cmd_run(args):
    try:
        config = load_config(args.config)
    except ConfigError as exc:
        print(f"invalid config: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if args.workers < 1:
        print("--workers must be at least 1", file=sys.stderr)
        return EXIT_CONFIG
    if args.measure_rip:
        config.measure_rip = True
    out_dir = Path(args.out or config.output_dir)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        print(f"cannot create output directory {out_dir}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    csv_path = out_dir / config.csv_name
    timing_path = csv_path.with_name(csv_path.stem + ".timing.csv")
    try:
        records = run_grid(config, workers=args.workers)
    except GridRunError as exc:
        print(str(exc), file=sys.stderr)
        if exc.records:
            partial = csv_path.with_name(csv_path.stem + ".partial.csv")
            try:
                write_csv(exc.records, partial)
                print(f"partial results written to {partial}", file=sys.stderr)
            except OSError as io_exc:
                print(str(io_exc), file=sys.stderr)
        return EXIT_RUNTIME
    try:
        write_csv(records, csv_path, include_timing=False)
        write_csv(records, timing_path, include_timing=True)
    except OSError as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_RUNTIME
    n_ok = sum(r.success for r in records)
    print(f"{len(records)} trials, {n_ok} successes -> {csv_path}")
    return EXIT_OK


def _cmd_plot(args):
    try:
        records = read_csv(args.csv)
    except (OSError, ValueError, TypeError) as exc:
        print(f"cannot read {args.csv}: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if not records:
        print(f"{args.csv} holds no records", file=sys.stderr)
        return EXIT_CONFIG
    out = args.out or str(Path(args.csv).with_suffix(".svg"))
    try:
        render_heatmap(records, args.x, args.y, out)
    except ValueError as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_RUNTIME
    print(out)
    return EXIT_OK


def _json_safe(value):
    if isinstance(value, float) and math.isinf(value):
        return "inf"
    return value


def _cmd_theory(args):
    try:
        report = theory_report(args.delta, args.nu, pu=args.pu, pv=args.pv)
    except ValueError as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_CONFIG
    print(report.format())
    print(json.dumps({k: _json_safe(v) for k, v in report.as_dict().items()}))
    return EXIT_OK


def main(argv=None):
    args = _build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    handler = {"run": _cmd_run, "plot": _cmd_plot, "theory": _cmd_theory}[args.command]
    try:
        return handler(args)
    except Exception:  # noqa: BLE001 - last-resort mapping to the runtime exit code
        log.exception("unexpected failure")
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
