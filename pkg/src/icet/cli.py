"""Command-line entry point: ``icet run``, ``icet summarize``, ``icet plot``."""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from . import experiments as ex

log = logging.getLogger("icet")


def _csv(kind):
    def parse(text):
        try:
            return tuple(kind(t) for t in text.split(",") if t.strip())
        except ValueError as e:
            raise argparse.ArgumentTypeError(str(e)) from None

    return parse


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="icet", description="Cost-sensitive decision tree benchmarks.")
    sub = p.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run an experiment and write rows, summary and plots")
    run.add_argument("--datasets", type=_csv(str), default=ex.DATASETS, help="comma-separated, default all five")
    run.add_argument("--algorithms", type=_csv(str), default=ex.ALGORITHMS, help="subset of ICET,EG2,CSID3,IDX,C45")
    run.add_argument("--error-costs", type=_csv(float), default=ex.ERROR_COSTS, help="comma-separated dollar amounts")
    run.add_argument("--splits", type=int, default=None, help="train/test pairs per dataset (default from --scale)")
    run.add_argument("--seed", type=int, default=123456789)
    run.add_argument("--variant", choices=ex.VARIANTS, default="baseline")
    run.add_argument("--scale", choices=sorted(ex.SCALES), default="full")
    run.add_argument("--mutation-rate", type=float, default=0.10, help="for --variant mutation-only")
    run.add_argument("--workers", type=int, default=1)
    run.add_argument("--data-dir", default=None, help="directory holding the dataset files")
    run.add_argument("--no-plots", action="store_true")
    run.add_argument("--out", required=True, type=Path)

    summ = sub.add_parser("summarize", help="print the summary tables of a rows.csv")
    summ.add_argument("--out", required=True, type=Path, help="run directory (or rows.csv)")
    summ.add_argument("--variant", choices=ex.VARIANTS, default="baseline")

    plot = sub.add_parser("plot", help="redraw plots from a rows.csv")
    plot.add_argument("--out", required=True, type=Path, help="run directory (or rows.csv)")
    return p


def _rows_path(out: Path) -> Path:
    return out if out.suffix == ".csv" else out / "rows.csv"


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO, format="%(message)s")
    try:
        if args.command == "run":
            cfg = ex.ExperimentConfig(
                datasets=args.datasets,
                algorithms=args.algorithms,
                error_costs=args.error_costs,
                splits=args.splits,
                seed=args.seed,
                variant=args.variant,
                scale=args.scale,
                mutation_rate=args.mutation_rate,
                data_dir=args.data_dir,
                workers=args.workers,
            )

            def progress(rows):
                r = rows[0]
                log.info("%s ICET split %d cost %g: %.1f%% (%.1fs)", r.dataset, r.split, r.error_cost, r.normalized_cost_pct, r.wall_time)

            rows = ex.run_experiment(cfg, progress=progress)
            for path in ex.emit_outputs(rows, args.out, args.variant, plots=not args.no_plots):
                log.info("wrote %s", path)
            sys.stdout.write(ex.summary_markdown(rows, args.variant))
        elif args.command == "summarize":
            rows = ex.read_rows(_rows_path(args.out))
            text = ex.summary_markdown(rows, args.variant)
            if args.out.is_dir():
                (args.out / "summary.md").write_text(text)
            sys.stdout.write(text)
        elif args.command == "plot":
            path = _rows_path(args.out)
            rows = ex.read_rows(path)
            for p in ex.plot_rows(rows, path.parent / "plots"):
                log.info("wrote %s", p)
    except (ex.ExperimentError, FileNotFoundError, ValueError) as e:
        log.error("error: %s", e)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
