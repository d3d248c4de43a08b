"""Command-line entry points: experiment grids, file calibration, data generation.

Three verbs:

* ``recal grid config.json`` runs every cell of a JSON experiment config
  and writes a CSV report, plus a summary figure next to it.
* ``recal calibrate in.csv --method m --out out.csv`` fits one method on
  a predictions file and writes the calibrated estimates back out.
* ``recal gen --b 1.1 --n 1000 --seed 7 --out data.csv`` dumps one
  synthetic dataset.

Exit status: 0 on success, 1 when any cell or fit failed, 2 for config
and input-file problems.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import harness
from .calibrators import METHODS
from .datagen import DataGenConfig, gen_dataset, to_csv
from .errors import ConfigurationError, IngestionError, RecalError


def _figure_path(out_path: str) -> str:
    return str(Path(out_path).with_suffix(".png"))


def _print_report(report) -> None:
    print(f"n={report.n}")
    if report.rmse is not None:
        print(f"rmse={report.rmse:.6g}")
        print(f"mae={report.mae:.6g}")
    print(f"brier={report.brier:.6g}")
    print(f"nls={report.nls:.6g}")


def _cmd_grid(args) -> int:
    results = harness.run_grid(
        args.config,
        args.out,
        workers=args.workers,
        paper_style=args.paper_style,
        timings=args.timings,
    )
    failed = [r for r in results if r.error is not None]
    print(f"{len(results)} cells -> {args.out} ({len(failed)} failed)")
    if not args.no_figure and results:
        from . import plots

        figure = args.figure or _figure_path(args.out)
        if plots.save_results_figure(results, figure):
            print(f"figure -> {figure}")
    for r in failed:
        cell = r.cell
        print(
            f"cell failed: b={cell.b} pi0={cell.pi0} "
            f"base_model={cell.base_model.kind} method={cell.method}: {r.error}",
            file=sys.stderr,
        )
    return 1 if failed else 0


def _cmd_calibrate(args) -> int:
    report = harness.calibrate_file(
        args.input, args.method, args.out, pi0=args.pi0
    )
    _print_report(report)
    if not args.no_figure and report.rmse is not None:
        from . import plots

        out = harness.ingest_predictions(args.out)
        p_hat = [float(row["p_hat"]) for row in out.rows]
        figure = _figure_path(args.out)
        if plots.save_calibration_figure(
            out.p_true, p_hat, figure, label=args.method
        ):
            print(f"figure -> {figure}")
    return 0


def _cmd_gen(args) -> int:
    dataset = gen_dataset(DataGenConfig(b=args.b, n=args.n, seed=args.seed))
    to_csv(dataset, args.out)
    print(f"wrote {len(dataset)} rows -> {args.out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="recal",
        description=(
            "Probability calibration for binary classifiers trained on "
            "undersampled data."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    grid = sub.add_parser("grid", help="run an experiment grid from a JSON config")
    grid.add_argument("config", help="path to the JSON run config")
    grid.add_argument("--out", default="results.csv", help="report CSV path")
    grid.add_argument("--workers", type=int, default=1, help="parallel processes")
    grid.add_argument(
        "--paper-style",
        action="store_true",
        help="scale rmse/mae by 1e4 and brier by 1e3, rounded to 2 decimals",
    )
    grid.add_argument(
        "--timings",
        action="store_true",
        help="append a wall_ms column (makes the CSV non-reproducible)",
    )
    grid.add_argument(
        "--figure", default=None, help="summary figure path (default: report with .png)"
    )
    grid.add_argument(
        "--no-figure", action="store_true", help="skip the summary figure"
    )
    grid.set_defaults(func=_cmd_grid)

    cal = sub.add_parser("calibrate", help="calibrate a predictions CSV")
    cal.add_argument("input", help="CSV with gamma_hat and y columns")
    cal.add_argument("--method", required=True, choices=METHODS)
    cal.add_argument(
        "--pi0",
        type=float,
        default=None,
        help="negative-retention rate (required for the analytical method)",
    )
    cal.add_argument("--out", required=True, help="output CSV path")
    cal.add_argument(
        "--no-figure", action="store_true", help="skip the scatter figure"
    )
    cal.set_defaults(func=_cmd_calibrate)

    gen = sub.add_parser("gen", help="generate a synthetic dataset CSV")
    gen.add_argument("--b", type=float, required=True, help="rate parameter")
    gen.add_argument("--n", type=int, required=True, help="number of rows")
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--out", required=True, help="output CSV path")
    gen.set_defaults(func=_cmd_gen)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ConfigurationError, IngestionError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except RecalError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
