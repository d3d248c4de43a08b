"""Experiment orchestration: grids of calibration runs and file workflows.

A cell fixes one combination of data process, base-model error profile,
calibration method, and sample sizes. Running a cell generates a
calibration dataset, applies the base model to the shifted conditional
probabilities, fits the calibrator on the calibration outcomes, then
scores predictions on an independently generated test dataset. Grids of
cells run in config order, optionally across processes, and land in a
delimited report whose bytes depend only on the config.

Note the data roles: the calibrator fits on base-model outputs paired
with *full-population* labels. Undersampling enters only through the
shift of the conditional probabilities that the base model sees; no rows
are dropped on this path.
"""

from __future__ import annotations

import csv
import itertools
import json
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from . import rng
from .base_models import BaseModelSpec, apply_base_model
from .calibrators import METHODS, calibrate, fit_calibrator
from .datagen import DataGenConfig, gen_dataset
from .errors import ConfigurationError, IngestionError, RecalError
from .metrics import MetricsReport, compute_report
from .sampler import PRESET_BY_NAME, undersampled_posterior

CONFIG_VERSION = 1

DEFAULT_N_CAL = 100_000

DEFAULT_N_TEST = 100_000

CSV_COLUMNS = (
    "b",
    "pi0",
    "base_model",
    "method",
    "n_cal",
    "n_test",
    "seed",
    "rmse",
    "mae",
    "brier",
    "nls",
)

# Roles deriving per-dataset seeds from the cell seed; calibration and
# test data must come from disjoint streams.
_CAL_ROLE = 0
_TEST_ROLE = 1


@dataclass(frozen=True)
class ExperimentCell:
    """One grid point: data process, base model, method, and sizes."""

    b: float
    pi0: float
    base_model: BaseModelSpec
    method: str
    n_calibration: int = DEFAULT_N_CAL
    n_test: int = DEFAULT_N_TEST
    seed: int = 0

    def __post_init__(self) -> None:
        if self.n_calibration < 1 or self.n_test < 1:
            raise ConfigurationError("n_calibration and n_test must be >= 1")
        if not self.b > 0:
            raise ConfigurationError(f"b must be > 0, got {self.b}")
        if not 0.0 < self.pi0 <= 1.0:
            raise ConfigurationError(f"pi0 must lie in (0, 1], got {self.pi0}")
        if self.method not in METHODS:
            raise ConfigurationError(
                f"unknown method {self.method!r}; expected one of {METHODS}"
            )
        rng.check_seed(self.seed)


@dataclass(frozen=True)
class CellResult:
    """Outcome of one cell: metrics on success, an error message otherwise."""

    cell: ExperimentCell
    metrics: MetricsReport | None
    wall_time: float
    error: str | None = None

    def __post_init__(self) -> None:
        if (self.metrics is None) == (self.error is None):
            raise ConfigurationError(
                "exactly one of metrics and error must be set"
            )


def _shifted_estimates(cell: ExperimentCell, role: int):
    """Generate one dataset for the cell and run the base model over it."""
    seed = rng.derive_seed(cell.seed, role)
    data = gen_dataset(DataGenConfig(
        b=cell.b,
        n=cell.n_calibration if role == _CAL_ROLE else cell.n_test,
        seed=seed,
    ))
    gamma = undersampled_posterior(data.p_true, cell.pi0)
    noise = rng.substream(seed, rng.NOISE)
    gamma_hat = apply_base_model(gamma, cell.base_model, gen=noise)
    return data, gamma_hat


def run_cell(cell: ExperimentCell) -> CellResult:
    """Execute one cell's full generate/fit/score pipeline.

    Deterministic per cell seed: calibration and test datasets come from
    disjoint substreams, and the calibrator is fitted before the test
    data is generated, so fitting can never observe test outcomes.
    """
    start = time.perf_counter()
    cal_data, gamma_hat_cal = _shifted_estimates(cell, _CAL_ROLE)
    calibrator = fit_calibrator(
        cell.method, gamma_hat_cal, cal_data.y, pi0=cell.pi0
    )
    test_data, gamma_hat_test = _shifted_estimates(cell, _TEST_ROLE)
    p_hat = np.asarray(calibrate(calibrator, gamma_hat_test))
    report = compute_report(p_hat, test_data.y, p_true=test_data.p_true)
    return CellResult(
        cell=cell, metrics=report, wall_time=time.perf_counter() - start
    )


def _run_cell_safe(cell: ExperimentCell) -> CellResult:
    start = time.perf_counter()
    try:
        return run_cell(cell)
    except RecalError as exc:
        return CellResult(
            cell=cell,
            metrics=None,
            wall_time=time.perf_counter() - start,
            error=str(exc),
        )


def run_cells(cells, workers: int = 1) -> list[CellResult]:
    """Run every cell, in processes when ``workers`` > 1.

    Results always come back in input order regardless of worker count;
    a failing cell yields an error-carrying result instead of aborting
    its siblings.
    """
    cells = list(cells)
    if workers < 1:
        raise ConfigurationError(f"workers must be >= 1, got {workers}")
    if workers == 1 or len(cells) <= 1:
        return [_run_cell_safe(c) for c in cells]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_run_cell_safe, cells))


def _format_real(value: float) -> str:
    return repr(float(value))


def _metric_fields(report: MetricsReport | None, paper_style: bool) -> list[str]:
    if report is None:
        return ["", "", "", ""]
    if paper_style:
        return [
            "" if report.rmse is None else f"{report.rmse * 1e4:.2f}",
            "" if report.mae is None else f"{report.mae * 1e4:.2f}",
            f"{report.brier * 1e3:.2f}",
            f"{report.nls:.2f}",
        ]
    return [
        "" if report.rmse is None else _format_real(report.rmse),
        "" if report.mae is None else _format_real(report.mae),
        _format_real(report.brier),
        _format_real(report.nls),
    ]


def results_to_csv(
    results,
    paper_style: bool = False,
    timings: bool = False,
) -> str:
    """Render cell results as a delimited report, one row per cell.

    Default mode writes full-precision reals and is byte-identical across
    repeat runs of the same config. ``paper_style`` rescales rmse/mae by
    1e4 and brier by 1e3 and rounds to two decimals for compact
    side-by-side tables. ``timings`` appends a wall_ms column, which
    breaks byte-reproducibility and is therefore off by default.
    """
    header = list(CSV_COLUMNS)
    if timings:
        header.append("wall_ms")
    header.append("error")
    lines = [",".join(header)]
    for result in results:
        cell = result.cell
        row = [
            _format_real(cell.b),
            _format_real(cell.pi0),
            cell.base_model.kind,
            cell.method,
            str(cell.n_calibration),
            str(cell.n_test),
            str(cell.seed),
            *_metric_fields(result.metrics, paper_style),
        ]
        if timings:
            row.append(f"{result.wall_time * 1e3:.3f}")
        row.append("" if result.error is None else result.error.replace(",", ";"))
        lines.append(",".join(row))
    return "\n".join(lines) + "\n"


def _parse_base_model(raw) -> BaseModelSpec:
    if isinstance(raw, str):
        return BaseModelSpec(kind=raw)
    if isinstance(raw, dict):
        unknown = set(raw) - {"kind", "sigma", "seed"}
        if unknown:
            raise ConfigurationError(
                f"unknown base_model keys: {sorted(unknown)}"
            )
        if "kind" not in raw:
            raise ConfigurationError("base_model object requires a 'kind'")
        spec = BaseModelSpec(kind=raw["kind"])
        if "sigma" in raw:
            spec = replace(spec, sigma=float(raw["sigma"]))
        if "seed" in raw:
            spec = replace(spec, seed=int(raw["seed"]))
        return spec
    raise ConfigurationError(
        f"base_model must be a kind name or object, got {type(raw).__name__}"
    )


_CELL_KEYS = {"b", "pi0", "preset", "base_model", "method", "n_cal", "n_test", "seed"}


def _lookup_preset(name):
    if name not in PRESET_BY_NAME:
        raise ConfigurationError(
            f"unknown preset {name!r}; expected one of {sorted(PRESET_BY_NAME)}"
        )
    return PRESET_BY_NAME[name]


def _parse_cell(raw: dict, defaults: dict) -> ExperimentCell:
    for source, label in ((raw, "cell"), (defaults, "defaults")):
        unknown = set(source) - _CELL_KEYS
        if unknown:
            raise ConfigurationError(f"unknown {label} keys: {sorted(unknown)}")
    # Precedence: explicit cell values, then the cell's preset, then defaults.
    merged = {**defaults, **raw}
    if "preset" in merged:
        preset = _lookup_preset(merged.pop("preset"))
        if "b" not in raw:
            merged["b"] = preset.b
        if "pi0" not in raw:
            merged["pi0"] = preset.pi0
    for key in ("b", "pi0", "base_model", "method"):
        if key not in merged:
            raise ConfigurationError(f"cell is missing required key {key!r}")
    return ExperimentCell(
        b=float(merged["b"]),
        pi0=float(merged["pi0"]),
        base_model=_parse_base_model(merged["base_model"]),
        method=merged["method"],
        n_calibration=int(merged.get("n_cal", DEFAULT_N_CAL)),
        n_test=int(merged.get("n_test", DEFAULT_N_TEST)),
        seed=int(merged.get("seed", 0)),
    )


_GRID_KEYS = {"preset", "pairs", "base_model", "method", "n_cal", "n_test", "seed"}


def _expand_grid(grid: dict, defaults: dict) -> list[ExperimentCell]:
    unknown = set(grid) - _GRID_KEYS
    if unknown:
        raise ConfigurationError(f"unknown grid keys: {sorted(unknown)}")
    if ("preset" in grid) == ("pairs" in grid):
        raise ConfigurationError(
            "grid requires exactly one of 'preset' (names) or 'pairs' "
            "([b, pi0] lists)"
        )
    if "preset" in grid:
        pairs = []
        for name in grid["preset"]:
            p = _lookup_preset(name)
            pairs.append((p.b, p.pi0))
    else:
        pairs = [(float(b), float(pi0)) for b, pi0 in grid["pairs"]]
    base_models = [_parse_base_model(raw) for raw in grid.get("base_model", ["perfect"])]
    methods = list(grid.get("method", list(METHODS)))
    n_cals = [int(n) for n in grid.get("n_cal", [defaults.get("n_cal", DEFAULT_N_CAL)])]
    n_tests = [int(n) for n in grid.get("n_test", [defaults.get("n_test", DEFAULT_N_TEST)])]
    seeds = [int(s) for s in grid.get("seed", [defaults.get("seed", 0)])]
    cells = []
    for (b, pi0), bm, method, n_cal, n_test, seed in itertools.product(
        pairs, base_models, methods, n_cals, n_tests, seeds
    ):
        cells.append(ExperimentCell(
            b=b,
            pi0=pi0,
            base_model=bm,
            method=method,
            n_calibration=n_cal,
            n_test=n_test,
            seed=seed,
        ))
    return cells


def load_config(path: str) -> list[ExperimentCell]:
    """Parse a JSON run config into cells, in document order.

    The document holds ``{"version": 1}`` plus optional ``defaults``,
    a ``cells`` array of explicit cells, and/or a ``grid`` block whose
    axes are crossed in a fixed order (preset/pairs, base_model, method,
    n_cal, n_test, seed).
    """
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise ConfigurationError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigurationError(
            f"config {path} is not valid JSON: {exc.msg} "
            f"(line {exc.lineno}, column {exc.colno})"
        ) from exc
    if not isinstance(doc, dict):
        raise ConfigurationError("config root must be a JSON object")
    unknown = set(doc) - {"version", "defaults", "cells", "grid"}
    if unknown:
        raise ConfigurationError(f"unknown config keys: {sorted(unknown)}")
    if doc.get("version") != CONFIG_VERSION:
        raise ConfigurationError(
            f"config must declare \"version\": {CONFIG_VERSION}, "
            f"got {doc.get('version')!r}"
        )
    defaults = doc.get("defaults", {})
    if not isinstance(defaults, dict):
        raise ConfigurationError("defaults must be an object")
    cells = [_parse_cell(raw, defaults) for raw in doc.get("cells", [])]
    if "grid" in doc:
        cells.extend(_expand_grid(doc["grid"], defaults))
    return cells


def run_grid(
    config_path: str,
    out_path: str,
    workers: int = 1,
    paper_style: bool = False,
    timings: bool = False,
) -> list[CellResult]:
    """Run a config's cells and write the delimited report to ``out_path``."""
    cells = load_config(config_path)
    results = run_cells(cells, workers=workers)
    text = results_to_csv(results, paper_style=paper_style, timings=timings)
    with open(out_path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)
    return results


@dataclass(eq=False)
class PredictionSet:
    """Externally supplied predictions: estimates, outcomes, optional truth.

    ``fieldnames`` and ``rows`` carry the source file's columns through
    unchanged so calibrated output can extend rather than replace them.
    """

    gamma_hat: np.ndarray
    y: np.ndarray
    p_true: np.ndarray | None
    fieldnames: list[str]
    rows: list[dict]


def ingest_predictions(csv_path: str) -> PredictionSet:
    """Read and validate a predictions CSV.

    Requires columns ``gamma_hat`` (in [0, 1]) and ``y`` (0/1); an
    optional ``p_true`` column enables rmse/mae downstream. Errors name
    the offending row, counting the header as line 1.
    """
    try:
        with open(csv_path, encoding="utf-8", newline="") as fh:
            reader = csv.DictReader(fh)
            fieldnames = list(reader.fieldnames or [])
            rows = list(reader)
    except OSError as exc:
        raise IngestionError(f"cannot read {csv_path}: {exc}") from exc
    missing = {"gamma_hat", "y"} - set(fieldnames)
    if missing:
        raise IngestionError(
            f"{csv_path} is missing required columns: {sorted(missing)}"
        )
    if not rows:
        raise IngestionError(f"{csv_path} contains no data rows")
    has_truth = "p_true" in fieldnames
    gamma_hat = np.empty(len(rows))
    y = np.empty(len(rows))
    p_true = np.empty(len(rows)) if has_truth else None
    for i, row in enumerate(rows):
        line = i + 2
        try:
            g = float(row["gamma_hat"])
            outcome = float(row["y"])
        except (TypeError, ValueError) as exc:
            raise IngestionError(f"line {line}: non-numeric value ({exc})") from exc
        if not 0.0 <= g <= 1.0:
            raise IngestionError(f"line {line}: gamma_hat {g} outside [0, 1]")
        if outcome not in (0.0, 1.0):
            raise IngestionError(f"line {line}: y must be 0 or 1, got {row['y']}")
        gamma_hat[i] = g
        y[i] = outcome
        if has_truth:
            try:
                t = float(row["p_true"])
            except (TypeError, ValueError) as exc:
                raise IngestionError(
                    f"line {line}: non-numeric p_true ({exc})"
                ) from exc
            if not 0.0 <= t <= 1.0:
                raise IngestionError(f"line {line}: p_true {t} outside [0, 1]")
            p_true[i] = t
    return PredictionSet(
        gamma_hat=gamma_hat,
        y=y.astype(np.int8),
        p_true=p_true,
        fieldnames=fieldnames,
        rows=rows,
    )


def calibrate_file(
    input_csv: str,
    method: str,
    output_csv: str,
    pi0: float | None = None,
) -> MetricsReport:
    """Calibrate a predictions file in place of a live pipeline.

    Fits the method on the file's own (gamma_hat, y) pairs (the analytical
    method instead uses ``pi0``), appends a ``p_hat`` column, writes the
    result, and returns the metrics of the calibrated estimates against
    the file's outcomes and, when present, true probabilities.
    """
    pred = ingest_predictions(input_csv)
    calibrator = fit_calibrator(method, pred.gamma_hat, pred.y, pi0=pi0)
    p_hat = np.asarray(calibrate(calibrator, pred.gamma_hat), dtype=float)
    out_fields = pred.fieldnames + ["p_hat"]
    with open(output_csv, "w", encoding="utf-8", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=out_fields)
        writer.writeheader()
        for row, value in zip(pred.rows, p_hat):
            writer.writerow({**row, "p_hat": repr(float(value))})
    return compute_report(p_hat, pred.y, p_true=pred.p_true)
