import json

import numpy as np
import pytest

from recal.base_models import BaseModelSpec
from recal.errors import ConfigurationError, FitError, IngestionError
from recal.harness import (
    CellResult,
    ExperimentCell,
    calibrate_file,
    ingest_predictions,
    load_config,
    results_to_csv,
    run_cell,
    run_cells,
)
from recal.metrics import MetricsReport

PERFECT = BaseModelSpec("perfect")


def _cell(**overrides):
    base = dict(
        b=1.1,
        pi0=0.125,
        base_model=PERFECT,
        method="analytical",
        n_calibration=2_000,
        n_test=2_000,
        seed=5,
    )
    base.update(overrides)
    return ExperimentCell(**base)


def test_cell_validation():
    with pytest.raises(ConfigurationError):
        _cell(n_calibration=0)
    with pytest.raises(ConfigurationError):
        _cell(pi0=0.0)
    with pytest.raises(ConfigurationError):
        _cell(method="magic")
    with pytest.raises(ConfigurationError):
        _cell(b=-1.0)


def test_cell_result_needs_exactly_one_of_metrics_and_error():
    report = MetricsReport(brier=0.1, nls=10.0, n=5)
    with pytest.raises(ConfigurationError):
        CellResult(cell=_cell(), metrics=report, wall_time=0.1, error="boom")
    with pytest.raises(ConfigurationError):
        CellResult(cell=_cell(), metrics=None, wall_time=0.1, error=None)


def test_analytical_on_perfect_model_recovers_exactly():
    result = run_cell(_cell())
    assert result.metrics.rmse <= 1e-12
    assert result.metrics.mae <= 1e-12


def test_degenerate_cell_without_undersampling_is_exact():
    result = run_cell(_cell(pi0=1.0))
    assert result.metrics.rmse <= 1e-12


def test_run_cell_is_deterministic():
    a = run_cell(_cell(method="platt"))
    b = run_cell(_cell(method="platt"))
    assert a.metrics.rmse == b.metrics.rmse
    assert a.metrics.nls == b.metrics.nls
    c = run_cell(_cell(method="platt", seed=6))
    assert c.metrics.rmse != a.metrics.rmse


def test_noisy_base_model_draws_fresh_noise_per_dataset():
    # calibration and test draws must differ, so a cell with noise cannot
    # score better than float noise would ever allow by stream reuse
    cell = _cell(
        base_model=BaseModelSpec("noisy_log_odds", sigma=0.2), method="platt_logit"
    )
    result = run_cell(cell)
    assert result.metrics is not None
    again = run_cell(cell)
    assert result.metrics.rmse == again.metrics.rmse


def test_failing_cell_reports_instead_of_raising_in_grid():
    cells = [
        _cell(),
        _cell(method="gam", n_calibration=30),  # too few rows to fit
        _cell(method="platt"),
    ]
    results = run_cells(cells)
    assert [r.error is None for r in results] == [True, False, True]
    assert "50" in results[1].error
    assert results[1].wall_time >= 0.0


def test_parallel_execution_preserves_config_order():
    cells = [_cell(seed=s, method="platt") for s in (1, 2, 3, 4)]
    serial = run_cells(cells, workers=1)
    parallel = run_cells(cells, workers=2)
    assert [r.cell.seed for r in parallel] == [1, 2, 3, 4]
    assert [r.metrics.rmse for r in serial] == [r.metrics.rmse for r in parallel]


def test_csv_rendering_modes():
    report = MetricsReport(brier=0.00341, nls=14629.94, n=100, rmse=0.000425, mae=0.000157)
    ok = CellResult(cell=_cell(), metrics=report, wall_time=0.5)
    bad = CellResult(
        cell=_cell(method="gam"), metrics=None, wall_time=0.1, error="no, sorry"
    )
    text = results_to_csv([ok, bad])
    lines = text.strip().split("\n")
    assert lines[0] == "b,pi0,base_model,method,n_cal,n_test,seed,rmse,mae,brier,nls,error"
    assert lines[1].startswith("1.1,0.125,perfect,analytical,2000,2000,5,0.000425,")
    assert lines[2].endswith("gam,2000,2000,5,,,,,no; sorry")
    styled = results_to_csv([ok], paper_style=True)
    assert "4.25,1.57,3.41,14629.94" in styled
    timed = results_to_csv([ok], timings=True)
    assert "wall_ms" in timed.split("\n")[0]
    assert ",500.000," in timed.split("\n")[1]


def test_csv_is_reproducible_for_equal_results():
    results = run_cells([_cell(), _cell(method="isotonic")])
    again = run_cells([_cell(), _cell(method="isotonic")])
    assert results_to_csv(results) == results_to_csv(again)


def _write_config(tmp_path, doc):
    path = tmp_path / "config.json"
    path.write_text(json.dumps(doc))
    return str(path)


def test_load_config_with_cells_and_grid(tmp_path):
    doc = {
        "version": 1,
        "defaults": {"n_cal": 500, "n_test": 600, "seed": 9},
        "cells": [
            {"preset": "high", "base_model": "perfect", "method": "analytical"},
            {
                "b": 2.0,
                "pi0": 0.5,
                "base_model": {"kind": "noisy_log_odds", "sigma": 0.1},
                "method": "platt",
                "n_cal": 50,
            },
        ],
        "grid": {
            "preset": ["low", "high"],
            "base_model": ["perfect"],
            "method": ["platt", "isotonic"],
            "seed": [1, 2],
        },
    }
    cells = load_config(_write_config(tmp_path, doc))
    assert len(cells) == 2 + 2 * 2 * 2
    assert cells[0].b == 1.1 and cells[0].pi0 == 0.125
    assert cells[0].n_calibration == 500 and cells[0].n_test == 600
    assert cells[1].base_model.sigma == 0.1 and cells[1].n_calibration == 50
    # grid order: preset-major, then base_model, method, sizes, seed
    assert [(c.b, c.method, c.seed) for c in cells[2:6]] == [
        (2.0, "platt", 1),
        (2.0, "platt", 2),
        (2.0, "isotonic", 1),
        (2.0, "isotonic", 2),
    ]


def test_load_config_rejects_malformed_documents(tmp_path):
    with pytest.raises(ConfigurationError):
        load_config(str(tmp_path / "missing.json"))
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    with pytest.raises(ConfigurationError, match="line 1"):
        load_config(str(bad))
    with pytest.raises(ConfigurationError, match="version"):
        load_config(_write_config(tmp_path, {"cells": []}))
    with pytest.raises(ConfigurationError, match="unknown"):
        load_config(_write_config(tmp_path, {"version": 1, "extra": 1}))
    with pytest.raises(ConfigurationError, match="unknown cell keys"):
        load_config(
            _write_config(
                tmp_path, {"version": 1, "cells": [{"bee": 1.1}]}
            )
        )
    with pytest.raises(ConfigurationError, match="preset"):
        load_config(
            _write_config(
                tmp_path,
                {
                    "version": 1,
                    "grid": {"base_model": ["perfect"], "method": ["platt"]},
                },
            )
        )


def test_empty_config_yields_header_only_csv(tmp_path):
    cells = load_config(_write_config(tmp_path, {"version": 1, "cells": []}))
    assert cells == []
    assert results_to_csv(run_cells(cells)).count("\n") == 1


def _write_predictions(path, rows, header="gamma_hat,y,p_true"):
    path.write_text("\n".join([header] + rows) + "\n")
    return str(path)


def test_ingest_happy_path(tmp_path):
    path = _write_predictions(
        tmp_path / "p.csv", ["0.5,1,0.2", "0.25,0,0.1"]
    )
    pred = ingest_predictions(path)
    assert np.array_equal(pred.gamma_hat, [0.5, 0.25])
    assert np.array_equal(pred.y, [1, 0])
    assert np.array_equal(pred.p_true, [0.2, 0.1])
    bare = _write_predictions(tmp_path / "q.csv", ["0.5,1"], header="gamma_hat,y")
    assert ingest_predictions(bare).p_true is None


def test_ingest_errors_name_the_row(tmp_path):
    path = _write_predictions(tmp_path / "a.csv", ["0.5,1,0.2", "1.2,0,0.1"])
    with pytest.raises(IngestionError, match="line 3"):
        ingest_predictions(path)
    path = _write_predictions(tmp_path / "b.csv", ["0.5,2,0.2"])
    with pytest.raises(IngestionError, match="line 2"):
        ingest_predictions(path)
    path = _write_predictions(tmp_path / "c.csv", ["0.5,1"], header="gamma,y")
    with pytest.raises(IngestionError, match="gamma_hat"):
        ingest_predictions(path)
    empty = _write_predictions(tmp_path / "d.csv", [])
    with pytest.raises(IngestionError, match="no data"):
        ingest_predictions(empty)


def test_calibrate_file_identity_case(tmp_path):
    src = _write_predictions(
        tmp_path / "in.csv", ["0.5,1,0.5", "0.25,0,0.25", "0.75,1,0.75"]
    )
    out = tmp_path / "out.csv"
    report = calibrate_file(src, "analytical", str(out), pi0=1.0)
    assert report.rmse == 0.0
    lines = out.read_text().strip().split("\n")
    assert lines[0] == "gamma_hat,y,p_true,p_hat"
    for line in lines[1:]:
        fields = line.split(",")
        assert float(fields[3]) == float(fields[0])


def test_calibrate_file_isotonic_on_monotone_file(tmp_path):
    src = _write_predictions(
        tmp_path / "in.csv",
        ["0.1,0", "0.2,0", "0.6,1", "0.9,1"],
        header="gamma_hat,y",
    )
    out = tmp_path / "out.csv"
    report = calibrate_file(src, "isotonic", str(out))
    assert report.rmse is None
    p_hat = [float(line.split(",")[-1]) for line in out.read_text().strip().split("\n")[1:]]
    assert p_hat == [0.0, 0.0, 1.0, 1.0]


def test_calibrate_file_single_class_fails(tmp_path):
    src = _write_predictions(
        tmp_path / "in.csv", ["0.1,0", "0.2,0"], header="gamma_hat,y"
    )
    with pytest.raises(FitError):
        calibrate_file(src, "platt", str(tmp_path / "out.csv"))
