import numpy as np

from recal.base_models import BaseModelSpec
from recal.harness import CellResult, ExperimentCell
from recal.metrics import MetricsReport
from recal.plots import save_calibration_figure, save_results_figure


def _result(method, rmse, error=None):
    cell = ExperimentCell(
        b=1.1,
        pi0=0.125,
        base_model=BaseModelSpec("perfect"),
        method=method,
        n_calibration=100,
        n_test=100,
        seed=0,
    )
    if error is not None:
        return CellResult(cell=cell, metrics=None, wall_time=0.0, error=error)
    report = MetricsReport(brier=0.1, nls=50.0, n=100, rmse=rmse, mae=rmse / 2)
    return CellResult(cell=cell, metrics=report, wall_time=0.0)


def test_results_figure_written(tmp_path):
    results = [
        _result("analytical", 1e-8),
        _result("platt", 2e-3),
        _result("gam", None, error="went wrong"),
    ]
    path = tmp_path / "summary.png"
    assert save_results_figure(results, str(path)) is True
    assert path.stat().st_size > 0


def test_results_figure_skipped_when_nothing_succeeded(tmp_path):
    results = [_result("platt", None, error="bad")]
    path = tmp_path / "summary.png"
    assert save_results_figure(results, str(path)) is False
    assert not path.exists()


def test_calibration_figure_written(tmp_path):
    gen = np.random.default_rng(0)
    path = tmp_path / "scatter.png"
    p_true = gen.random(500)
    p_hat = np.clip(p_true + gen.normal(0, 0.01, 500), 0, 1)
    assert save_calibration_figure(p_true, p_hat, str(path), label="platt") is True
    assert path.stat().st_size > 0


def test_calibration_figure_needs_truth(tmp_path):
    path = tmp_path / "scatter.png"
    assert save_calibration_figure(None, [0.5], str(path), label="x") is False
    assert not path.exists()
