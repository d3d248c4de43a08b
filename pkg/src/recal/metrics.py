"""Evaluation metrics for calibrated probability estimates.

Two families: error against the true probabilities (RMSE, MAE), available
only when those are known, and proper scores against realized outcomes
(Brier score, negative logarithmic score). The log score is a sum over
rows, not a mean, and clamps probabilities to [1e-5, 1 - 1e-5] so that a
confident miss contributes a large finite penalty instead of infinity.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError

NLS_CLAMP = 1e-5


@dataclass(frozen=True)
class MetricsReport:
    """Scores of one prediction set; rmse/mae are None without true probabilities."""

    brier: float
    nls: float
    n: int
    rmse: float | None = None
    mae: float | None = None

    def __post_init__(self) -> None:
        if self.n < 1:
            raise DomainError(f"n must be >= 1, got {self.n}")
        for name in ("brier", "nls", "rmse", "mae"):
            v = getattr(self, name)
            if v is not None and not np.isfinite(v):
                raise DomainError(f"{name} must be finite, got {v}")
        if (self.rmse is None) != (self.mae is None):
            raise DomainError("rmse and mae must be present together")
        if self.rmse is not None and self.mae > self.rmse + 1e-12:
            raise DomainError(f"mae {self.mae} exceeds rmse {self.rmse}")


def _paired(a, b, na: str, nb: str) -> tuple[np.ndarray, np.ndarray]:
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape or a.ndim != 1 or len(a) == 0:
        raise DomainError(
            f"{na} and {nb} must be non-empty equal-length vectors, "
            f"got shapes {a.shape} and {b.shape}"
        )
    return a, b


def rmse(p_hat, p_true) -> float:
    """Root mean squared error of estimates against true probabilities."""
    p_hat, p_true = _paired(p_hat, p_true, "p_hat", "p_true")
    return float(np.sqrt(np.mean((p_hat - p_true) ** 2)))


def mae(p_hat, p_true) -> float:
    """Mean absolute error of estimates against true probabilities."""
    p_hat, p_true = _paired(p_hat, p_true, "p_hat", "p_true")
    return float(np.mean(np.abs(p_hat - p_true)))


def brier(p_hat, y) -> float:
    """Mean squared gap between probability estimates and 0/1 outcomes."""
    p_hat, y = _paired(p_hat, y, "p_hat", "y")
    if not ((p_hat >= 0.0) & (p_hat <= 1.0)).all():
        raise DomainError("p_hat values must lie in [0, 1]")
    return float(np.mean((p_hat - y) ** 2))


def nls(p_hat, y) -> float:
    """Summed negative log-likelihood of outcomes, with clamped estimates.

    Each side of the likelihood is clamped separately: the contribution of
    row i is ``-log(clip(p_hat_i))`` when y_i = 1 and
    ``-log(clip(1 - p_hat_i))`` when y_i = 0, with clip bounds
    [1e-5, 1 - 1e-5]. Clamping the chosen side directly makes an estimate
    of exactly 0 or 1 contribute exactly ``-log(1e-5)`` when wrong.
    """
    p_hat, y = _paired(p_hat, y, "p_hat", "y")
    pos = np.log(np.clip(p_hat, NLS_CLAMP, 1.0 - NLS_CLAMP))
    neg = np.log(np.clip(1.0 - p_hat, NLS_CLAMP, 1.0 - NLS_CLAMP))
    return float(-np.sum(np.where(y == 1.0, pos, neg)))


def compute_report(p_hat, y, p_true=None) -> MetricsReport:
    """Bundle all applicable metrics for one prediction set."""
    return MetricsReport(
        brier=brier(p_hat, y),
        nls=nls(p_hat, y),
        n=len(np.asarray(p_hat)),
        rmse=None if p_true is None else rmse(p_hat, p_true),
        mae=None if p_true is None else mae(p_hat, p_true),
    )
