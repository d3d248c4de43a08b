"""Synthetic binary-outcome datasets with known true probabilities.

Ten uniform covariates feed a fixed log-odds formula with pairwise and
four-way interaction terms; a rate parameter ``b`` shifts the overall
success rate. With the default covariate ranges, ``b`` = 2, 1.5, and 1.1
give mean outcome probabilities near 0.0022, 0.0208, and 0.1109 — three
levels of class imbalance for calibration experiments.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np
from scipy.special import expit

from . import rng
from .errors import ConfigurationError

LOG99 = np.log(99.0)

N_COVARIATES = 10

# Default per-covariate (min, max) uniform ranges.
DEFAULT_BOUNDS = (
    (-0.4, 0.6),
    (-0.2, 0.8),
    (-0.4, 1.0),
    (-0.1, 0.9),
    (0.0, 5.0),
    (0.0, 3.0),
    (1.0, 4.0),
    (1.0, 7.0),
    (1.0, 3.0),
    (0.0, 2.0),
)

CSV_HEADER = [f"x{i}" for i in range(1, N_COVARIATES + 1)] + ["p_true", "y"]


@dataclass(frozen=True)
class CovariateRanges:
    """Per-covariate uniform sampling ranges; exactly ten (min, max) pairs."""

    bounds: tuple[tuple[float, float], ...] = DEFAULT_BOUNDS

    def __post_init__(self) -> None:
        if len(self.bounds) != N_COVARIATES:
            raise ConfigurationError(
                f"expected {N_COVARIATES} covariate ranges, got {len(self.bounds)}"
            )
        for j, (lo, hi) in enumerate(self.bounds, start=1):
            if not lo < hi:
                raise ConfigurationError(
                    f"covariate {j}: min must be strictly below max, got ({lo}, {hi})"
                )

    @property
    def mins(self) -> np.ndarray:
        return np.array([lo for lo, _ in self.bounds])

    @property
    def maxs(self) -> np.ndarray:
        return np.array([hi for _, hi in self.bounds])


DEFAULT_RANGES = CovariateRanges()


@dataclass(frozen=True)
class DataGenConfig:
    """Configuration for one synthetic dataset draw."""

    b: float
    n: int
    seed: int
    ranges: CovariateRanges = field(default_factory=CovariateRanges)

    def __post_init__(self) -> None:
        if self.n < 1:
            raise ConfigurationError(f"n must be >= 1, got {self.n}")
        if not self.b > 0:
            raise ConfigurationError(f"b must be > 0, got {self.b}")
        rng.check_seed(self.seed)


@dataclass(eq=False)
class SyntheticDataset:
    """A generated dataset: covariates, true probabilities, and outcomes.

    Arrays are marked read-only on construction; a dataset is immutable and
    safe to share across threads.
    """

    x: np.ndarray
    p_true: np.ndarray
    y: np.ndarray

    def __post_init__(self) -> None:
        n = len(self.p_true)
        if self.x.shape != (n, N_COVARIATES) or len(self.y) != n:
            raise ConfigurationError(
                f"inconsistent dataset shapes: x {self.x.shape}, "
                f"p_true {self.p_true.shape}, y {self.y.shape}"
            )
        if n and not (0.0 < self.p_true.min() and self.p_true.max() < 1.0):
            raise ConfigurationError("p_true values must lie strictly in (0, 1)")
        if n and not np.isin(self.y, (0, 1)).all():
            raise ConfigurationError("y values must be 0 or 1")
        for arr in (self.x, self.p_true, self.y):
            arr.setflags(write=False)

    def __len__(self) -> int:
        return len(self.p_true)


def gen_covariates(
    n: int, ranges: CovariateRanges = DEFAULT_RANGES, seed: int = 0
) -> np.ndarray:
    """Draw an ``n`` x 10 matrix of independent uniform covariates.

    Entry (i, j) is uniform on the j-th range. Deterministic for a fixed
    seed: the draw comes from the covariate substream of ``seed``.
    """
    if n < 1:
        raise ConfigurationError(f"n must be >= 1, got {n}")
    gen = rng.substream(seed, rng.COVARIATES)
    return gen.uniform(ranges.mins, ranges.maxs, size=(n, N_COVARIATES))


def true_logit(x: np.ndarray, b: float) -> np.ndarray | float:
    """Log odds of success for covariate vector(s) ``x`` at rate parameter ``b``.

    Computes ``(log 99 / 40) * (sum of the ten covariates plus the
    interaction terms x1*x3, x2*x5, x4*x9, x6*x7, x8*x10, x1*x2*x3*x4 and
    x1*x2*x9*x10) - b * log 99``. Accepts a single 10-vector or an (n, 10)
    matrix; strictly decreasing in ``b`` for fixed ``x``.
    """
    x = np.asarray(x, dtype=float)
    x1, x2, x3, x4, x5, x6, x7, x8, x9, x10 = (x[..., j] for j in range(N_COVARIATES))
    interactions = (
        x1 * x3
        + x2 * x5
        + x4 * x9
        + x6 * x7
        + x8 * x10
        + x1 * x2 * x3 * x4
        + x1 * x2 * x9 * x10
    )
    out = LOG99 / 40.0 * (x.sum(axis=-1) + interactions) - b * LOG99
    return float(out) if out.ndim == 0 else out


def gen_dataset(config: DataGenConfig) -> SyntheticDataset:
    """Generate a dataset: covariates, true probabilities, Bernoulli outcomes.

    ``p_true`` is the logistic transform of :func:`true_logit`; outcomes are
    independent Bernoulli(``p_true``) draws from a substream separate from
    the covariate stream, so the same seed always reproduces both exactly.
    """
    x = gen_covariates(config.n, config.ranges, config.seed)
    p_true = expit(true_logit(x, config.b))
    outcome_gen = rng.substream(config.seed, rng.OUTCOMES)
    y = (outcome_gen.random(config.n) < p_true).astype(np.int8)
    return SyntheticDataset(x=x, p_true=p_true, y=y)


def to_csv(dataset: SyntheticDataset, path: str) -> None:
    """Dump a dataset as CSV with header x1..x10,p_true,y.

    Reals are written with full round-trip precision; y as literal 0/1.
    """
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_HEADER)
        for row, p, y in zip(dataset.x, dataset.p_true, dataset.y):
            writer.writerow(
                [repr(float(v)) for v in row] + [repr(float(p)), str(int(y))]
            )
