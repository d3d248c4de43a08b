"""Undersampling of negatives and the probability shift it induces.

Undersampling keeps every positive row and each negative row independently
with probability ``pi0``. Training on such data biases a model toward
predicting the conditional probability given retention,
``gamma = p / (p + (1 - p) * pi0)``, rather than the population probability
``p``. :func:`undersampled_posterior` computes that shifted target; the
analytical calibrator applies its exact inverse.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import rng
from .datagen import SyntheticDataset
from .errors import ConfigurationError, DomainError


@dataclass(frozen=True)
class Preset:
    """A named (b, pi0) pairing: rate parameter with its matched retention rate.

    Each preset's ``pi0`` roughly rebalances the classes that its ``b``
    produces, so undersampled datasets come out near 50/50.
    """

    name: str
    b: float
    pi0: float


# Imbalance presets, ordered from rarest outcomes to most common. Mean
# outcome rates are about 0.0022, 0.0208, and 0.1109.
PRESETS = (
    Preset("low", 2.0, 0.0023),
    Preset("mid", 1.5, 0.02125),
    Preset("high", 1.1, 0.125),
)

PRESET_BY_NAME = {p.name: p for p in PRESETS}


def _check_pi0(pi0: float) -> None:
    if not 0.0 < pi0 <= 1.0:
        raise ConfigurationError(f"pi0 must lie in (0, 1], got {pi0}")


@dataclass(frozen=True)
class SamplingConfig:
    """Retention probability for negatives plus the seed driving retention."""

    pi0: float
    seed: int

    def __post_init__(self) -> None:
        _check_pi0(self.pi0)
        rng.check_seed(self.seed)


def undersample(data: SyntheticDataset, cfg: SamplingConfig) -> SyntheticDataset:
    """Drop each negative row with probability 1 - pi0; keep all positives.

    Retention decisions are independent Bernoulli(``cfg.pi0``) draws from
    the retention substream of ``cfg.seed``. Row order is preserved, so the
    output rows are a subsequence of the input.
    """
    if len(data) == 0:
        raise ConfigurationError("cannot undersample an empty dataset")
    gen = rng.substream(cfg.seed, rng.RETENTION)
    keep = (data.y == 1) | (gen.random(len(data)) < cfg.pi0)
    return SyntheticDataset(
        x=data.x[keep].copy(), p_true=data.p_true[keep].copy(), y=data.y[keep].copy()
    )


def undersampled_posterior(p, pi0: float):
    """Probability of a positive outcome given that the row survived undersampling.

    For population probability ``p`` and negative-retention rate ``pi0``,
    returns ``p / (p + (1 - p) * pi0)``. Accepts a scalar or array ``p``;
    strictly increasing in ``p``, strictly decreasing in ``pi0``, and never
    below ``p``. The analytical calibration map is its exact inverse.
    """
    _check_pi0_domain(pi0)
    p_arr = np.asarray(p, dtype=float)
    if p_arr.size and not ((p_arr > 0.0) & (p_arr < 1.0)).all():
        raise DomainError("p values must lie strictly in (0, 1)")
    out = p_arr / (p_arr + (1.0 - p_arr) * pi0)
    return float(out) if out.ndim == 0 else out


def _check_pi0_domain(pi0: float) -> None:
    if not 0.0 < pi0 <= 1.0:
        raise DomainError(f"pi0 must lie in (0, 1], got {pi0}")
