"""Hypothetical base models: error profiles mapping γ to an estimate γ̂.

Rather than training real classifiers, experiments apply one of four
oracles to the exact conditional probability γ of the undersampled
population: return it unchanged, shrink it toward one half, push it
toward the extremes, or jitter its log odds. Each profile is monotone
in γ, so the ranking of cases is preserved while calibration degrades
in a controlled, known way.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import expit, logit

from . import rng
from .errors import ConfigurationError, DomainError

KINDS = ("perfect", "push_to_half", "push_to_extremes", "noisy_log_odds")

DEFAULT_SIGMA = 0.2


@dataclass(frozen=True)
class BaseModelSpec:
    """Which error profile to apply, with noise parameters where relevant.

    ``sigma`` and ``seed`` matter only for the ``noisy_log_odds`` kind and
    are ignored by the deterministic profiles.
    """

    kind: str
    sigma: float = DEFAULT_SIGMA
    seed: int = 0

    def __post_init__(self) -> None:
        if self.kind not in KINDS:
            raise ConfigurationError(
                f"unknown base model kind {self.kind!r}; expected one of {KINDS}"
            )
        if not self.sigma >= 0.0:
            raise ConfigurationError(f"sigma must be >= 0, got {self.sigma}")
        rng.check_seed(self.seed)


def _check_gamma(gamma: np.ndarray) -> None:
    if gamma.size and not ((gamma > 0.0) & (gamma < 1.0)).all():
        raise DomainError("gamma values must lie strictly in (0, 1)")


def perfect(gamma):
    """Error-free model: estimates equal the true conditional probability."""
    arr = np.asarray(gamma, dtype=float)
    _check_gamma(arr)
    return float(arr) if arr.ndim == 0 else arr.copy()


def scaled_logit(gamma, k: float = 10.0, m: float = 0.5):
    """Model whose estimates compress the log odds by ``k`` around center ``m``.

    Returns ``m + logit(gamma) / k`` without clipping, so outputs can fall
    outside [0, 1]. The defining relation ``gamma = expit(k * (out - m))``
    holds exactly: logistic regression of outcomes on these estimates has
    slope ``k``, which makes this profile the reference case for studying
    what an affine-in-γ̂ calibrator can and cannot recover.
    """
    if k <= 0:
        raise ConfigurationError(f"k must be > 0, got {k}")
    arr = np.asarray(gamma, dtype=float)
    _check_gamma(arr)
    out = m + logit(arr) / k
    return float(out) if out.ndim == 0 else out


def push_to_half(gamma):
    """Underconfident model: log odds shrunk tenfold, recentered at one half.

    Returns ``clip(0.5 + logit(gamma) / 10, 0, 1)``. Output saturates at
    exactly 0 or 1 once |logit(gamma)| exceeds 5; downstream consumers that
    take logits must clamp.
    """
    arr = np.asarray(gamma, dtype=float)
    _check_gamma(arr)
    out = np.clip(scaled_logit(arr), 0.0, 1.0)
    return float(out) if out.ndim == 0 else out


def push_to_extremes(gamma):
    """Overconfident model: probabilities pulled toward 0 and 1.

    Returns ``expit(10 * (gamma - 0.5))``, the exact inverse of
    :func:`push_to_half` wherever the latter does not clip. The range is
    (expit(-5), expit(5)), never exactly 0 or 1.
    """
    arr = np.asarray(gamma, dtype=float)
    _check_gamma(arr)
    out = expit(10.0 * (arr - 0.5))
    return float(out) if out.ndim == 0 else out


def noisy_log_odds(gamma, sigma: float, gen: np.random.Generator):
    """Model with additive Gaussian noise on the log-odds scale.

    Returns ``expit(logit(gamma) + eps)`` with ``eps ~ Normal(0, sigma^2)``
    drawn elementwise from ``gen``. Always strictly inside (0, 1). On the
    probability scale the noise is asymmetric: for small γ the average
    estimate exceeds γ.
    """
    if not sigma >= 0.0:
        raise ConfigurationError(f"sigma must be >= 0, got {sigma}")
    arr = np.asarray(gamma, dtype=float)
    _check_gamma(arr)
    eps = gen.normal(0.0, sigma, size=arr.shape)
    out = expit(logit(arr) + eps)
    return float(out) if out.ndim == 0 else out


def apply_base_model(
    gamma, spec: BaseModelSpec, gen: np.random.Generator | None = None
):
    """Run the profile named by ``spec`` over conditional probabilities.

    ``gen`` feeds the noisy profile only; when omitted, a fresh noise
    substream of ``spec.seed`` is used. Callers producing several datasets
    under one spec should pass distinct substreams to keep draws
    independent.
    """
    if spec.kind == "perfect":
        return perfect(gamma)
    if spec.kind == "push_to_half":
        return push_to_half(gamma)
    if spec.kind == "push_to_extremes":
        return push_to_extremes(gamma)
    if gen is None:
        gen = rng.substream(spec.seed, rng.NOISE)
    return noisy_log_odds(gamma, spec.sigma, gen)
