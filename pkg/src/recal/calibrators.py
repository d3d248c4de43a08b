"""The six calibration methods, behind one fit/predict/serialize surface.

Each method maps a base model's estimate γ̂ to a calibrated probability:

* ``analytical``: closed-form inverse of the undersampling shift; needs
  only the negative-retention rate pi0, no fitting data.
* ``platt``: logistic regression on γ̂.
* ``platt_logit``: logistic regression on logit(γ̂).
* ``gam``: penalized-spline logistic curve on γ̂.
* ``gam_logit``: penalized-spline logistic curve on logit(γ̂).
* ``isotonic``: monotone step function on γ̂.

The logit-input variants clamp γ̂ away from 0 and 1 before transforming,
since saturating base models can emit exact endpoints.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, DomainError, IngestionError
from .fitters import (
    GamFit,
    IsotonicFit,
    LogisticFit,
    fit_logistic_irls,
    fit_pav,
    fit_penalized_gam,
    gam_predict,
    logistic_predict,
    pav_predict,
)

METHODS = ("analytical", "platt", "platt_logit", "gam", "gam_logit", "isotonic")

# Clamp for the logit transform of γ̂. Deliberately distinct from the
# metric clamp (1e-5): this one shapes the calibrator's input, that one
# bounds scores.
CLAMP_EPSILON = 1e-6

_SERIAL_VERSION = 1

_PARAM_TYPES = {
    "analytical": float,
    "platt": LogisticFit,
    "platt_logit": LogisticFit,
    "gam": GamFit,
    "gam_logit": GamFit,
    "isotonic": IsotonicFit,
}


def _check_pi0(pi0) -> float:
    try:
        pi0 = float(pi0)
    except (TypeError, ValueError):
        raise DomainError(f"pi0 must be a real number, got {pi0!r}") from None
    if not 0.0 < pi0 <= 1.0:
        raise DomainError(f"pi0 must lie in (0, 1], got {pi0}")
    return pi0


def analytical_calibrate(gamma_hat, pi0: float):
    """Exact correction of an undersampling-shifted probability.

    Returns ``g * pi0 / (1 - g + g * pi0)`` for ``g`` in [0, 1]. This
    inverts the shift induced by keeping negatives with probability
    ``pi0``: composing with that shift recovers the original probability
    to floating precision. Fixed points are exactly 0 and 1, and
    ``pi0 = 1`` gives the identity.
    """
    _check_pi0(pi0)
    g = np.asarray(gamma_hat, dtype=float)
    if g.size and not ((g >= 0.0) & (g <= 1.0)).all():
        raise DomainError("gamma_hat values must lie in [0, 1]")
    out = g * pi0 / (1.0 - g + g * pi0)
    return float(out) if out.ndim == 0 else out


def logit_clamped(gamma_hat, epsilon: float = CLAMP_EPSILON):
    """Log odds of γ̂ after clamping it to [epsilon, 1 - epsilon].

    Saturating base models emit exact 0/1; clamping keeps the transform
    finite while preserving order.
    """
    if not 0.0 < epsilon < 0.5:
        raise ConfigurationError(f"epsilon must lie in (0, 0.5), got {epsilon}")
    g = np.clip(np.asarray(gamma_hat, dtype=float), epsilon, 1.0 - epsilon)
    out = np.log(g / (1.0 - g))
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class Calibrator:
    """A fitted calibration map: method name plus that method's parameters.

    ``params`` holds pi0 for the analytical method and the corresponding
    fit record otherwise. Immutable; predictions are pure.
    """

    method: str
    params: float | LogisticFit | GamFit | IsotonicFit
    clamp_epsilon: float = CLAMP_EPSILON

    def __post_init__(self) -> None:
        if self.method not in METHODS:
            raise ConfigurationError(
                f"unknown method {self.method!r}; expected one of {METHODS}"
            )
        if not 0.0 < self.clamp_epsilon < 0.01:
            raise ConfigurationError(
                f"clamp_epsilon must lie in (0, 0.01), got {self.clamp_epsilon}"
            )
        expected = _PARAM_TYPES[self.method]
        if not isinstance(self.params, expected):
            raise ConfigurationError(
                f"{self.method} requires {expected.__name__} params, "
                f"got {type(self.params).__name__}"
            )
        if self.method == "analytical":
            _check_pi0(self.params)


def fit_calibrator(
    method: str,
    gamma_hats=None,
    y=None,
    pi0: float | None = None,
    *,
    clamp_epsilon: float = CLAMP_EPSILON,
) -> Calibrator:
    """Fit one calibration method on base-model estimates and outcomes.

    The analytical method ignores ``(gamma_hats, y)`` and stores ``pi0``;
    every other method requires both arrays and fits its underlying model,
    transforming γ̂ to log odds first for the ``*_logit`` variants. Fitting
    inputs are not range-restricted: hypothetical base models may emit
    values outside [0, 1] and the model-based methods handle them as-is.
    """
    if method not in METHODS:
        raise ConfigurationError(
            f"unknown method {method!r}; expected one of {METHODS}"
        )
    if method == "analytical":
        if pi0 is None:
            raise DomainError(
                "the analytical method requires the negative-retention rate pi0"
            )
        return Calibrator(
            "analytical", _check_pi0(pi0), clamp_epsilon=clamp_epsilon
        )
    if gamma_hats is None or y is None:
        raise ConfigurationError(f"method {method} requires gamma_hats and y")
    z = np.asarray(gamma_hats, dtype=float)
    if method in ("platt_logit", "gam_logit"):
        z = logit_clamped(z, clamp_epsilon)
    if method in ("platt", "platt_logit"):
        params = fit_logistic_irls(z, y)
    elif method in ("gam", "gam_logit"):
        params = fit_penalized_gam(z, y)
    else:
        params = fit_pav(z, y)
    return Calibrator(method, params, clamp_epsilon=clamp_epsilon)


def calibrate(cal: Calibrator, gamma_hat):
    """Calibrated probability estimate(s) for base-model output ``gamma_hat``.

    Applies the method's transform and fitted map; outputs lie in [0, 1]
    for all methods and strictly inside (0, 1) for the logistic and spline
    families.
    """
    if cal.method == "analytical":
        return analytical_calibrate(gamma_hat, cal.params)
    z = np.asarray(gamma_hat, dtype=float)
    if cal.method in ("platt_logit", "gam_logit"):
        z = logit_clamped(z, cal.clamp_epsilon)
    if cal.method in ("platt", "platt_logit"):
        return logistic_predict(cal.params, z)
    if cal.method in ("gam", "gam_logit"):
        return gam_predict(cal.params, z)
    return pav_predict(cal.params, z)


def to_json(cal: Calibrator) -> str:
    """Serialize a fitted calibrator to a JSON document.

    Reals survive the round trip bit-exactly, so a reloaded calibrator
    predicts identically.
    """
    p = cal.params
    if cal.method == "analytical":
        params = {"pi0": p}
    elif isinstance(p, LogisticFit):
        params = {
            "beta0": p.beta0,
            "beta1": p.beta1,
            "converged": p.converged,
            "iterations": p.iterations,
            "final_deviance": p.final_deviance,
        }
    elif isinstance(p, GamFit):
        params = {
            "knots": p.knots.tolist(),
            "spline_coefficients": p.spline_coefficients.tolist(),
            "lam": p.lam,
            "basis_order": p.basis_order,
            "converged": p.converged,
        }
    else:
        params = {"breakpoints": p.breakpoints.tolist(), "values": p.values.tolist()}
    return json.dumps(
        {
            "method": cal.method,
            "params": params,
            "clamp_epsilon": cal.clamp_epsilon,
            "version": _SERIAL_VERSION,
        }
    )


def from_json(text: str) -> Calibrator:
    """Rebuild a calibrator from its JSON document."""
    try:
        doc = json.loads(text)
        version = doc["version"]
        if version != _SERIAL_VERSION:
            raise IngestionError(f"unsupported calibrator version {version!r}")
        method = doc["method"]
        raw = doc["params"]
        if method == "analytical":
            params = float(raw["pi0"])
        elif method in ("platt", "platt_logit"):
            params = LogisticFit(
                beta0=float(raw["beta0"]),
                beta1=float(raw["beta1"]),
                converged=bool(raw["converged"]),
                iterations=int(raw["iterations"]),
                final_deviance=float(raw["final_deviance"]),
            )
        elif method in ("gam", "gam_logit"):
            params = GamFit(
                knots=np.asarray(raw["knots"], dtype=float),
                spline_coefficients=np.asarray(
                    raw["spline_coefficients"], dtype=float
                ),
                lam=float(raw["lam"]),
                basis_order=int(raw["basis_order"]),
                converged=bool(raw["converged"]),
            )
        elif method == "isotonic":
            params = IsotonicFit(
                breakpoints=np.asarray(raw["breakpoints"], dtype=float),
                values=np.asarray(raw["values"], dtype=float),
            )
        else:
            raise IngestionError(f"unknown method {method!r} in document")
        return Calibrator(
            method, params, clamp_epsilon=float(doc["clamp_epsilon"])
        )
    except IngestionError:
        raise
    except (KeyError, TypeError, ValueError, json.JSONDecodeError) as exc:
        raise IngestionError(f"malformed calibrator document: {exc}") from exc
