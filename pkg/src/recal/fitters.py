"""Numerical fitting engines shared by the calibration methods.

Three estimators, all deterministic for fixed inputs:

* logistic regression with a single predictor, fit by iteratively
  reweighted least squares (IRLS);
* isotonic regression by the pool-adjacent-violators algorithm (PAV);
* a penalized cubic-spline logistic additive model whose smoothing
  weight is selected by generalized cross-validation (GCV).

Fitted models are frozen dataclasses; prediction helpers live alongside.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.interpolate import BSpline
from scipy.linalg import LinAlgError, solve
from scipy.special import expit

from .errors import FitError

MAX_ITER = 100

DEVIANCE_RTOL = 1e-8

# Working IRLS weights mu*(1-mu) underflow near saturated probabilities;
# flooring keeps the weighted solve well-posed.
WEIGHT_FLOOR = 1e-10

# Beyond |beta| = 30 the fitted probabilities sit within 1e-13 of 0 or 1,
# so larger coefficients change nothing downstream; cap instead of
# diverging under quasi-separation.
COEF_CAP = 30.0

N_INTERIOR_KNOTS = 10

SPLINE_DEGREE = 3

LAMBDA_GRID = np.logspace(-6.0, 6.0, 25)


@dataclass(frozen=True)
class LogisticFit:
    """Intercept and slope of a one-predictor logistic regression."""

    beta0: float
    beta1: float
    converged: bool
    iterations: int
    final_deviance: float

    def __post_init__(self) -> None:
        if self.converged and not (
            np.isfinite(self.beta0) and np.isfinite(self.beta1)
        ):
            raise FitError("converged fit must carry finite coefficients")


@dataclass(eq=False)
class IsotonicFit:
    """Non-decreasing step function: block-start breakpoints and block values."""

    breakpoints: np.ndarray
    values: np.ndarray

    def __post_init__(self) -> None:
        if len(self.breakpoints) != len(self.values) or len(self.values) == 0:
            raise FitError("breakpoints and values must be non-empty, equal length")
        if np.any(np.diff(self.breakpoints) <= 0):
            raise FitError("breakpoints must be strictly ascending")
        if np.any(np.diff(self.values) < 0):
            raise FitError("step values must be non-decreasing")
        if self.values[0] < 0.0 or self.values[-1] > 1.0:
            raise FitError("step values must lie in [0, 1]")
        self.breakpoints.setflags(write=False)
        self.values.setflags(write=False)


@dataclass(eq=False)
class GamFit:
    """A fitted penalized-spline logistic curve.

    ``knots`` are the spline's quantile knots including both boundaries;
    ``lam`` is the smoothing weight chosen by GCV.
    """

    knots: np.ndarray
    spline_coefficients: np.ndarray
    lam: float
    basis_order: int
    converged: bool

    def __post_init__(self) -> None:
        if not self.lam > 0.0:
            raise FitError(f"lam must be > 0, got {self.lam}")
        expected = len(self.knots) + self.basis_order - 2
        if len(self.spline_coefficients) != expected:
            raise FitError(
                f"{len(self.knots)} knots at order {self.basis_order} need "
                f"{expected} coefficients, got {len(self.spline_coefficients)}"
            )
        if np.any(np.diff(self.knots) <= 0):
            raise FitError("knots must be strictly ascending")
        self.knots.setflags(write=False)
        self.spline_coefficients.setflags(write=False)


def bernoulli_deviance(eta: np.ndarray, y: np.ndarray) -> float:
    """Deviance of 0/1 outcomes under log-odds predictions ``eta``.

    Computed as ``2 * sum(log(1 + exp(eta)) - y * eta)`` using log-add-exp,
    which stays finite and accurate for |eta| in the hundreds.
    """
    return 2.0 * float(np.sum(np.logaddexp(0.0, eta) - y * eta))


def _as_binary(z, y) -> tuple[np.ndarray, np.ndarray]:
    z = np.asarray(z, dtype=float)
    y = np.asarray(y, dtype=float)
    if z.shape != y.shape or z.ndim != 1:
        raise FitError(f"z and y must be equal-length vectors, got {z.shape}, {y.shape}")
    if not np.isfinite(z).all():
        raise FitError("z contains non-finite values")
    if y.size and not np.isin(y, (0.0, 1.0)).all():
        raise FitError("y values must be 0 or 1")
    return z, y


def _require_both_classes(y: np.ndarray) -> None:
    if y.min() == y.max():
        raise FitError("both outcome classes must be present to fit")


def fit_logistic_irls(
    z,
    y,
    *,
    max_iter: int = MAX_ITER,
    tol: float = DEVIANCE_RTOL,
) -> LogisticFit:
    """Maximum-likelihood logistic regression of ``y`` on a single predictor.

    Starts from the intercept-only fit and iterates reweighted least
    squares with step halving, so deviance never increases. Convergence:
    ``|delta deviance| <= tol * (|deviance| + 0.1)``. Under
    quasi-separation the coefficients are capped at +/-30 and the fit is
    returned flagged as not converged.
    """
    z, y = _as_binary(z, y)
    if len(y) < 2:
        raise FitError(f"need at least 2 observations, got {len(y)}")
    _require_both_classes(y)

    x = np.column_stack([np.ones_like(z), z])
    mean_y = float(np.clip(y.mean(), WEIGHT_FLOOR, 1.0 - WEIGHT_FLOOR))
    beta = np.array([np.log(mean_y / (1.0 - mean_y)), 0.0])
    eta = x @ beta
    dev = bernoulli_deviance(eta, y)

    converged = False
    iterations = 0
    for _ in range(max_iter):
        iterations += 1
        mu = expit(eta)
        w = np.clip(mu * (1.0 - mu), WEIGHT_FLOOR, None)
        target = eta + (y - mu) / w
        a = x.T @ (w[:, None] * x)
        rhs = x.T @ (w * target)
        try:
            beta_new = np.linalg.solve(a, rhs)
        except np.linalg.LinAlgError as exc:
            raise FitError("singular working system; is z degenerate?") from exc
        if np.abs(beta_new).max() > COEF_CAP:
            beta = np.clip(beta_new, -COEF_CAP, COEF_CAP)
            dev = bernoulli_deviance(x @ beta, y)
            break
        eta_new = x @ beta_new
        dev_new = bernoulli_deviance(eta_new, y)
        halvings = 0
        while dev_new > dev and halvings < 30:
            beta_new = (beta_new + beta) / 2.0
            eta_new = x @ beta_new
            dev_new = bernoulli_deviance(eta_new, y)
            halvings += 1
        done = abs(dev - dev_new) <= tol * (abs(dev_new) + 0.1)
        beta, eta, dev = beta_new, eta_new, dev_new
        if done:
            converged = True
            break

    return LogisticFit(
        beta0=float(beta[0]),
        beta1=float(beta[1]),
        converged=converged,
        iterations=iterations,
        final_deviance=dev,
    )


def logistic_predict(fit: LogisticFit, z):
    """Fitted probabilities ``expit(beta0 + beta1 * z)``."""
    arr = np.asarray(z, dtype=float)
    out = expit(fit.beta0 + fit.beta1 * arr)
    return float(out) if out.ndim == 0 else out


def fit_pav(z, y) -> IsotonicFit:
    """Least-squares monotone non-decreasing step fit of ``y`` on ``z``.

    Identical ``z`` values are pooled first, so the result is a true
    function of ``z``; violating adjacent blocks are then merged until the
    block means are non-decreasing. Block means are formed as exact
    sum-over-count of the pooled outcomes, and merge comparisons use
    cross-multiplied integer sums, so the output is bit-reproducible and
    depends on ``z`` only through its ordering.
    """
    z, y = _as_binary(z, y)
    if len(y) == 0:
        raise FitError("cannot fit isotonic regression to empty data")

    order = np.argsort(z, kind="stable")
    z_sorted = z[order]
    y_sorted = y[order]
    unique_z, first_index = np.unique(z_sorted, return_index=True)
    group_sums = np.add.reduceat(y_sorted, first_index)
    group_counts = np.diff(np.append(first_index, len(y_sorted))).astype(float)

    # Stack-based merge: pool while the previous block mean is not below
    # the current one. sums and counts are integer-valued, so the
    # cross-multiplication test is exact.
    starts: list[int] = []
    sums: list[float] = []
    counts: list[float] = []
    for i, (s, c) in enumerate(zip(group_sums, group_counts)):
        start = i
        while sums and sums[-1] * c >= s * counts[-1]:
            s += sums.pop()
            c += counts.pop()
            start = starts.pop()
        starts.append(start)
        sums.append(s)
        counts.append(c)

    return IsotonicFit(
        breakpoints=unique_z[starts],
        values=np.array(sums) / np.array(counts),
    )


def pav_predict(fit: IsotonicFit, z):
    """Right-continuous step lookup: inputs below the first breakpoint get
    the first value, at or above a breakpoint the value of its block."""
    arr = np.asarray(z, dtype=float)
    idx = np.searchsorted(fit.breakpoints, arr, side="right") - 1
    out = fit.values[np.clip(idx, 0, None)]
    return float(out) if out.ndim == 0 else out


def _augmented_knots(knots: np.ndarray) -> np.ndarray:
    d = SPLINE_DEGREE
    return np.concatenate([[knots[0]] * d, knots, [knots[-1]] * d])


def _greville(aug_knots: np.ndarray) -> np.ndarray:
    d = SPLINE_DEGREE
    n_basis = len(aug_knots) - d - 1
    return np.array([aug_knots[i + 1 : i + d + 1].mean() for i in range(n_basis)])


def _curvature_penalty(sites: np.ndarray) -> np.ndarray:
    """Squared second-difference penalty matrix over coefficient sites.

    Differences are divided by the (uneven) spacing of the sites, so the
    penalty vanishes exactly on coefficient vectors that are affine in the
    site positions. With clamped boundary knots the sites near the edges
    are unevenly spaced, and plain undivided differences would penalize
    straight-line fits there.
    """
    m = len(sites)
    d2 = np.zeros((m - 2, m))
    for i in range(1, m - 1):
        left = sites[i] - sites[i - 1]
        right = sites[i + 1] - sites[i]
        d2[i - 1, i - 1] = 2.0 / (left * (left + right))
        d2[i - 1, i] = -2.0 / (left * right)
        d2[i - 1, i + 1] = 2.0 / (right * (left + right))
    return d2.T @ d2


def build_spline_basis(z, knots):
    """Cubic B-spline design matrix of ``z`` over clamped ``knots``.

    Returns a sparse n x (len(knots) + 2) matrix in CSR form. Inputs are
    clipped to the knot range before evaluation. Rows sum to 1 and entries
    lie in [0, 1].
    """
    z = np.asarray(z, dtype=float)
    knots = np.asarray(knots, dtype=float)
    if len(np.unique(z)) < 4:
        raise FitError("need at least 4 distinct z values for a cubic basis")
    if len(knots) < 2 or np.any(np.diff(knots) <= 0):
        raise FitError("knots must be at least 2 strictly ascending values")
    aug = _augmented_knots(knots)
    clipped = np.clip(z, knots[0], knots[-1])
    return BSpline.design_matrix(clipped, aug, SPLINE_DEGREE)


def fit_penalized_gam(
    z,
    y,
    *,
    n_interior_knots: int = N_INTERIOR_KNOTS,
    lambda_grid=None,
    max_iter: int = MAX_ITER,
    tol: float = DEVIANCE_RTOL,
) -> GamFit:
    """Penalized-spline logistic fit of ``y`` on one predictor.

    The curve is a cubic B-spline over quantile knots of ``z``. Each
    candidate smoothing weight ``lam`` is fit by penalized IRLS with step
    halving, warm-started from the plain logistic fit; the returned fit
    minimizes the GCV score ``n * deviance / (n - edf)^2``. The grid is
    scanned in ascending order keeping strict improvements only, so exact
    ties resolve to the smallest weight.

    Raises FitError if fewer than 50 observations, one outcome class, or
    no grid point converges.
    """
    z, y = _as_binary(z, y)
    n = len(y)
    if n < 50:
        raise FitError(f"need at least 50 observations, got {n}")
    _require_both_classes(y)

    knots = np.unique(np.quantile(z, np.linspace(0.0, 1.0, n_interior_knots + 2)))
    if len(knots) < 2:
        raise FitError("z is constant; cannot place spline knots")
    basis = build_spline_basis(z, knots)
    sites = _greville(_augmented_knots(knots))
    penalty = _curvature_penalty(sites)

    affine = fit_logistic_irls(z, y, max_iter=max_iter, tol=tol)
    coef_start = affine.beta0 + affine.beta1 * sites

    if lambda_grid is None:
        lambda_grid = LAMBDA_GRID
    grid = np.sort(np.asarray(lambda_grid, dtype=float))
    if len(grid) == 0 or grid[0] <= 0.0:
        raise FitError("lambda grid must be non-empty and strictly positive")

    best_gcv = np.inf
    best: tuple[float, np.ndarray] | None = None
    failures: list[float] = []
    for lam in grid:
        coef = coef_start.copy()
        eta = basis @ coef
        dev = bernoulli_deviance(eta, y)
        converged = False
        gram = None
        for _ in range(max_iter):
            mu = expit(eta)
            w = np.clip(mu * (1.0 - mu), WEIGHT_FLOOR, None)
            target = eta + (y - mu) / w
            weighted = basis.multiply(w[:, None]).tocsr()
            gram = (basis.T @ weighted).toarray()
            rhs = basis.T @ (w * target)
            try:
                coef_new = solve(gram + lam * penalty, rhs, assume_a="pos")
            except LinAlgError:
                break
            eta_new = basis @ coef_new
            dev_new = bernoulli_deviance(eta_new, y)
            halvings = 0
            while dev_new > dev and halvings < 30:
                coef_new = (coef_new + coef) / 2.0
                eta_new = basis @ coef_new
                dev_new = bernoulli_deviance(eta_new, y)
                halvings += 1
            done = abs(dev - dev_new) <= tol * (abs(dev_new) + 0.1)
            coef, eta, dev = coef_new, eta_new, dev_new
            if done:
                converged = True
                break
        if not converged or gram is None:
            failures.append(float(lam))
            continue
        edf = float(np.trace(solve(gram + lam * penalty, gram, assume_a="pos")))
        gcv = n * dev / (n - edf) ** 2
        if gcv < best_gcv:
            best_gcv = gcv
            best = (float(lam), coef.copy())

    if best is None:
        raise FitError(
            f"no smoothing weight converged on {n} observations; "
            f"tried {len(grid)} values, all failed: {failures}"
        )
    lam, coef = best
    return GamFit(
        knots=knots,
        spline_coefficients=coef,
        lam=lam,
        basis_order=SPLINE_DEGREE + 1,
        converged=True,
    )


def gam_eta(fit: GamFit, z):
    """Spline value at ``z`` on the log-odds scale.

    Inside the knot range this is the fitted B-spline; beyond it, the
    curve continues linearly with the boundary slope, which keeps
    predictions monotone where the boundary is and avoids polynomial
    blow-up.
    """
    arr = np.asarray(z, dtype=float)
    aug = _augmented_knots(fit.knots)
    spline = BSpline(aug, fit.spline_coefficients, fit.basis_order - 1)
    lo, hi = fit.knots[0], fit.knots[-1]
    eta = spline(np.clip(arr, lo, hi))
    deriv = spline.derivative()
    eta = eta + np.where(arr < lo, (arr - lo) * float(deriv(lo)), 0.0)
    eta = eta + np.where(arr > hi, (arr - hi) * float(deriv(hi)), 0.0)
    return float(eta) if eta.ndim == 0 else eta


def gam_predict(fit: GamFit, z):
    """Fitted probabilities ``expit(gam_eta(fit, z))``."""
    out = expit(gam_eta(fit, z))
    return float(out) if np.ndim(out) == 0 else out
