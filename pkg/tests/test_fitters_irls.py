import numpy as np
import pytest
from scipy.special import expit

from recal.errors import FitError
from recal.fitters import (
    LogisticFit,
    bernoulli_deviance,
    fit_logistic_irls,
    logistic_predict,
)


def _gd_mle(z, y, tol=1e-10, max_iter=500_000):
    """Independent MLE oracle: Nesterov-accelerated full-batch gradient
    descent on the mean negative log-likelihood, restarted on non-descent."""
    n = len(y)
    x = np.column_stack([np.ones_like(z), z])
    lipschitz = np.linalg.eigvalsh(x.T @ x / (4.0 * n)).max()
    step = 1.0 / lipschitz

    def grad(b):
        return x.T @ (expit(x @ b) - y) / n

    def mean_nll(b):
        eta = x @ b
        return float(np.mean(np.logaddexp(0.0, eta) - y * eta))

    beta = np.zeros(2)
    vel = beta.copy()
    momentum = 1.0
    f_prev = mean_nll(beta)
    for _ in range(max_iter):
        beta_new = vel - step * grad(vel)
        momentum_new = (1.0 + np.sqrt(1.0 + 4.0 * momentum**2)) / 2.0
        vel = beta_new + (momentum - 1.0) / momentum_new * (beta_new - beta)
        f_new = mean_nll(beta_new)
        if f_new > f_prev:
            vel = beta_new
            momentum_new = 1.0
        beta, momentum, f_prev = beta_new, momentum_new, f_new
        if np.abs(grad(beta)).max() < tol:
            break
    return beta


def test_independent_outcome_gives_null_slope():
    gen = np.random.default_rng(100)
    n = 100_000
    z = gen.uniform(0.0, 1.0, n)
    y = (gen.random(n) < 0.3).astype(float)
    fit = fit_logistic_irls(z, y)
    assert fit.converged
    # standard errors from the Fisher information at the fit
    x = np.column_stack([np.ones(n), z])
    mu = logistic_predict(fit, z)
    info = x.T @ (x * (mu * (1.0 - mu))[:, None])
    se = np.sqrt(np.diag(np.linalg.inv(info)))
    assert abs(fit.beta1) <= 3.0 * se[1]
    assert abs(fit.beta0 - np.log(0.3 / 0.7)) <= 3.0 * se[0]
    # intercept score equation: mean fitted probability equals the outcome rate
    assert mu.mean() == pytest.approx(y.mean(), abs=1e-10)


def test_recovers_known_coefficients():
    gen = np.random.default_rng(7)
    n = 500_000
    z = gen.uniform(0.05, 0.95, n)
    true_b0, true_b1 = -7.0794, 10.0
    y = (gen.random(n) < expit(true_b0 + true_b1 * z)).astype(float)
    fit = fit_logistic_irls(z, y)
    assert fit.converged
    assert fit.beta0 == pytest.approx(true_b0, rel=0.05)
    assert fit.beta1 == pytest.approx(true_b1, rel=0.05)


def test_matches_gradient_descent_oracle():
    gen = np.random.default_rng(55)
    for _ in range(5):
        z = gen.uniform(-1.0, 1.0, 800)
        b0 = gen.uniform(-2.0, 1.0)
        b1 = gen.uniform(-3.0, 3.0)
        y = (gen.random(800) < expit(b0 + b1 * z)).astype(float)
        fit = fit_logistic_irls(z, y)
        oracle = _gd_mle(z, y)
        assert fit.beta0 == pytest.approx(oracle[0], abs=1e-4)
        assert fit.beta1 == pytest.approx(oracle[1], abs=1e-4)


def test_deviance_never_increases_across_iterations():
    gen = np.random.default_rng(3)
    z = gen.uniform(0.0, 1.0, 400)
    y = (gen.random(400) < expit(-1.0 + 2.0 * z)).astype(float)
    devs = [
        fit_logistic_irls(z, y, max_iter=k).final_deviance for k in range(1, 12)
    ]
    assert all(b <= a + 1e-9 for a, b in zip(devs, devs[1:]))


def test_deviance_helper_matches_direct_formula():
    eta = np.array([-2.0, 0.0, 1.5])
    y = np.array([0.0, 1.0, 1.0])
    mu = expit(eta)
    direct = -2.0 * np.sum(y * np.log(mu) + (1.0 - y) * np.log(1.0 - mu))
    assert bernoulli_deviance(eta, y) == pytest.approx(direct, rel=1e-12)
    # stays finite far beyond where exp overflows
    assert np.isfinite(bernoulli_deviance(np.array([800.0]), np.array([0.0])))


def test_perfectly_separated_margin_fit_saturates():
    z = np.array([-2.0, -1.0, 1.0, 2.0])
    y = np.array([0.0, 0.0, 1.0, 1.0])
    fit = fit_logistic_irls(z, y)
    p = logistic_predict(fit, z)
    assert np.all(np.abs(p - y) < 1e-3)


def test_quasi_separation_caps_coefficients():
    gen = np.random.default_rng(1)
    z = np.concatenate([gen.uniform(-3, -0.5, 200), gen.uniform(0.5, 3, 200)])
    y = (z > 0).astype(float)
    fit = fit_logistic_irls(z, y)
    assert not fit.converged
    assert max(abs(fit.beta0), abs(fit.beta1)) == 30.0
    assert np.isfinite(fit.final_deviance)


def test_input_validation():
    with pytest.raises(FitError):
        fit_logistic_irls([0.1], [1.0])
    with pytest.raises(FitError):
        fit_logistic_irls([0.1, 0.2, 0.3], [1.0, 1.0, 1.0])
    with pytest.raises(FitError):
        fit_logistic_irls([0.1, 0.2], [0.0, 2.0])
    with pytest.raises(FitError):
        fit_logistic_irls([0.1, 0.2, 0.3], [0.0, 1.0])
    with pytest.raises(FitError):
        fit_logistic_irls([0.1, np.nan, 0.3], [0.0, 1.0, 0.0])


def test_constant_predictor_is_degenerate():
    # the working system is singular along a ridge; the fit either errors
    # out or lands on a degenerate solution predicting the base rate
    z = np.full(100, 0.4)
    y = np.r_[np.zeros(50), np.ones(50)]
    try:
        fit = fit_logistic_irls(z, y)
    except FitError:
        return
    assert np.allclose(logistic_predict(fit, z), y.mean(), atol=1e-6)


def test_null_model_predicts_half_everywhere():
    fit = LogisticFit(
        beta0=0.0, beta1=0.0, converged=True, iterations=1, final_deviance=1.0
    )
    assert logistic_predict(fit, 0.123) == 0.5
    assert np.all(logistic_predict(fit, np.linspace(-5, 5, 7)) == 0.5)


def test_converged_fit_requires_finite_coefficients():
    with pytest.raises(FitError):
        LogisticFit(
            beta0=np.inf, beta1=1.0, converged=True, iterations=3, final_deviance=1.0
        )
