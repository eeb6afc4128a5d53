"""Gaussian-process regression for the surrogate model.

Matern-5/2 kernel with per-dimension (ARD) length-scales and a fixed
observation jitter of 1e-6, fitted on min-max encoded inputs against
standardized scores.  Hyperparameters are chosen by gradient-free
(Powell) maximization of the log marginal likelihood from a small set
of fixed starts, so fitting is deterministic.
"""

from __future__ import annotations

import numpy as np
from scipy import optimize
from scipy.linalg import cho_factor, cho_solve, solve_triangular
from scipy.stats import norm

JITTER = 1e-6

_SQRT5 = np.sqrt(5.0)


def matern52(X1: np.ndarray, X2: np.ndarray, lengthscales: np.ndarray, signal_var: float) -> np.ndarray:
    """Matern-5/2 covariance between two point sets, ARD length-scales."""
    d = (X1[:, None, :] - X2[None, :, :]) / lengthscales
    r = np.sqrt(np.sum(d * d, axis=-1))
    return signal_var * (1.0 + _SQRT5 * r + 5.0 / 3.0 * r * r) * np.exp(-_SQRT5 * r)


class GaussianProcess:
    """Posterior over a scalar objective, query with :meth:`predict`."""

    def __init__(self, X, z, lengthscales, signal_var, y_mean, y_std):
        self.X = X
        self.z = z
        self.lengthscales = lengthscales
        self.signal_var = signal_var
        self.y_mean = y_mean
        self.y_std = y_std
        K = matern52(X, X, lengthscales, signal_var) + JITTER * np.eye(len(X))
        self._chol = cho_factor(K, lower=True)
        self._alpha = cho_solve(self._chol, z)

    def predict(self, Xq: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Posterior mean and (noise-free) variance in score units."""
        Xq = np.atleast_2d(np.asarray(Xq, dtype=float))
        k_star = matern52(Xq, self.X, self.lengthscales, self.signal_var)
        mean_z = k_star @ self._alpha
        v = solve_triangular(self._chol[0], k_star.T, lower=True)
        var_z = np.maximum(self.signal_var - np.sum(v * v, axis=0), 0.0)
        return mean_z * self.y_std + self.y_mean, var_z * self.y_std**2


def _neg_log_marginal_likelihood(log_params: np.ndarray, X: np.ndarray, z: np.ndarray) -> float:
    lengthscales = np.exp(log_params[:-1])
    signal_var = np.exp(2.0 * log_params[-1])
    K = matern52(X, X, lengthscales, signal_var) + JITTER * np.eye(len(X))
    try:
        chol = cho_factor(K, lower=True)
    except np.linalg.LinAlgError:
        return np.inf
    alpha = cho_solve(chol, z)
    log_det = 2.0 * np.sum(np.log(np.diag(chol[0])))
    return float(0.5 * z @ alpha + 0.5 * log_det + 0.5 * len(z) * np.log(2.0 * np.pi))


def fit_gp(X: np.ndarray, y: np.ndarray) -> GaussianProcess:
    """Fit a GP to encoded inputs X (n, d) and raw scores y (n,).

    Scores are standardized internally; all-identical scores fall back
    to unit spread so the fit degrades to the constant mean instead of
    failing.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    if X.ndim != 2 or len(X) != len(y):
        raise ValueError(f"need matching (n, d) inputs and (n,) scores, got {X.shape}, {y.shape}")
    if len(X) < 2:
        raise ValueError(f"need at least 2 observations to fit, got {len(X)}")
    if not np.all(np.isfinite(y)):
        raise ValueError("scores must be finite")

    y_mean = float(np.mean(y))
    y_std = float(np.std(y))
    if y_std < 1e-12:
        y_std = 1.0
    z = (y - y_mean) / y_std

    d = X.shape[1]
    bounds = [(np.log(1e-2), np.log(1e2))] * d + [(np.log(1e-3), np.log(1e1))]
    best_params, best_nll = None, np.inf
    for ell0 in (0.1, 0.5, 2.0):
        x0 = np.log(np.full(d + 1, ell0))
        x0[-1] = 0.0
        res = optimize.minimize(
            _neg_log_marginal_likelihood,
            x0,
            args=(X, z),
            method="Powell",
            bounds=bounds,
            options={"maxfev": 600, "xtol": 1e-4, "ftol": 1e-6},
        )
        if res.fun < best_nll:
            best_nll, best_params = res.fun, res.x
    lengthscales = np.exp(best_params[:-1])
    signal_var = float(np.exp(2.0 * best_params[-1]))
    return GaussianProcess(X, z, lengthscales, signal_var, y_mean, y_std)


def expected_improvement(mean, std, best) -> np.ndarray:
    """EI of a minimization objective under a Gaussian posterior.

    Vanishes (exactly zero) wherever the posterior is effectively
    deterministic, including at already-observed optima.
    """
    mean = np.asarray(mean, dtype=float)
    std = np.asarray(std, dtype=float)
    active = std > 1e-12
    u = np.where(active, (best - mean) / np.where(active, std, 1.0), 0.0)
    ei = np.where(active, (best - mean) * norm.cdf(u) + std * norm.pdf(u), 0.0)
    return np.maximum(ei, 0.0)
