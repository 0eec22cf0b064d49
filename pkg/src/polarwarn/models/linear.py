"""Linear-family models: least squares, logistic regression, linear SVM."""

from __future__ import annotations

import numpy as np

from .optim import gradient_descent


def _with_intercept(X: np.ndarray) -> np.ndarray:
    return np.hstack([X, np.ones((X.shape[0], 1))])


def score_linear(params: dict, X: np.ndarray) -> np.ndarray:
    return X @ np.asarray(params["weights"]) + params["bias"]


def sigmoid(z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z, dtype=float)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def score_log(params: dict, X: np.ndarray) -> np.ndarray:
    return sigmoid(score_linear(params, X))


def fit_lin(X: np.ndarray, y: np.ndarray) -> dict:
    """Least squares on the 0/1 labels; raw output is the ranking score."""
    theta, *_ = np.linalg.lstsq(_with_intercept(X), y, rcond=None)
    return {"weights": theta[:-1], "bias": float(theta[-1])}


def log_loss_grad(theta: np.ndarray, X: np.ndarray, y: np.ndarray, reg: float):
    """Mean cross-entropy with an L2 penalty on the weights (bias excluded)."""
    n, d = X.shape
    w, b = theta[:d], theta[d]
    z = X @ w + b
    # softplus(z) - y*z is the stable per-row cross entropy
    loss = float(np.mean(np.logaddexp(0.0, z) - y * z) + reg * (w @ w) / (2 * n))
    p = sigmoid(z)
    gw = X.T @ (p - y) / n + reg * w / n
    gb = float(np.mean(p - y))
    return loss, np.concatenate([gw, [gb]])


def fit_log(X: np.ndarray, y: np.ndarray, hp: dict) -> dict:
    """Regularized maximum likelihood by full-batch descent with backtracking."""
    reg = float(hp["regularization"])
    theta0 = np.zeros(X.shape[1] + 1)
    theta, n_iter, converged = gradient_descent(
        lambda t: log_loss_grad(t, X, y, reg),
        theta0,
        max_iter=int(hp["max_iter"]),
        tol=float(hp["tol"]),
    )
    return {
        "weights": theta[:-1],
        "bias": float(theta[-1]),
        "n_iter": int(n_iter),
        "converged": bool(converged),
    }


def fit_svm(X: np.ndarray, y: np.ndarray, hp: dict) -> dict:
    """L2-regularized hinge loss via deterministic full-batch subgradient steps."""
    reg = float(hp["regularization"])
    max_iter = int(hp["max_iter"])
    n, d = X.shape
    y_pm = 2.0 * y - 1.0
    w = np.zeros(d)
    b = 0.0
    for t in range(max_iter):
        margins = y_pm * (X @ w + b)
        viol = margins < 1.0
        gw = reg * w - (X[viol].T @ y_pm[viol]) / n
        gb = -float(np.sum(y_pm[viol])) / n
        eta = 1.0 / (reg * (t + 1))
        w -= eta * gw
        b -= eta * gb
    return {"weights": w, "bias": float(b)}
