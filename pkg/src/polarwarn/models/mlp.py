"""Single-hidden-layer perceptron trained by limited-memory quasi-Newton steps.

tanh hidden units, a sigmoid output unit, mean cross-entropy loss with a
light L2 penalty on the weight matrices.  Initialization is seeded and the
optimizer is full-batch, so training is bit-reproducible.
"""

from __future__ import annotations

import numpy as np

from .linear import sigmoid
from .optim import lbfgs


def _unpack(theta: np.ndarray, d: int, h: int):
    i = 0
    w1 = theta[i : i + d * h].reshape(d, h)
    i += d * h
    b1 = theta[i : i + h]
    i += h
    w2 = theta[i : i + h]
    i += h
    b2 = theta[i]
    return w1, b1, w2, b2


def nn_loss_grad(theta: np.ndarray, X: np.ndarray, y: np.ndarray, h: int, reg: float):
    """Loss and analytic gradient for the packed parameter vector."""
    n, d = X.shape
    w1, b1, w2, b2 = _unpack(theta, d, h)
    pre = X @ w1 + b1
    a = np.tanh(pre)
    z = a @ w2 + b2
    loss = float(
        np.mean(np.logaddexp(0.0, z) - y * z)
        + reg * (np.sum(w1 * w1) + np.sum(w2 * w2)) / (2 * n)
    )
    p = sigmoid(z)
    dz = (p - y) / n
    gw2 = a.T @ dz + reg * w2 / n
    gb2 = float(np.sum(dz))
    da = np.outer(dz, w2)
    dpre = da * (1.0 - a * a)
    gw1 = X.T @ dpre + reg * w1 / n
    gb1 = dpre.sum(axis=0)
    grad = np.concatenate([gw1.ravel(), gb1, gw2, [gb2]])
    return loss, grad


def init_params(d: int, h: int, seed: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    s1 = np.sqrt(6.0 / (d + h))
    s2 = np.sqrt(6.0 / (h + 1))
    w1 = rng.uniform(-s1, s1, size=(d, h))
    w2 = rng.uniform(-s2, s2, size=h)
    return np.concatenate([w1.ravel(), np.zeros(h), w2, [0.0]])


def fit_nn(X: np.ndarray, y: np.ndarray, hp: dict, seed: int) -> dict:
    h = int(hp["hidden_size"])
    reg = float(hp["regularization"])
    theta0 = init_params(X.shape[1], h, seed)
    theta, n_iter, converged = lbfgs(
        lambda t: nn_loss_grad(t, X, y, h, reg),
        theta0,
        max_iter=int(hp["max_iter"]),
        tol=float(hp["tol"]),
    )
    w1, b1, w2, b2 = _unpack(theta, X.shape[1], h)
    return {
        "w1": w1,
        "b1": b1,
        "w2": w2,
        "b2": float(b2),
        "n_iter": int(n_iter),
        "converged": bool(converged),
    }


def score_nn(params: dict, X: np.ndarray) -> np.ndarray:
    a = np.tanh(X @ params["w1"] + params["b1"])
    return sigmoid(a @ params["w2"] + params["b2"])
