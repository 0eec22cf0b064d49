"""Greedy binary decision tree split on Gini impurity.

A node splits whenever it is impure, the depth budget allows it, and some
feature still separates the rows under the leaf-size floor; the split with
the lowest child-weighted Gini wins, ties going to the lowest feature index
and then the lowest threshold.  Splitting on zero Gini gain is allowed,
which is what lets XOR-style patterns resolve at depth 2.
"""

from __future__ import annotations

import numpy as np


def gini(counts_pos: float, total: float) -> float:
    if total == 0:
        return 0.0
    p = counts_pos / total
    return 1.0 - p * p - (1.0 - p) * (1.0 - p)


def _best_split(X: np.ndarray, y: np.ndarray, min_leaf: int):
    """Lowest child-weighted Gini over all (feature, midpoint) candidates."""
    n = X.shape[0]
    total_pos = float(np.sum(y))
    best = None  # (weighted_gini, feature, threshold)
    for j in range(X.shape[1]):
        order = np.argsort(X[:, j], kind="stable")
        xs = X[order, j]
        pos = np.cumsum(y[order])
        left_sizes = np.arange(1, n)
        valid = (xs[:-1] < xs[1:]) & (left_sizes >= min_leaf) & (n - left_sizes >= min_leaf)
        if not np.any(valid):
            continue
        lp = pos[:-1]
        rp = total_pos - lp
        ln = left_sizes.astype(float)
        rn = (n - left_sizes).astype(float)
        g_left = 1.0 - (lp / ln) ** 2 - (1.0 - lp / ln) ** 2
        g_right = 1.0 - (rp / rn) ** 2 - (1.0 - rp / rn) ** 2
        weighted = (ln * g_left + rn * g_right) / n
        weighted = np.where(valid, weighted, np.inf)
        i = int(np.argmin(weighted))  # first minimum = lowest threshold
        if np.isfinite(weighted[i]) and (best is None or weighted[i] < best[0]):
            best = (float(weighted[i]), j, float((xs[i] + xs[i + 1]) / 2.0))
    return best


def _grow(X: np.ndarray, y: np.ndarray, depth: int, max_depth, min_leaf: int) -> dict:
    n = len(y)
    n_pos = float(np.sum(y))
    if n_pos in (0.0, float(n)) or (max_depth is not None and depth >= max_depth) or n < 2 * min_leaf:
        return {"leaf": True, "score": n_pos / n, "n": n}
    split = _best_split(X, y, min_leaf)
    if split is None:
        return {"leaf": True, "score": n_pos / n, "n": n}
    _, feature, threshold = split
    mask = X[:, feature] <= threshold
    return {
        "leaf": False,
        "feature": feature,
        "threshold": threshold,
        "left": _grow(X[mask], y[mask], depth + 1, max_depth, min_leaf),
        "right": _grow(X[~mask], y[~mask], depth + 1, max_depth, min_leaf),
    }


def fit_dt(X: np.ndarray, y: np.ndarray, hp: dict) -> dict:
    max_depth = hp["max_depth"]
    min_leaf = max(1, int(hp["min_leaf"]))
    root = _grow(X, y.astype(float), 0, max_depth, min_leaf)
    return {"root": root, "max_depth": max_depth, "min_leaf": min_leaf}


def _walk(node: dict, row: np.ndarray) -> float:
    while not node["leaf"]:
        node = node["left"] if row[node["feature"]] <= node["threshold"] else node["right"]
    return node["score"]


def score_dt(params: dict, X: np.ndarray) -> np.ndarray:
    root = params["root"]
    return np.array([_walk(root, row) for row in X])


def tree_depth(params: dict) -> int:
    def depth(node):
        if node["leaf"]:
            return 0
        return 1 + max(depth(node["left"]), depth(node["right"]))

    return depth(params["root"])
