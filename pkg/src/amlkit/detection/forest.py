"""Isolation forest and random forest built from first principles.

Trees are stored as flat parallel arrays (feature, threshold, children,
leaf value), so scoring a batch is a handful of vectorized gather steps
per tree instead of per-row recursion.
"""

from __future__ import annotations

import math

import numpy as np

_EULER = 0.5772156649015329


def average_path_length(n: int) -> float:
    """Expected unsuccessful-search depth in a BST of n points."""
    if n <= 1:
        return 0.0
    if n == 2:
        return 1.0
    return 2.0 * (math.log(n - 1) + _EULER) - 2.0 * (n - 1) / n


class _Tree:
    """Append-only flat tree; node 0 is the root."""

    def __init__(self):
        self.feature: list[int] = []
        self.threshold: list[float] = []
        self.left: list[int] = []
        self.right: list[int] = []
        self.value: list[float] = []

    def add(self, feature: int = -1, threshold: float = 0.0, value: float = 0.0) -> int:
        self.feature.append(feature)
        self.threshold.append(threshold)
        self.left.append(-1)
        self.right.append(-1)
        self.value.append(value)
        return len(self.feature) - 1


def _pack(trees: list[_Tree]) -> dict[str, np.ndarray]:
    offsets = np.zeros(len(trees) + 1, dtype=np.int64)
    for t, tree in enumerate(trees):
        offsets[t + 1] = offsets[t] + len(tree.feature)
    lefts, rights = [], []
    for t, tree in enumerate(trees):
        # Child pointers are tree-local; rebase them onto the packed layout.
        left = np.asarray(tree.left, dtype=np.int64)
        right = np.asarray(tree.right, dtype=np.int64)
        lefts.append(np.where(left >= 0, left + offsets[t], -1))
        rights.append(np.where(right >= 0, right + offsets[t], -1))
    return {
        "feature": np.concatenate([np.asarray(t.feature, dtype=np.int64) for t in trees]),
        "threshold": np.concatenate([np.asarray(t.threshold) for t in trees]),
        "left": np.concatenate(lefts),
        "right": np.concatenate(rights),
        "value": np.concatenate([np.asarray(t.value) for t in trees]),
        "offsets": offsets,
    }


def _route_leaf_values(X: np.ndarray, arrays: dict[str, np.ndarray]) -> np.ndarray:
    """Leaf value per (row, tree); trees are routed one at a time."""
    n = X.shape[0]
    n_trees = len(arrays["offsets"]) - 1
    out = np.empty((n, n_trees))
    feature, threshold = arrays["feature"], arrays["threshold"]
    left, right, value = arrays["left"], arrays["right"], arrays["value"]
    rows = np.arange(n)
    for t in range(n_trees):
        base = arrays["offsets"][t]
        node = np.full(n, base, dtype=np.int64)
        while True:
            feat = feature[node]
            active = feat >= 0
            if not active.any():
                break
            idx = rows[active]
            cur = node[active]
            go_left = X[idx, feat[active]] <= threshold[cur]
            node[idx] = np.where(go_left, left[cur], right[cur])
        out[:, t] = value[node]
    return out


class IsolationForest:
    """Random-partition ensemble scoring isolation depth.

    The anomaly score is 2^(-E[h(x)] / c(psi)) with psi the per-tree
    subsample size, so scores live in (0, 1) and higher means more
    isolated.
    """

    def __init__(self, n_trees: int = 100, subsample: int = 256):
        self.n_trees = n_trees
        self.subsample = subsample
        self._arrays: dict[str, np.ndarray] | None = None
        self._psi = 0

    @property
    def trained(self) -> bool:
        return self._arrays is not None

    def fit(self, X: np.ndarray, rng: np.random.Generator) -> "IsolationForest":
        n = X.shape[0]
        psi = min(self.subsample, n)
        limit = max(int(math.ceil(math.log2(max(psi, 2)))), 1)
        trees = []
        for _ in range(self.n_trees):
            idx = rng.choice(n, size=psi, replace=False)
            tree = _Tree()
            self._grow(X, idx, 0, limit, rng, tree)
            trees.append(tree)
        self._arrays = _pack(trees)
        self._psi = psi
        return self

    def _grow(self, X: np.ndarray, idx: np.ndarray, depth: int, limit: int, rng, tree: _Tree) -> int:
        if depth >= limit or len(idx) <= 1:
            return tree.add(value=depth + average_path_length(len(idx)))
        sub = X[idx]
        lo, hi = sub.min(axis=0), sub.max(axis=0)
        spread = np.flatnonzero(hi > lo)
        if spread.size == 0:
            return tree.add(value=depth + average_path_length(len(idx)))
        f = int(spread[rng.integers(0, spread.size)])
        cut = float(rng.uniform(lo[f], hi[f]))
        mask = sub[:, f] <= cut
        if mask.all() or not mask.any():
            return tree.add(value=depth + average_path_length(len(idx)))
        node = tree.add(feature=f, threshold=cut)
        tree.left[node] = self._grow(X, idx[mask], depth + 1, limit, rng, tree)
        tree.right[node] = self._grow(X, idx[~mask], depth + 1, limit, rng, tree)
        return node

    def score(self, X: np.ndarray) -> np.ndarray:
        if not self.trained:
            raise RuntimeError("isolation forest is not trained")
        depths = _route_leaf_values(X, self._arrays)
        expected = depths.mean(axis=1)
        return np.power(2.0, -expected / average_path_length(self._psi))


class RandomForest:
    """Bagged Gini-split decision trees; risk = share of positive votes."""

    def __init__(self, n_trees: int = 100, max_depth: int = 12, min_leaf: int = 5):
        self.n_trees = n_trees
        self.max_depth = max_depth
        self.min_leaf = min_leaf
        self._arrays: dict[str, np.ndarray] | None = None
        self.feature_importances_: np.ndarray | None = None

    @property
    def trained(self) -> bool:
        return self._arrays is not None

    def fit(self, X: np.ndarray, y: np.ndarray, rng: np.random.Generator) -> "RandomForest":
        n, d = X.shape
        y = np.asarray(y, dtype=np.float64)
        mtry = max(int(round(math.sqrt(d))), 1)
        importances = np.zeros(d)
        trees = []
        for _ in range(self.n_trees):
            idx = rng.integers(0, n, size=n)
            tree = _Tree()
            self._grow(X, y, idx, 0, rng, tree, mtry, importances, n)
            trees.append(tree)
        self._arrays = _pack(trees)
        total = importances.sum()
        self.feature_importances_ = importances / total if total > 0 else importances
        return self

    def _grow(self, X, y, idx, depth, rng, tree: _Tree, mtry: int, importances: np.ndarray, n_total: int) -> int:
        labels = y[idx]
        pos = labels.sum()
        size = len(idx)
        if depth >= self.max_depth or size < 2 * self.min_leaf or pos == 0 or pos == size:
            return tree.add(value=1.0 if pos * 2 > size else 0.0)
        best = self._best_split(X, labels, idx, rng, mtry)
        if best is None:
            return tree.add(value=1.0 if pos * 2 > size else 0.0)
        f, cut, gain = best
        mask = X[idx, f] <= cut
        importances[f] += gain * size / n_total
        node = tree.add(feature=f, threshold=cut)
        tree.left[node] = self._grow(X, y, idx[mask], depth + 1, rng, tree, mtry, importances, n_total)
        tree.right[node] = self._grow(X, y, idx[~mask], depth + 1, rng, tree, mtry, importances, n_total)
        return node

    def _best_split(self, X, labels, idx, rng, mtry):
        size = len(idx)
        p = labels.mean()
        parent_gini = 2.0 * p * (1.0 - p)
        candidates = rng.choice(X.shape[1], size=min(mtry, X.shape[1]), replace=False)
        best = None
        best_score = np.inf
        for f in candidates:
            vals = X[idx, f]
            order = np.argsort(vals, kind="stable")
            sv, sy = vals[order], labels[order]
            cum_pos = np.cumsum(sy)
            k = np.arange(1, size)  # left side sizes
            valid = (sv[:-1] < sv[1:]) & (k >= self.min_leaf) & (size - k >= self.min_leaf)
            if not valid.any():
                continue
            left_pos = cum_pos[:-1]
            pl = left_pos / k
            pr = (cum_pos[-1] - left_pos) / (size - k)
            weighted = (k * 2 * pl * (1 - pl) + (size - k) * 2 * pr * (1 - pr)) / size
            weighted = np.where(valid, weighted, np.inf)
            j = int(np.argmin(weighted))
            if weighted[j] < best_score:
                best_score = float(weighted[j])
                best = (int(f), float((sv[j] + sv[j + 1]) / 2.0), parent_gini - float(weighted[j]))
        if best is None or best[2] <= 1e-12:
            return None
        return best

    def predict_risk(self, X: np.ndarray) -> np.ndarray:
        if not self.trained:
            raise RuntimeError("random forest is not trained")
        return _route_leaf_values(X, self._arrays).mean(axis=1)


def forest_to_arrays(model, prefix: str) -> dict[str, np.ndarray]:
    out = {f"{prefix}_{k}": v for k, v in model._arrays.items()}
    if isinstance(model, IsolationForest):
        out[f"{prefix}_psi"] = np.asarray([model._psi, model.n_trees, model.subsample], dtype=np.int64)
    else:
        out[f"{prefix}_importances"] = model.feature_importances_
        out[f"{prefix}_params"] = np.asarray([model.n_trees, model.max_depth, model.min_leaf], dtype=np.int64)
    return out


def forest_from_arrays(data: dict, prefix: str, kind: str):
    arrays = {k: np.asarray(data[f"{prefix}_{k}"]) for k in ("feature", "threshold", "left", "right", "value", "offsets")}
    if kind == "isolation":
        psi, n_trees, subsample = (int(v) for v in data[f"{prefix}_psi"])
        model = IsolationForest(n_trees=n_trees, subsample=subsample)
        model._psi = psi
    else:
        n_trees, max_depth, min_leaf = (int(v) for v in data[f"{prefix}_params"])
        model = RandomForest(n_trees=n_trees, max_depth=max_depth, min_leaf=min_leaf)
        model.feature_importances_ = np.asarray(data[f"{prefix}_importances"])
    model._arrays = arrays
    return model
