"""Bagged tree ensembles: random forest and extremely randomized trees.

Every tree draws its own generator from (seed, tree index), so training is
bit-reproducible no matter how many worker threads build the trees.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from .tree import TreeNodes, derived_rng, grow_tree


def _resolve_max_features(max_features: int | None, d: int) -> int:
    if max_features is None:
        return max(1, math.ceil(d / 3))
    return min(max_features, d)


class _BaseForest:
    kind = ""
    random_thresholds = False
    use_bootstrap = False

    def __init__(self, params):
        self.params = params
        self.trees: list[TreeNodes] = []

    def _build_one(self, X: np.ndarray, y: np.ndarray, index: int) -> TreeNodes:
        rng = derived_rng(self.params.seed, index)
        n, d = X.shape
        if self.use_bootstrap and self.params.bootstrap:
            rows = rng.integers(0, n, size=n)
            Xb, yb = X[rows], y[rows]
        else:
            Xb, yb = X, y
        return grow_tree(
            Xb,
            yb,
            max_depth=self.params.max_depth,
            min_samples_leaf=self.params.min_samples_leaf,
            max_features=_resolve_max_features(self.params.max_features, d),
            rng=rng,
            random_thresholds=self.random_thresholds,
        )

    def fit(self, X: np.ndarray, y: np.ndarray, n_jobs: int = 1):
        X = np.ascontiguousarray(X, dtype=np.float64)
        y = np.asarray(y, dtype=np.float64)
        if X.shape[0] == 0:
            raise ValueError("cannot train on an empty matrix")
        if self.params.n_estimators < 1:
            raise ValueError("forests need n_estimators >= 1")
        indices = range(self.params.n_estimators)
        if n_jobs > 1:
            with ThreadPoolExecutor(max_workers=n_jobs) as pool:
                self.trees = list(pool.map(lambda i: self._build_one(X, y, i), indices))
        else:
            self.trees = [self._build_one(X, y, i) for i in indices]
        return self

    def predict(self, X: np.ndarray) -> np.ndarray:
        if not self.trees:
            raise RuntimeError("model is not fitted")
        X = np.asarray(X, dtype=np.float64)
        acc = np.zeros(X.shape[0], dtype=np.float64)
        for tree in self.trees:
            acc += tree.predict(X)
        return acc / len(self.trees)

    def to_state(self) -> dict:
        return {"trees": [t.to_state() for t in self.trees]}

    def load_state(self, state: dict) -> None:
        self.trees = [TreeNodes.from_state(s) for s in state["trees"]]


class RandomForest(_BaseForest):
    """Bootstrap rows + per-node random feature subsets, exact splits."""

    kind = "random_forest"
    random_thresholds = False
    use_bootstrap = True


class ExtraTrees(_BaseForest):
    """Full rows, per-node random feature subsets, uniform random thresholds."""

    kind = "extra_trees"
    random_thresholds = True
    use_bootstrap = False
