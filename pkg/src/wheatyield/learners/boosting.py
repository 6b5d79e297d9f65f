"""Gradient boosting of exact CART trees on squared error.

The model starts from the target mean and adds learning_rate * tree(m) for
m = 1..n_estimators, each tree fit to the current residuals. With
subsample < 1 the tree sees a per-round row sample drawn without
replacement (the update still applies to all rows).
"""

from __future__ import annotations

import numpy as np

from .tree import TreeNodes, derived_rng, grow_tree, subsample_rows


class GradientBoosting:
    kind = "gradient_boosting"

    def __init__(self, params):
        self.params = params
        self.base_value = 0.0
        self.trees: list[TreeNodes] = []
        self.train_mse_path_: list[float] = []

    def fit(self, X: np.ndarray, y: np.ndarray, n_jobs: int = 1) -> "GradientBoosting":
        X = np.ascontiguousarray(X, dtype=np.float64)
        y = np.asarray(y, dtype=np.float64)
        n, d = X.shape
        if n == 0:
            raise ValueError("cannot train on an empty matrix")
        p = self.params
        self.base_value = float(np.mean(y))
        current = np.full(n, self.base_value)
        self.trees = []
        self.train_mse_path_ = [float(np.mean((y - current) ** 2))]
        max_features = d if p.max_features is None else min(p.max_features, d)
        for m in range(p.n_estimators):
            residual = y - current
            rng = derived_rng(p.seed, m)
            rows = subsample_rows(n, p.subsample, rng) if p.subsample < 1.0 else None
            tree = grow_tree(
                X,
                residual,
                max_depth=p.max_depth,
                min_samples_leaf=p.min_samples_leaf,
                max_features=max_features,
                rng=rng,
                root_rows=rows,
            )
            current = current + p.learning_rate * tree.predict(X)
            self.trees.append(tree)
            self.train_mse_path_.append(float(np.mean((y - current) ** 2)))
        return self

    def predict(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        acc = np.full(X.shape[0], self.base_value)
        for tree in self.trees:
            acc += self.params.learning_rate * tree.predict(X)
        return acc

    def to_state(self) -> dict:
        return {
            "base_value": self.base_value,
            "learning_rate": self.params.learning_rate,
            "trees": [t.to_state() for t in self.trees],
        }

    def load_state(self, state: dict) -> None:
        self.base_value = float(state["base_value"])
        self.trees = [TreeNodes.from_state(s) for s in state["trees"]]
