"""CART regression tree: recursive growth and vectorized prediction.

Trees are stored as flat parallel arrays (feature, threshold, left, right,
value) with feature == -1 marking leaves. Routing sends a sample left when
x[feature] <= threshold. The same storage is reused by the forests and
boosters, so prediction and serialization live here once.
"""

from __future__ import annotations

import math

import numpy as np

from .splits import Split, _exact_search, _random_search


class TreeNodes:
    """Flat node storage for one fitted tree."""

    __slots__ = ("feature", "threshold", "left", "right", "value")

    def __init__(self, feature, threshold, left, right, value):
        self.feature = np.asarray(feature, dtype=np.int32)
        self.threshold = np.asarray(threshold, dtype=np.float64)
        self.left = np.asarray(left, dtype=np.int32)
        self.right = np.asarray(right, dtype=np.int32)
        self.value = np.asarray(value, dtype=np.float64)

    @property
    def n_nodes(self) -> int:
        return int(self.feature.shape[0])

    @property
    def n_leaves(self) -> int:
        return int((self.feature < 0).sum())

    def predict(self, X: np.ndarray) -> np.ndarray:
        n = X.shape[0]
        cur = np.zeros(n, dtype=np.int32)
        while True:
            f = self.feature[cur]
            mask = f >= 0
            if not mask.any():
                break
            idx = np.nonzero(mask)[0]
            node = cur[idx]
            xv = X[idx, f[idx]]
            go_left = xv <= self.threshold[node]
            cur[idx] = np.where(go_left, self.left[node], self.right[node])
        return self.value[cur]

    def to_state(self) -> dict:
        return {
            "feature": self.feature.tolist(),
            "threshold": self.threshold.tolist(),
            "left": self.left.tolist(),
            "right": self.right.tolist(),
            "value": self.value.tolist(),
        }

    @classmethod
    def from_state(cls, state: dict) -> "TreeNodes":
        return cls(
            state["feature"],
            state["threshold"],
            state["left"],
            state["right"],
            state["value"],
        )


class _Growth:
    """Mutable node lists during recursive growth."""

    def __init__(self):
        self.feature: list[int] = []
        self.threshold: list[float] = []
        self.left: list[int] = []
        self.right: list[int] = []
        self.value: list[float] = []

    def add(self) -> int:
        self.feature.append(-1)
        self.threshold.append(0.0)
        self.left.append(-1)
        self.right.append(-1)
        self.value.append(0.0)
        return len(self.feature) - 1

    def finish(self) -> TreeNodes:
        return TreeNodes(self.feature, self.threshold, self.left, self.right, self.value)


def grow_tree(
    X: np.ndarray,
    y: np.ndarray,
    *,
    max_depth: int | None,
    min_samples_leaf: int,
    max_features: int | None = None,
    rng: np.random.Generator | None = None,
    random_thresholds: bool = False,
    root_rows: np.ndarray | None = None,
) -> TreeNodes:
    """Grow one regression tree.

    max_features draws a fresh feature subset at every node (requires rng);
    random_thresholds switches the split search from exhaustive midpoints
    to one uniform draw per feature (extra-trees style).
    """
    if X.shape[0] == 0:
        raise ValueError("cannot grow a tree on an empty matrix")
    n, d = X.shape
    rows0 = (
        np.arange(n, dtype=np.intp) if root_rows is None else np.asarray(root_rows, dtype=np.intp)
    )
    if rows0.size == 0:
        raise ValueError("cannot grow a tree on an empty row subset")
    if max_features is not None and max_features < 1:
        raise ValueError("max_features must be >= 1")
    subset = max_features is not None and max_features < d
    if subset and rng is None:
        raise ValueError("feature subsampling requires an rng")
    if random_thresholds and rng is None:
        raise ValueError("random thresholds require an rng")
    all_feats = np.arange(d, dtype=np.intp)
    growth = _Growth()

    def build(rows: np.ndarray, depth: int) -> int:
        idx = growth.add()
        yn = y[rows]
        growth.value[idx] = float(yn.mean())

        split: Split | None = None
        if (max_depth is None or depth < max_depth) and rows.size >= 2:
            if subset:
                feats = np.sort(rng.choice(d, size=max_features, replace=False))
            else:
                feats = all_feats
            Xn = X[np.ix_(rows, feats)]
            if random_thresholds:
                split = _random_search(Xn, yn, feats, min_samples_leaf, rng)
            else:
                split = _exact_search(Xn, yn, feats, min_samples_leaf)

        if split is not None:
            go_left = X[rows, split.feature] <= split.threshold
            growth.feature[idx] = split.feature
            growth.threshold[idx] = split.threshold
            growth.left[idx] = build(rows[go_left], depth + 1)
            growth.right[idx] = build(rows[~go_left], depth + 1)
        return idx

    build(rows0, 0)
    return growth.finish()


class DecisionTree:
    """Plain CART regressor with exhaustive midpoint splits."""

    kind = "decision_tree"

    def __init__(self, params):
        self.params = params
        self.nodes: TreeNodes | None = None

    def fit(self, X: np.ndarray, y: np.ndarray, n_jobs: int = 1) -> "DecisionTree":
        X = np.asarray(X, dtype=np.float64)
        y = np.asarray(y, dtype=np.float64)
        if X.shape[0] == 0:
            raise ValueError("cannot train on an empty matrix")
        self.nodes = grow_tree(
            X,
            y,
            max_depth=self.params.max_depth,
            min_samples_leaf=self.params.min_samples_leaf,
        )
        return self

    def predict(self, X: np.ndarray) -> np.ndarray:
        if self.nodes is None:
            raise RuntimeError("model is not fitted")
        return self.nodes.predict(np.asarray(X, dtype=np.float64))

    def to_state(self) -> dict:
        assert self.nodes is not None
        return {"tree": self.nodes.to_state()}

    def load_state(self, state: dict) -> None:
        self.nodes = TreeNodes.from_state(state["tree"])


def derived_rng(seed: int, index: int) -> np.random.Generator:
    """Deterministic per-member stream: independent of training order."""
    return np.random.default_rng(np.random.SeedSequence((seed, index)))


def subsample_rows(n: int, fraction: float, rng: np.random.Generator) -> np.ndarray:
    """Sorted sample without replacement of ceil(fraction * n) rows."""
    size = max(1, math.ceil(fraction * n))
    return np.sort(rng.choice(n, size=size, replace=False))
