"""Bagged CART forests (classifier and regressor) built on the flat-array kernels."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels

__all__ = ["ModelParams", "TreeNode", "FlatTree", "ForestClassifier", "ForestRegressor"]


@dataclass(frozen=True)
class ModelParams:
    """Forest hyperparameters; the linear baseline only reads ridge_lambda.

    feature_subset: "auto" resolves to sqrt(F) for classification and F/3 for
    regression; "all" uses every feature; an int is an explicit per-split count.
    """

    n_trees: int = 100
    max_depth: int | None = None
    min_samples_leaf: int = 1
    feature_subset: int | str = "auto"
    bootstrap: bool = True
    ridge_lambda: float = 1.0

    def __post_init__(self):
        if self.n_trees < 1:
            raise ValueError("n_trees must be >= 1")
        if self.max_depth is not None and self.max_depth < 1:
            raise ValueError("max_depth must be >= 1 or None")
        if self.min_samples_leaf < 1:
            raise ValueError("min_samples_leaf must be >= 1")
        if isinstance(self.feature_subset, str):
            if self.feature_subset not in ("auto", "all"):
                raise ValueError("feature_subset must be 'auto', 'all' or an int")
        elif self.feature_subset < 1:
            raise ValueError("feature_subset must be >= 1")
        if self.ridge_lambda < 0:
            raise ValueError("ridge_lambda must be >= 0")

    def resolve_subset(self, n_features: int, task: str) -> int:
        if self.feature_subset == "all":
            return n_features
        if self.feature_subset == "auto":
            if task == "classification":
                return max(1, round(math.sqrt(n_features)))
            return max(1, n_features // 3)
        return min(int(self.feature_subset), n_features)

    def to_dict(self) -> dict:
        return {
            "n_trees": self.n_trees,
            "max_depth": self.max_depth,
            "min_samples_leaf": self.min_samples_leaf,
            "feature_subset": self.feature_subset,
            "bootstrap": self.bootstrap,
            "ridge_lambda": self.ridge_lambda,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ModelParams":
        return cls(**d)


@dataclass
class TreeNode:
    """Recursive view over one tree, mainly for inspection and serialization.

    Leaves carry ``value`` (class-probability array for classifiers, mean
    target for regressors); internal nodes carry the split and both children.
    """

    n_samples: int
    impurity: float
    value: object
    feature: int | None = None
    threshold: float | None = None
    left: "TreeNode | None" = None
    right: "TreeNode | None" = None

    @property
    def is_leaf(self) -> bool:
        return self.feature is None


@dataclass(eq=False)
class FlatTree:
    """One grown tree as parallel node arrays; node 0 is the root."""

    n_nodes: int
    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    n_samples: np.ndarray
    impurity: np.ndarray
    value: np.ndarray  # (n_nodes, C) for classification, (n_nodes,) for regression

    def root(self) -> TreeNode:
        def build(i):
            if self.feature[i] == _kernels.LEAF:
                return TreeNode(
                    n_samples=int(self.n_samples[i]),
                    impurity=float(self.impurity[i]),
                    value=self.value[i].copy() if self.value.ndim == 2 else float(self.value[i]),
                )
            return TreeNode(
                n_samples=int(self.n_samples[i]),
                impurity=float(self.impurity[i]),
                value=self.value[i].copy() if self.value.ndim == 2 else float(self.value[i]),
                feature=int(self.feature[i]),
                threshold=float(self.threshold[i]),
                left=build(int(self.left[i])),
                right=build(int(self.right[i])),
            )

        return build(0)

    def importance_contributions(self, n_features: int) -> np.ndarray:
        """Total impurity decrease per feature, weighted by node size."""
        out = np.zeros(n_features)
        n_root = self.n_samples[0]
        for i in range(self.n_nodes):
            f = self.feature[i]
            if f == _kernels.LEAF:
                continue
            l, r = self.left[i], self.right[i]
            decrease = (
                self.n_samples[i] * self.impurity[i]
                - self.n_samples[l] * self.impurity[l]
                - self.n_samples[r] * self.impurity[r]
            )
            out[f] += max(decrease, 0.0) / n_root
        return out

    def to_dict(self) -> dict:
        def node(i):
            if self.feature[i] == _kernels.LEAF:
                v = self.value[i]
                return {
                    "v": [float(x) for x in v] if self.value.ndim == 2 else float(v),
                    "n": int(self.n_samples[i]),
                    "g": float(self.impurity[i]),
                }
            return {
                "f": int(self.feature[i]),
                "t": float(self.threshold[i]),
                "n": int(self.n_samples[i]),
                "g": float(self.impurity[i]),
                "l": node(int(self.left[i])),
                "r": node(int(self.right[i])),
            }

        return node(0)

    @classmethod
    def from_dict(cls, d: dict, n_classes: int = 0) -> "FlatTree":
        nodes = []

        def count(nd):
            nodes.append(nd)
            if "f" in nd:
                count(nd["l"])
                count(nd["r"])

        count(d)
        cap = len(nodes)
        feature = np.full(cap, _kernels.LEAF, dtype=np.int64)
        threshold = np.zeros(cap)
        left = np.zeros(cap, dtype=np.int64)
        right = np.zeros(cap, dtype=np.int64)
        n_samples = np.zeros(cap, dtype=np.int64)
        impurity = np.zeros(cap)
        value = np.zeros((cap, n_classes)) if n_classes else np.zeros(cap)
        next_id = [0]

        def fill(nd):
            i = next_id[0]
            next_id[0] += 1
            n_samples[i] = nd["n"]
            impurity[i] = nd["g"]
            if "f" in nd:
                feature[i] = nd["f"]
                threshold[i] = nd["t"]
                li = fill(nd["l"])
                ri = fill(nd["r"])
                left[i] = li
                right[i] = ri
                # internal nodes keep no payload in serialized form
            else:
                value[i] = nd["v"]
            return i

        fill(d)
        return cls(cap, feature, threshold, left, right, n_samples, impurity, value)


def _tree_seeds(seed: int, n_trees: int):
    """Pre-derived (bootstrap rng, split seed) pairs, one per tree.

    Derivation is independent of training order, so trees could be grown in
    parallel without changing the result.
    """
    pairs = []
    for ss in np.random.SeedSequence(seed).spawn(n_trees):
        boot_ss, split_ss = ss.spawn(2)
        rng = np.random.Generator(np.random.PCG64(boot_ss))
        split_seed = int(split_ss.generate_state(1, dtype=np.uint32)[0])
        pairs.append((rng, split_seed))
    return pairs


def _check_X(X, n_features=None) -> np.ndarray:
    X = np.ascontiguousarray(X, dtype=np.float64)
    if X.ndim == 1:
        X = X[None, :]
    if X.ndim != 2:
        raise ValueError(f"X must be 2-D, got shape {X.shape}")
    if not np.all(np.isfinite(X)):
        raise ValueError("X contains non-finite values")
    if n_features is not None and X.shape[1] != n_features:
        raise ValueError(f"expected {n_features} features, got {X.shape[1]}")
    return X


class _ForestBase:
    task = ""

    def __init__(self, params: ModelParams | None = None, seed: int = 0):
        self.params = params or ModelParams()
        self.seed = int(seed)
        self.trees_: list[FlatTree] = []
        self.n_features_ = 0

    @property
    def is_fitted(self) -> bool:
        return bool(self.trees_)

    def _require_fitted(self):
        if not self.is_fitted:
            raise RuntimeError("model is not fitted")

    def _grow_all(self, X, grow_one):
        n = X.shape[0]
        self.trees_ = []
        for rng, split_seed in _tree_seeds(self.seed, self.params.n_trees):
            if self.params.bootstrap:
                idx = rng.integers(0, n, size=n, dtype=np.int64)
            else:
                idx = np.arange(n, dtype=np.int64)
            self.trees_.append(grow_one(idx, split_seed))
        return self

    def feature_importances(self) -> np.ndarray:
        """Mean impurity decrease per feature, normalized to sum to 1.

        All zeros when no tree ever split (constant targets).
        """
        self._require_fitted()
        total = np.zeros(self.n_features_)
        for tree in self.trees_:
            contrib = tree.importance_contributions(self.n_features_)
            s = contrib.sum()
            if s > 0:
                total += contrib / s
        s = total.sum()
        return total / s if s > 0 else total

    def _max_depth_code(self) -> int:
        return -1 if self.params.max_depth is None else self.params.max_depth


class ForestClassifier(_ForestBase):
    """Bagged Gini CART forest; predictions average leaf class distributions."""

    task = "classification"

    def __init__(self, params: ModelParams | None = None, seed: int = 0):
        super().__init__(params, seed)
        self.n_classes_ = 0

    def fit(self, X, y) -> "ForestClassifier":
        X = _check_X(X)
        y = np.asarray(y)
        if X.shape[0] == 0:
            raise ValueError("cannot fit on empty data")
        if y.shape != (X.shape[0],):
            raise ValueError("y must be 1-D and match X rows")
        if not np.issubdtype(y.dtype, np.integer):
            yf = y.astype(np.float64)
            if not np.all(np.isfinite(yf)) or np.any(yf != np.round(yf)):
                raise ValueError("class labels must be integers")
            y = yf
        y = y.astype(np.int64)
        if np.any(y < 0):
            raise ValueError("class labels must be >= 0")
        self.n_features_ = X.shape[1]
        self.n_classes_ = int(y.max()) + 1
        mtry = self.params.resolve_subset(self.n_features_, self.task)
        depth = self._max_depth_code()
        min_leaf = self.params.min_samples_leaf
        C = self.n_classes_

        def grow_one(idx, split_seed):
            cap = 2 * idx.shape[0] + 1
            feat = np.empty(cap, dtype=np.int64)
            thr = np.zeros(cap)
            left = np.zeros(cap, dtype=np.int64)
            right = np.zeros(cap, dtype=np.int64)
            nsamp = np.zeros(cap, dtype=np.int64)
            impur = np.zeros(cap)
            value = np.zeros((cap, C))
            n_nodes = _kernels.grow_classifier(
                X, y, C, idx, depth, min_leaf, mtry, split_seed,
                feat, thr, left, right, nsamp, impur, value,
            )
            return FlatTree(
                n_nodes, feat[:n_nodes].copy(), thr[:n_nodes].copy(),
                left[:n_nodes].copy(), right[:n_nodes].copy(),
                nsamp[:n_nodes].copy(), impur[:n_nodes].copy(), value[:n_nodes].copy(),
            )

        return self._grow_all(X, grow_one)

    def predict_proba(self, X) -> np.ndarray:
        self._require_fitted()
        X = _check_X(X, self.n_features_)
        out = np.zeros((X.shape[0], self.n_classes_))
        for tree in self.trees_:
            _kernels.add_proba(X, tree.feature, tree.threshold, tree.left,
                               tree.right, tree.value, out)
        out /= len(self.trees_)
        return out

    def predict(self, X) -> np.ndarray:
        return np.argmax(self.predict_proba(X), axis=1)

    def predict_one(self, x) -> tuple[int, np.ndarray]:
        probs = self.predict_proba(np.asarray(x, dtype=np.float64)[None, :])[0]
        return int(np.argmax(probs)), probs

    def to_dict(self) -> dict:
        self._require_fitted()
        return {
            "kind": "forest-classifier",
            "n_features": self.n_features_,
            "n_classes": self.n_classes_,
            "seed": self.seed,
            "params": self.params.to_dict(),
            "trees": [t.to_dict() for t in self.trees_],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ForestClassifier":
        model = cls(ModelParams.from_dict(d["params"]), seed=d["seed"])
        model.n_features_ = d["n_features"]
        model.n_classes_ = d["n_classes"]
        model.trees_ = [FlatTree.from_dict(t, n_classes=model.n_classes_) for t in d["trees"]]
        return model


class ForestRegressor(_ForestBase):
    """Bagged variance-reduction CART forest; predictions average leaf means."""

    task = "regression"

    def fit(self, X, y) -> "ForestRegressor":
        X = _check_X(X)
        y = np.asarray(y, dtype=np.float64)
        if X.shape[0] == 0:
            raise ValueError("cannot fit on empty data")
        if y.shape != (X.shape[0],):
            raise ValueError("y must be 1-D and match X rows")
        if not np.all(np.isfinite(y)):
            raise ValueError("y contains non-finite values")
        self.n_features_ = X.shape[1]
        mtry = self.params.resolve_subset(self.n_features_, self.task)
        depth = self._max_depth_code()
        min_leaf = self.params.min_samples_leaf

        def grow_one(idx, split_seed):
            cap = 2 * idx.shape[0] + 1
            feat = np.empty(cap, dtype=np.int64)
            thr = np.zeros(cap)
            left = np.zeros(cap, dtype=np.int64)
            right = np.zeros(cap, dtype=np.int64)
            nsamp = np.zeros(cap, dtype=np.int64)
            impur = np.zeros(cap)
            value = np.zeros(cap)
            n_nodes = _kernels.grow_regressor(
                X, y, idx, depth, min_leaf, mtry, split_seed,
                feat, thr, left, right, nsamp, impur, value,
            )
            return FlatTree(
                n_nodes, feat[:n_nodes].copy(), thr[:n_nodes].copy(),
                left[:n_nodes].copy(), right[:n_nodes].copy(),
                nsamp[:n_nodes].copy(), impur[:n_nodes].copy(), value[:n_nodes].copy(),
            )

        return self._grow_all(X, grow_one)

    def predict(self, X) -> np.ndarray:
        self._require_fitted()
        X = _check_X(X, self.n_features_)
        out = np.zeros(X.shape[0])
        for tree in self.trees_:
            _kernels.add_value(X, tree.feature, tree.threshold, tree.left,
                               tree.right, tree.value, out)
        out /= len(self.trees_)
        return out

    def predict_one(self, x) -> float:
        return float(self.predict(np.asarray(x, dtype=np.float64)[None, :])[0])

    def to_dict(self) -> dict:
        self._require_fitted()
        return {
            "kind": "forest-regressor",
            "n_features": self.n_features_,
            "seed": self.seed,
            "params": self.params.to_dict(),
            "trees": [t.to_dict() for t in self.trees_],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ForestRegressor":
        model = cls(ModelParams.from_dict(d["params"]), seed=d["seed"])
        model.n_features_ = d["n_features"]
        model.trees_ = [FlatTree.from_dict(t) for t in d["trees"]]
        return model
