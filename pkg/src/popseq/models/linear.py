"""Ridge regression with a closed-form solve.

Kept deliberately small: it exists as an alternative scale regressor for
model ablations, not as a general-purpose linear modelling toolkit.
"""

from __future__ import annotations

import numpy as np


class RidgeRegressor:
    """L2-penalized least squares; the intercept is not penalized.

    Solves (Xc^T Xc + lam*I) w = Xc^T yc on column-centered data, which is
    equivalent to excluding the intercept from the penalty.
    """

    def __init__(self, lam: float = 1.0):
        if not (lam >= 0):
            raise ValueError("lam must be >= 0")
        self.lam = float(lam)
        self.coef_: np.ndarray | None = None
        self.intercept_ = 0.0
        self.n_features_ = 0

    @property
    def is_fitted(self) -> bool:
        return self.coef_ is not None

    def fit(self, X, y) -> "RidgeRegressor":
        X = np.ascontiguousarray(X, dtype=np.float64)
        y = np.asarray(y, dtype=np.float64)
        if X.ndim != 2:
            raise ValueError("X must be 2-D")
        if X.shape[0] == 0:
            raise ValueError("cannot fit on empty data")
        if y.shape != (X.shape[0],):
            raise ValueError("y must be 1-D and match X rows")
        if not (np.all(np.isfinite(X)) and np.all(np.isfinite(y))):
            raise ValueError("X and y must be finite")
        x_mean = X.mean(axis=0)
        y_mean = y.mean()
        Xc = X - x_mean
        yc = y - y_mean
        f = X.shape[1]
        a = Xc.T @ Xc + self.lam * np.eye(f)
        b = Xc.T @ yc
        try:
            w = np.linalg.solve(a, b)
        except np.linalg.LinAlgError:
            # lam = 0 on rank-deficient data; fall back to the pseudoinverse.
            w = np.linalg.lstsq(a, b, rcond=None)[0]
        self.coef_ = w
        self.intercept_ = float(y_mean - x_mean @ w)
        self.n_features_ = f
        return self

    def predict(self, X) -> np.ndarray:
        if not self.is_fitted:
            raise RuntimeError("model is not fitted")
        X = np.ascontiguousarray(X, dtype=np.float64)
        if X.ndim != 2 or X.shape[1] != self.n_features_:
            raise ValueError(f"X must have shape (n, {self.n_features_})")
        if not np.all(np.isfinite(X)):
            raise ValueError("X must be finite")
        return X @ self.coef_ + self.intercept_

    def predict_one(self, x) -> float:
        return float(self.predict(np.asarray(x, dtype=np.float64)[None, :])[0])

    def feature_importances(self) -> np.ndarray:
        """|coef| normalized to sum to 1 (all zeros for a constant fit)."""
        if not self.is_fitted:
            raise RuntimeError("model is not fitted")
        mag = np.abs(self.coef_)
        s = mag.sum()
        return mag / s if s > 0 else mag

    def to_dict(self) -> dict:
        if not self.is_fitted:
            raise RuntimeError("model is not fitted")
        return {
            "kind": "ridge-regressor",
            "lam": self.lam,
            "coef": [float(c) for c in self.coef_],
            "intercept": self.intercept_,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "RidgeRegressor":
        if d.get("kind") != "ridge-regressor":
            raise ValueError("not a serialized ridge regressor")
        model = cls(lam=float(d["lam"]))
        model.coef_ = np.asarray(d["coef"], dtype=np.float64)
        model.intercept_ = float(d["intercept"])
        model.n_features_ = model.coef_.shape[0]
        return model


class RidgeClassifier:
    """One-vs-rest ridge on one-hot labels; predicts the argmax score.

    Linear baseline for the model ablation. Scores are not probabilities.
    """

    def __init__(self, lam: float = 1.0):
        if not (lam >= 0):
            raise ValueError("lam must be >= 0")
        self.lam = float(lam)
        self.coef_: np.ndarray | None = None  # (n_classes, n_features)
        self.intercept_: np.ndarray | None = None
        self.n_features_ = 0
        self.n_classes_ = 0

    @property
    def is_fitted(self) -> bool:
        return self.coef_ is not None

    def fit(self, X, y) -> "RidgeClassifier":
        X = np.ascontiguousarray(X, dtype=np.float64)
        y = np.asarray(y)
        if X.ndim != 2 or X.shape[0] == 0:
            raise ValueError("X must be 2-D and non-empty")
        if y.shape != (X.shape[0],):
            raise ValueError("y must be 1-D and match X rows")
        if not np.all(np.isfinite(X)):
            raise ValueError("X must be finite")
        y = y.astype(np.int64)
        if np.any(y < 0):
            raise ValueError("class labels must be >= 0")
        n, f = X.shape
        c = int(y.max()) + 1
        onehot = np.zeros((n, c))
        onehot[np.arange(n), y] = 1.0
        x_mean = X.mean(axis=0)
        y_mean = onehot.mean(axis=0)
        Xc = X - x_mean
        a = Xc.T @ Xc + self.lam * np.eye(f)
        b = Xc.T @ (onehot - y_mean)
        try:
            w = np.linalg.solve(a, b)  # (f, c), one column per class
        except np.linalg.LinAlgError:
            w = np.linalg.lstsq(a, b, rcond=None)[0]
        self.coef_ = w.T
        self.intercept_ = y_mean - self.coef_ @ x_mean
        self.n_features_ = f
        self.n_classes_ = c
        return self

    def decision_scores(self, X) -> np.ndarray:
        if not self.is_fitted:
            raise RuntimeError("model is not fitted")
        X = np.ascontiguousarray(X, dtype=np.float64)
        if X.ndim != 2 or X.shape[1] != self.n_features_:
            raise ValueError(f"X must have shape (n, {self.n_features_})")
        return X @ self.coef_.T + self.intercept_

    def predict(self, X) -> np.ndarray:
        return np.argmax(self.decision_scores(X), axis=1)

    def predict_one(self, x) -> int:
        return int(self.predict(np.asarray(x, dtype=np.float64)[None, :])[0])

    def feature_importances(self) -> np.ndarray:
        """Mean |coef| across classes, normalized to sum to 1."""
        if not self.is_fitted:
            raise RuntimeError("model is not fitted")
        mag = np.abs(self.coef_).mean(axis=0)
        s = mag.sum()
        return mag / s if s > 0 else mag

    def to_dict(self) -> dict:
        if not self.is_fitted:
            raise RuntimeError("model is not fitted")
        return {
            "kind": "ridge-classifier",
            "lam": self.lam,
            "coef": [[float(v) for v in row] for row in self.coef_],
            "intercept": [float(v) for v in self.intercept_],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "RidgeClassifier":
        if d.get("kind") != "ridge-classifier":
            raise ValueError("not a serialized ridge classifier")
        model = cls(lam=float(d["lam"]))
        model.coef_ = np.asarray(d["coef"], dtype=np.float64)
        model.intercept_ = np.asarray(d["intercept"], dtype=np.float64)
        model.n_classes_, model.n_features_ = model.coef_.shape
        return model
