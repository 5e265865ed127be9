"""Shape/scale prediction framework.

Training decomposes every sequence, clusters each sub-period's shape
slices into a prototype memory, trains one classifier per sub-period
(features -> prototype label) and a single regressor (features ->
normalized scale).  Inference concatenates the predicted prototypes and
multiplies by the denormalized scale prediction.

Evaluation cases (see :meth:`TrainedFramework.predict_cases`):

* A: ground-truth-assigned prototypes x ground-truth scale
* B: predicted prototypes x ground-truth scale
* C: ground-truth-assigned prototypes x predicted scale
* D: predicted prototypes x predicted scale (== plain predict)

"GT-assigned" means the nearest prototype to the sample's true shape
slice, i.e. the label the classifier is trained to hit.  Case A is the
quantization floor: no classifier can beat it under a shared scale.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace

import numpy as np

from .clustering import ShapeMemory, assign_nearest, build_memory
from .models import (
    ForestClassifier,
    ForestRegressor,
    ModelParams,
    RidgeClassifier,
    RidgeRegressor,
)
from .sequences import (
    DEFAULT_HORIZON,
    EngagementSequence,
    NormScheme,
    decompose_matrix,
    denormalize_scale,
    normalize_scale,
)

ARCHIVE_FORMAT = "popseq-framework"
ARCHIVE_VERSION = 1

MODEL_KINDS = ("forest", "ridge")


@dataclass(frozen=True)
class FrameworkConfig:
    """Everything fit() needs besides the data."""

    horizon: int = DEFAULT_HORIZON
    period_length: int = 10
    cluster_sizes: tuple[int, ...] = (2, 2, 2)
    norm_scheme: NormScheme = field(default_factory=NormScheme.log_log)
    classifier_kind: str = "forest"
    regressor_kind: str = "forest"
    classifier_params: ModelParams = field(default_factory=ModelParams)
    regressor_params: ModelParams = field(default_factory=ModelParams)
    kmeans_restarts: int = 10
    seed: int = 42

    def __post_init__(self):
        object.__setattr__(self, "cluster_sizes", tuple(int(k) for k in self.cluster_sizes))
        if self.horizon < 1:
            raise ValueError("horizon must be >= 1")
        if self.period_length < 1 or self.horizon % self.period_length != 0:
            raise ValueError(
                f"period_length {self.period_length} must divide horizon {self.horizon}")
        k = self.horizon // self.period_length
        if len(self.cluster_sizes) != k:
            raise ValueError(
                f"need {k} cluster sizes for {k} periods, got {len(self.cluster_sizes)}")
        if any(ki < 1 for ki in self.cluster_sizes):
            raise ValueError("cluster sizes must be >= 1")
        if not isinstance(self.norm_scheme, NormScheme):
            raise ValueError("norm_scheme must be a NormScheme")
        for kind in (self.classifier_kind, self.regressor_kind):
            if kind not in MODEL_KINDS:
                raise ValueError(f"model kind must be one of {MODEL_KINDS}, got {kind!r}")
        if self.kmeans_restarts < 1:
            raise ValueError("kmeans_restarts must be >= 1")

    @property
    def n_periods(self) -> int:
        return self.horizon // self.period_length

    def with_period_length(self, p_len: int,
                           cluster_sizes: tuple[int, ...] | None = None) -> "FrameworkConfig":
        """Copy with a new period length, re-sizing cluster_sizes to match.

        Without an explicit cluster_sizes the current per-period size is
        repeated, which requires it to be uniform.
        """
        if cluster_sizes is None:
            uniq = set(self.cluster_sizes)
            if len(uniq) != 1:
                raise ValueError(
                    "cluster_sizes is non-uniform; pass an explicit list")
            if self.horizon % p_len != 0:
                raise ValueError(f"period_length {p_len} must divide horizon {self.horizon}")
            cluster_sizes = (next(iter(uniq)),) * (self.horizon // p_len)
        return replace(self, period_length=int(p_len), cluster_sizes=tuple(cluster_sizes))

    def to_dict(self) -> dict:
        return {
            "horizon": self.horizon,
            "period_length": self.period_length,
            "cluster_sizes": list(self.cluster_sizes),
            "norm_scheme": self.norm_scheme.to_dict(),
            "classifier_kind": self.classifier_kind,
            "regressor_kind": self.regressor_kind,
            "classifier_params": self.classifier_params.to_dict(),
            "regressor_params": self.regressor_params.to_dict(),
            "kmeans_restarts": self.kmeans_restarts,
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "FrameworkConfig":
        """Build from a (possibly partial) dict; absent keys keep defaults."""
        known = {
            "horizon", "period_length", "cluster_sizes", "norm_scheme",
            "classifier_kind", "regressor_kind", "classifier_params",
            "regressor_params", "kmeans_restarts", "seed",
        }
        extra = set(d) - known
        if extra:
            raise ValueError(f"unknown config keys: {sorted(extra)}")
        kwargs = dict(d)
        if "cluster_sizes" in kwargs:
            kwargs["cluster_sizes"] = tuple(kwargs["cluster_sizes"])
        if "norm_scheme" in kwargs and not isinstance(kwargs["norm_scheme"], NormScheme):
            kwargs["norm_scheme"] = NormScheme.from_dict(kwargs["norm_scheme"])
        for key in ("classifier_params", "regressor_params"):
            if key in kwargs and not isinstance(kwargs[key], ModelParams):
                kwargs[key] = ModelParams.from_dict(kwargs[key])
        return cls(**kwargs)


def split_periods(shape: np.ndarray, k: int) -> list[np.ndarray]:
    """Split a length-L shape (or (n, L) matrix) into k equal slices."""
    shape = np.asarray(shape, dtype=np.float64)
    length = shape.shape[-1]
    if k < 1 or length % k != 0:
        raise ValueError(f"cannot split length {length} into {k} equal periods")
    p = length // k
    return [shape[..., i * p:(i + 1) * p] for i in range(k)]


def _make_classifier(kind: str, params: ModelParams, seed: int):
    if kind == "forest":
        return ForestClassifier(params, seed=seed)
    return RidgeClassifier(lam=params.ridge_lambda)


def _make_regressor(kind: str, params: ModelParams, seed: int):
    if kind == "forest":
        return ForestRegressor(params, seed=seed)
    return RidgeRegressor(lam=params.ridge_lambda)


_MODEL_LOADERS = {
    "forest-classifier": ForestClassifier.from_dict,
    "forest-regressor": ForestRegressor.from_dict,
    "ridge-classifier": RidgeClassifier.from_dict,
    "ridge-regressor": RidgeRegressor.from_dict,
}


def _model_from_dict(d: dict):
    kind = d.get("kind")
    if kind not in _MODEL_LOADERS:
        raise ValueError(f"unknown serialized model kind {kind!r}")
    return _MODEL_LOADERS[kind](d)


CASES = ("A", "B", "C", "D")


@dataclass
class TrainedFramework:
    config: FrameworkConfig
    memories: list[ShapeMemory]
    classifiers: list
    regressor: object
    feature_names: tuple[str, ...]

    @property
    def n_features(self) -> int:
        return len(self.feature_names)

    def _check_features(self, X) -> np.ndarray:
        X = np.ascontiguousarray(X, dtype=np.float64)
        if X.ndim != 2 or X.shape[1] != self.n_features:
            raise ValueError(f"feature matrix must have shape (n, {self.n_features})")
        return X

    def predict_scale(self, X) -> np.ndarray:
        """Denormalized scale predictions, clamped to >= 0."""
        X = self._check_features(X)
        norm = np.asarray(self.regressor.predict(X), dtype=np.float64)
        return denormalize_scale(norm, self.config.norm_scheme)

    def predict_labels(self, X) -> np.ndarray:
        """(n, k) predicted prototype labels, one column per period."""
        X = self._check_features(X)
        return np.stack(
            [np.asarray(clf.predict(X), dtype=np.int64) for clf in self.classifiers],
            axis=1)

    def _labels_to_shape(self, labels: np.ndarray) -> np.ndarray:
        cols = [self.memories[i].prototypes[labels[:, i]]
                for i in range(len(self.memories))]
        return np.hstack(cols)

    def predict(self, X) -> np.ndarray:
        """(n, L) predicted sequences = concatenated prototypes x scale.

        Rows are non-negative but may dip at period boundaries, so they are
        returned as a plain array rather than EngagementSequence objects.
        """
        X = self._check_features(X)
        shape = self._labels_to_shape(self.predict_labels(X))
        return shape * self.predict_scale(X)[:, None]

    def predict_one(self, x) -> np.ndarray:
        return self.predict(np.asarray(x, dtype=np.float64)[None, :])[0]

    def assign_labels(self, sequences) -> np.ndarray:
        """(n, k) ground-truth prototype labels by nearest centroid."""
        shapes, _, _ = decompose_matrix(_sequence_matrix(sequences, self.config.horizon))
        slices = split_periods(shapes, self.config.n_periods)
        return np.stack(
            [assign_nearest(slices[i], self.memories[i].prototypes)
             for i in range(self.config.n_periods)],
            axis=1)

    def predict_cases(self, X, sequences) -> dict[str, np.ndarray]:
        """All four evaluation settings as (n, L) matrices keyed by case."""
        X = self._check_features(X)
        seq_matrix = _sequence_matrix(sequences, self.config.horizon)
        if seq_matrix.shape[0] != X.shape[0]:
            raise ValueError("feature and sequence counts differ")
        _, scales, _ = decompose_matrix(seq_matrix)
        gt_shape = self._labels_to_shape(self.assign_labels(sequences))
        pred_shape = self._labels_to_shape(self.predict_labels(X))
        gt_scale = scales[:, None]
        pred_scale = self.predict_scale(X)[:, None]
        return {
            "A": gt_shape * gt_scale,
            "B": pred_shape * gt_scale,
            "C": gt_shape * pred_scale,
            "D": pred_shape * pred_scale,
        }

    def predict_case(self, x, sequence, case: str) -> np.ndarray:
        if case not in CASES:
            raise ValueError(f"case must be one of {CASES}, got {case!r}")
        X = np.asarray(x, dtype=np.float64)[None, :]
        return self.predict_cases(X, [sequence])[case][0]

    def classifier_importances(self) -> np.ndarray:
        """(k, n_features) importance matrix, one row per period classifier."""
        return np.stack([clf.feature_importances() for clf in self.classifiers])

    def regressor_importances(self) -> np.ndarray:
        return self.regressor.feature_importances()

    def to_dict(self) -> dict:
        return {
            "format": ARCHIVE_FORMAT,
            "version": ARCHIVE_VERSION,
            "config": self.config.to_dict(),
            "feature_names": list(self.feature_names),
            "memories": [
                {"period_index": m.period_index,
                 "prototypes": [[float(v) for v in row] for row in m.prototypes]}
                for m in self.memories
            ],
            "classifiers": [clf.to_dict() for clf in self.classifiers],
            "regressor": self.regressor.to_dict(),
        }

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_dict(), fh, sort_keys=True)
            fh.write("\n")

    @classmethod
    def from_dict(cls, d: dict) -> "TrainedFramework":
        if d.get("format") != ARCHIVE_FORMAT:
            raise ValueError("not a framework archive")
        if d.get("version") != ARCHIVE_VERSION:
            raise ValueError(f"unsupported archive version {d.get('version')!r}")
        config = FrameworkConfig.from_dict(d["config"])
        memories = [
            ShapeMemory(
                prototypes=np.asarray(m["prototypes"], dtype=np.float64),
                period_index=int(m["period_index"]),
            )
            for m in d["memories"]
        ]
        return cls(
            config=config,
            memories=memories,
            classifiers=[_model_from_dict(c) for c in d["classifiers"]],
            regressor=_model_from_dict(d["regressor"]),
            feature_names=tuple(d["feature_names"]),
        )

    @classmethod
    def load(cls, path) -> "TrainedFramework":
        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))


def _sequence_matrix(sequences, horizon: int) -> np.ndarray:
    """Stack sequences into an (n, L) float matrix, enforcing one length."""
    if isinstance(sequences, np.ndarray) and sequences.ndim == 2:
        if sequences.shape[1] != horizon:
            raise ValueError(
                f"sequences have length {sequences.shape[1]}, expected {horizon}")
        return np.ascontiguousarray(sequences, dtype=np.float64)
    rows = []
    for i, seq in enumerate(sequences):
        values = seq.values if isinstance(seq, EngagementSequence) else np.asarray(seq, dtype=np.float64)
        if values.shape != (horizon,):
            raise ValueError(f"sequence {i} has length {values.shape[-1]}, expected {horizon}")
        rows.append(values)
    if not rows:
        return np.zeros((0, horizon))
    return np.stack(rows)


def _component_seeds(seed: int, k: int) -> np.ndarray:
    # one seed per memory, per classifier, plus the regressor
    return np.random.SeedSequence(seed).generate_state(2 * k + 1)


def fit(X, sequences, config: FrameworkConfig | None = None,
        feature_names: tuple[str, ...] | None = None) -> TrainedFramework:
    """Train memories, per-period classifiers, and the scale regressor.

    Zero-scale (degenerate) samples are excluded from clustering and
    classifier targets but kept for the regressor with target
    normalize(0).
    """
    config = config or FrameworkConfig()
    X = np.ascontiguousarray(X, dtype=np.float64)
    if X.ndim != 2:
        raise ValueError("feature matrix must be 2-D")
    if X.shape[0] == 0:
        raise ValueError("cannot fit on an empty dataset")
    if not np.all(np.isfinite(X)):
        raise ValueError("features must be finite")
    seq_matrix = _sequence_matrix(sequences, config.horizon)
    if seq_matrix.shape[0] != X.shape[0]:
        raise ValueError("feature and sequence counts differ")
    if feature_names is None:
        feature_names = tuple(f"f{i:02d}" for i in range(X.shape[1]))
    if len(feature_names) != X.shape[1]:
        raise ValueError("feature_names length must match feature count")

    shapes, scales, degenerate = decompose_matrix(seq_matrix)
    live = ~degenerate
    if not np.any(live):
        raise ValueError("all sequences have zero scale; nothing to cluster")

    k = config.n_periods
    seeds = _component_seeds(config.seed, k)
    slices = split_periods(shapes[live], k)
    X_live = X[live]

    memories: list[ShapeMemory] = []
    classifiers = []
    for i in range(k):
        memory, labels = build_memory(
            slices[i], config.cluster_sizes[i], seed=int(seeds[i]),
            period_index=i, restarts=config.kmeans_restarts)
        if np.any(np.diff(memory.prototypes, axis=1) < -1e-9):
            raise AssertionError("prototype rows must be non-decreasing")
        clf = _make_classifier(config.classifier_kind, config.classifier_params,
                               seed=int(seeds[k + i]))
        clf.fit(X_live, labels)
        memories.append(memory)
        classifiers.append(clf)

    target = normalize_scale(scales, config.norm_scheme)
    reg = _make_regressor(config.regressor_kind, config.regressor_params,
                          seed=int(seeds[2 * k]))
    reg.fit(X, target)

    return TrainedFramework(
        config=config,
        memories=memories,
        classifiers=classifiers,
        regressor=reg,
        feature_names=tuple(feature_names),
    )
