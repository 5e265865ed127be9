"""Truncated metrics, k-fold protocol, and ablation drivers.

Per-sample errors are computed over the full horizon, then aggregated by
sorting and dropping ``floor(trim_fraction * n)`` samples from EACH tail
before taking the mean or median.  All reports carry per-fold values
plus mean and std (population std, ddof=0) across folds.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field, replace

import numpy as np

from .framework import CASES, FrameworkConfig, _sequence_matrix, fit
from .sequences import NormScheme, decompose_matrix

METRICS = ("trmse_mean", "trmse_median", "tmae_mean", "tmae_median")
METRIC_DISPLAY = {
    "trmse_mean": "tRMSE_mean",
    "trmse_median": "tRMSE_median",
    "tmae_mean": "tMAE_mean",
    "tmae_median": "tMAE_median",
}

ABLATION_AXES = ("norm_scheme", "c_value", "period_length", "cluster_sizes", "model")


def per_sample_error(pred, truth, kind: str = "rmse") -> float:
    """RMSE or MAE between one predicted and one true sequence."""
    pred = np.asarray(pred, dtype=np.float64)
    truth = np.asarray(truth, dtype=np.float64)
    if pred.shape != truth.shape:
        raise ValueError(f"length mismatch: {pred.shape} vs {truth.shape}")
    return float(per_sample_errors(pred[None, :], truth[None, :], kind)[0])


def per_sample_errors(pred: np.ndarray, truth: np.ndarray, kind: str = "rmse") -> np.ndarray:
    """Row-wise RMSE or MAE for (n, L) prediction and truth matrices."""
    diff = np.asarray(pred, dtype=np.float64) - np.asarray(truth, dtype=np.float64)
    if kind == "rmse":
        return np.sqrt(np.mean(diff * diff, axis=-1))
    if kind == "mae":
        return np.mean(np.abs(diff), axis=-1)
    raise ValueError(f"kind must be 'rmse' or 'mae', got {kind!r}")


def truncated_aggregate(errors, trim_fraction: float = 0.25,
                        aggregate: str = "mean") -> float:
    """Sort, drop floor(f*n) from each tail, then mean or median the rest."""
    errors = np.asarray(errors, dtype=np.float64)
    if errors.ndim != 1 or errors.size == 0:
        raise ValueError("errors must be a non-empty 1-D list")
    if not 0.0 <= trim_fraction < 0.5:
        raise ValueError("trim_fraction must be in [0, 0.5)")
    if aggregate not in ("mean", "median"):
        raise ValueError(f"aggregate must be 'mean' or 'median', got {aggregate!r}")
    ordered = np.sort(errors)
    drop = math.floor(trim_fraction * ordered.size)
    kept = ordered[drop:ordered.size - drop]
    if kept.size == 0:  # unreachable for f < 0.5; guard stays for safety
        kept = ordered
    return float(np.mean(kept) if aggregate == "mean" else np.median(kept))


def kfold_split(n: int, folds: int, seed: int = 42) -> list[tuple[np.ndarray, np.ndarray]]:
    """Seeded shuffle then contiguous near-equal test chunks.

    The first n % folds test sets get one extra sample. Returned index
    arrays are sorted ascending.
    """
    if folds < 2:
        raise ValueError("folds must be >= 2")
    if n < folds:
        raise ValueError(f"need at least {folds} samples, got {n}")
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed)))
    perm = rng.permutation(n)
    base, rem = divmod(n, folds)
    splits = []
    start = 0
    for i in range(folds):
        size = base + (1 if i < rem else 0)
        test = perm[start:start + size]
        train = np.concatenate([perm[:start], perm[start + size:]])
        splits.append((np.sort(train), np.sort(test)))
        start += size
    return splits


@dataclass
class EvalReport:
    """Per-case truncated metrics aggregated over folds."""

    folds: int
    trim_fraction: float
    config: FrameworkConfig
    cases: dict[str, dict[str, dict]]
    # per fold, per case: {"rmse": (n_test,), "mae": (n_test,)}; not serialized
    per_sample: list[dict[str, dict[str, np.ndarray]]] = field(default_factory=list)

    def metric(self, case: str, name: str) -> tuple[float, float]:
        entry = self.cases[case][name]
        return entry["mean"], entry["std"]

    def to_dict(self) -> dict:
        return {
            "folds": self.folds,
            "trim_fraction": self.trim_fraction,
            "config": self.config.to_dict(),
            "cases": self.cases,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2) + "\n"

    def to_text(self) -> str:
        out = io.StringIO()
        header = ["case"] + [METRIC_DISPLAY[m] for m in METRICS]
        rows = [header]
        for case in CASES:
            row = [case]
            for m in METRICS:
                mean, std = self.metric(case, m)
                row.append(f"{mean:.4f} +/- {std:.4f}")
            rows.append(row)
        widths = [max(len(r[i]) for r in rows) for i in range(len(header))]
        for r in rows:
            out.write("  ".join(cell.ljust(w) for cell, w in zip(r, widths)).rstrip() + "\n")
        return out.getvalue()


def _aggregate_folds(fold_values: dict[str, dict[str, list[float]]]) -> dict:
    cases = {}
    for case, metrics in fold_values.items():
        cases[case] = {}
        for name, values in metrics.items():
            arr = np.asarray(values, dtype=np.float64)
            cases[case][name] = {
                "mean": float(arr.mean()),
                "std": float(arr.std()),
                "per_fold": [float(v) for v in values],
            }
    return cases


def _fold_metrics(case_preds: dict[str, np.ndarray], truth: np.ndarray,
                  trim_fraction: float):
    """Truncated metric values and raw per-sample errors for one fold."""
    values: dict[str, dict[str, float]] = {}
    samples: dict[str, dict[str, np.ndarray]] = {}
    for case, pred in case_preds.items():
        rmse = per_sample_errors(pred, truth, "rmse")
        mae = per_sample_errors(pred, truth, "mae")
        values[case] = {
            "trmse_mean": truncated_aggregate(rmse, trim_fraction, "mean"),
            "trmse_median": truncated_aggregate(rmse, trim_fraction, "median"),
            "tmae_mean": truncated_aggregate(mae, trim_fraction, "mean"),
            "tmae_median": truncated_aggregate(mae, trim_fraction, "median"),
        }
        samples[case] = {"rmse": rmse, "mae": mae}
    return values, samples


def run_protocol(X, sequences, config: FrameworkConfig | None = None,
                 folds: int = 3, seed: int = 42, trim_fraction: float = 0.25,
                 splits=None) -> EvalReport:
    """Cross-validated four-case evaluation.

    ``splits`` overrides the seeded k-fold partition; ablations pass the
    same splits to every cell so comparisons are paired.
    """
    config = config or FrameworkConfig()
    X = np.ascontiguousarray(X, dtype=np.float64)
    seq_matrix = _sequence_matrix(sequences, config.horizon)
    n = X.shape[0]
    if seq_matrix.shape[0] != n:
        raise ValueError("feature and sequence counts differ")
    if splits is None:
        splits = kfold_split(n, folds, seed)
    fold_values: dict[str, dict[str, list[float]]] = {
        case: {m: [] for m in METRICS} for case in CASES}
    per_sample = []
    for train, test in splits:
        fw = fit(X[train], seq_matrix[train], config)
        preds = fw.predict_cases(X[test], seq_matrix[test])
        values, samples = _fold_metrics(preds, seq_matrix[test], trim_fraction)
        for case in CASES:
            for m in METRICS:
                fold_values[case][m].append(values[case][m])
        per_sample.append(samples)
    return EvalReport(
        folds=len(splits),
        trim_fraction=trim_fraction,
        config=config,
        cases=_aggregate_folds(fold_values),
        per_sample=per_sample,
    )


def baseline_metrics(sequences, horizon: int = 30, folds: int = 3, seed: int = 42,
                     trim_fraction: float = 0.25, splits=None,
                     scale_mode: str = "median") -> dict[str, dict]:
    """Featureless reference: train-set mean shape times a scale guess.

    scale_mode "median" uses the train-set median scale for every test
    sample (fully blind, compare against Case D); "gt" uses each test
    sample's true scale (compare against Case B).
    """
    if scale_mode not in ("median", "gt"):
        raise ValueError("scale_mode must be 'median' or 'gt'")
    seq_matrix = _sequence_matrix(sequences, horizon)
    n = seq_matrix.shape[0]
    if splits is None:
        splits = kfold_split(n, folds, seed)
    fold_values = {"baseline": {m: [] for m in METRICS}}
    for train, test in splits:
        shapes, scales, degenerate = decompose_matrix(seq_matrix[train])
        live = ~degenerate
        mean_shape = shapes[live].mean(axis=0) if np.any(live) else np.zeros(horizon)
        if scale_mode == "median":
            scale = np.full(test.size, float(np.median(scales)))
        else:
            scale = seq_matrix[test][:, -1]
        pred = mean_shape[None, :] * scale[:, None]
        values, _ = _fold_metrics({"baseline": pred}, seq_matrix[test], trim_fraction)
        for m in METRICS:
            fold_values["baseline"][m].append(values["baseline"][m])
    return _aggregate_folds(fold_values)["baseline"]


def _config_for(axis: str, value, base: FrameworkConfig) -> tuple[str, FrameworkConfig]:
    """(row label, config) for one ablation cell."""
    if axis == "norm_scheme":
        if isinstance(value, NormScheme):
            scheme = value
        elif isinstance(value, dict):
            scheme = NormScheme.from_dict(value)
        else:
            factories = {"none": NormScheme.none, "log": NormScheme.log,
                         "ratio-log": NormScheme.ratio_log, "log-log": NormScheme.log_log}
            if value not in factories:
                raise ValueError(f"unknown norm scheme {value!r}")
            scheme = factories[value]()
        return scheme.label(), replace(base, norm_scheme=scheme)
    if axis == "c_value":
        c = float(value)
        return f"c={c:g}", replace(base, norm_scheme=NormScheme.log_log(c))
    if axis == "period_length":
        p = int(value)
        return f"p_len={p}", base.with_period_length(p)
    if axis == "cluster_sizes":
        sizes = tuple(int(v) for v in value)
        return "(" + ",".join(str(s) for s in sizes) + ")", replace(base, cluster_sizes=sizes)
    if axis == "model":
        if value not in ("forest", "ridge"):
            raise ValueError(f"unknown model kind {value!r}")
        return str(value), replace(base, classifier_kind=value, regressor_kind=value)
    raise ValueError(f"axis must be one of {ABLATION_AXES}, got {axis!r}")


@dataclass
class AblationTable:
    axis: str
    rows: list[tuple[str, EvalReport]]

    def report(self, label: str) -> EvalReport:
        for row_label, report in self.rows:
            if row_label == label:
                return report
        raise KeyError(label)

    def to_dict(self) -> dict:
        return {
            "axis": self.axis,
            "rows": [{"value": label, "report": rep.to_dict()}
                     for label, rep in self.rows],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2) + "\n"

    def to_csv(self) -> str:
        out = io.StringIO()
        writer = csv.writer(out, lineterminator="\n")
        header = [self.axis]
        for case in CASES:
            for m in METRICS:
                header.append(f"{case}_{METRIC_DISPLAY[m]}")
                header.append(f"{case}_{METRIC_DISPLAY[m]}_std")
        writer.writerow(header)
        for label, rep in self.rows:
            row = [label]
            for case in CASES:
                for m in METRICS:
                    mean, std = rep.metric(case, m)
                    row.append(repr(mean))
                    row.append(repr(std))
            writer.writerow(row)
        return out.getvalue()


def run_ablation(X, sequences, axis: str, values, base_config: FrameworkConfig | None = None,
                 folds: int = 3, seed: int = 42, trim_fraction: float = 0.25) -> AblationTable:
    """One run_protocol per axis value with shared fold splits."""
    base = base_config or FrameworkConfig()
    values = list(values)
    if not values:
        raise ValueError("values must be non-empty")
    cells = [_config_for(axis, v, base) for v in values]
    n = np.ascontiguousarray(X, dtype=np.float64).shape[0]
    splits = kfold_split(n, folds, seed)
    rows = []
    for label, config in cells:
        report = run_protocol(X, sequences, config, folds=folds, seed=seed,
                              trim_fraction=trim_fraction, splits=splits)
        rows.append((label, report))
    return AblationTable(axis=axis, rows=rows)
