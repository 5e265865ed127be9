"""Dataset container, CSV I/O, synthetic generation, and skewness.

Two CSV schemas are supported:

* engineered: ``post_id``, the 37 feature columns in schema order, then
  ``seq_d01..seq_dNN`` cumulative views (sequence columns optional for
  prediction-only inputs);
* raw: ``post_id``, the PostRecord columns (text fields, user stats,
  image attrs, ISO ``posted_at``; tags joined with ';'), then the same
  sequence columns.  Raw rows are engineered on load.

The generator emits the engineered schema.  Each sample picks one growth
archetype per generator period, driven by a pair of informative feature
columns; the concatenated per-period curves (equal growth shares, bounded
increment noise) form the shape, and the final scale is log-normal with
its log linearly tied to two further informative columns.  Derived
columns (the five user ratios, image aspect, daypart) are computed from
their source columns, so they inherit signal; everything else is
independent noise in a plausible range.
"""

from __future__ import annotations

import csv
import datetime as dt
import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .features import (
    FEATURE_NAMES,
    N_FEATURES,
    PostRecord,
    engineer_many,
)

log = logging.getLogger(__name__)

RAW_COLUMNS = (
    "post_id", "title", "description", "tags",
    "mean_views", "photo_count", "num_groups", "contacts",
    "groups_avg_pictures", "avg_groups_memb", "is_pro", "account_age_days",
    "img_width", "img_height", "img_aspect", "img_filesize_kb",
    "img_mean_brightness", "posted_at",
)
_RAW_NUMERIC = RAW_COLUMNS[4:17]
_RAW_TEXT = ("title", "description")


def _seq_columns(horizon: int) -> list[str]:
    return [f"seq_d{d:02d}" for d in range(1, horizon + 1)]


@dataclass(eq=False)
class Dataset:
    """In-memory dataset: ids, feature matrix, optional sequence matrix."""

    ids: tuple[str, ...]
    features: np.ndarray
    sequences: np.ndarray | None
    feature_names: tuple[str, ...] = FEATURE_NAMES
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.ids = tuple(str(i) for i in self.ids)
        self.features = np.ascontiguousarray(self.features, dtype=np.float64)
        if self.features.ndim != 2:
            raise ValueError("features must be 2-D")
        if self.features.shape[0] != len(self.ids):
            raise ValueError("ids and features row counts differ")
        if self.features.shape[1] != len(self.feature_names):
            raise ValueError("features width does not match feature_names")
        if self.sequences is not None:
            self.sequences = np.ascontiguousarray(self.sequences, dtype=np.float64)
            if self.sequences.ndim != 2 or self.sequences.shape[0] != len(self.ids):
                raise ValueError("sequences must be (n, horizon)")

    def __len__(self) -> int:
        return len(self.ids)

    @property
    def horizon(self) -> int:
        if self.sequences is None:
            raise ValueError("dataset has no sequences")
        return self.sequences.shape[1]

    def subset(self, indices) -> "Dataset":
        idx = np.asarray(indices, dtype=np.int64)
        return Dataset(
            ids=tuple(self.ids[i] for i in idx),
            features=self.features[idx],
            sequences=None if self.sequences is None else self.sequences[idx],
            feature_names=self.feature_names,
        )

    def __eq__(self, other) -> bool:
        # metadata is informational and excluded from equality
        if not isinstance(other, Dataset):
            return NotImplemented
        if self.ids != other.ids or self.feature_names != other.feature_names:
            return False
        if not np.array_equal(self.features, other.features):
            return False
        if (self.sequences is None) != (other.sequences is None):
            return False
        return self.sequences is None or np.array_equal(self.sequences, other.sequences)


def _format_cell(v: float) -> str:
    f = float(v)
    return str(int(f)) if f.is_integer() and abs(f) < 1e15 else repr(f)


def write_csv(dataset: Dataset, path) -> None:
    """Engineered-schema CSV at full precision (exact float round trip)."""
    header = ["post_id"] + list(dataset.feature_names)
    if dataset.sequences is not None:
        header += _seq_columns(dataset.horizon)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for i, pid in enumerate(dataset.ids):
            row = [pid] + [_format_cell(v) for v in dataset.features[i]]
            if dataset.sequences is not None:
                row += [_format_cell(v) for v in dataset.sequences[i]]
            writer.writerow(row)


def _parse_numeric(cell: str, row: int, column: str) -> float:
    if cell == "" or cell is None:
        log.warning("row %d: missing %s set to 0", row, column)
        return 0.0
    try:
        return float(cell)
    except ValueError:
        raise ValueError(f"row {row}: non-numeric {column} value {cell!r}") from None


def _check_sequence(values: np.ndarray, row: int) -> None:
    if not np.all(np.isfinite(values)):
        raise ValueError(f"row {row}: non-finite sequence value")
    if np.any(values < 0):
        raise ValueError(f"row {row}: negative sequence value")
    bad = np.nonzero(np.diff(values) < 0)[0]
    if bad.size:
        d = int(bad[0]) + 1
        raise ValueError(f"row {row}: seq_d{d:02d} > seq_d{d + 1:02d} (must be non-decreasing)")


def _split_header(header: list[str]):
    """(schema kind, n sequence columns). Sequence columns must be a
    contiguous tail named seq_d01..seq_dNN."""
    n_seq = 0
    while n_seq < len(header) and header[len(header) - 1 - n_seq].startswith("seq_d"):
        n_seq += 1
    body, tail = header[:len(header) - n_seq], header[len(header) - n_seq:]
    if tail != _seq_columns(n_seq):
        raise ValueError("sequence columns must be contiguous seq_d01..seq_dNN")
    if body == ["post_id"] + list(FEATURE_NAMES):
        return "engineered", n_seq
    if tuple(body) == RAW_COLUMNS:
        return "raw", n_seq
    raise ValueError("header matches neither the engineered nor the raw schema")


def load_csv(path) -> Dataset:
    """Load either schema; sequence-less files yield sequences=None."""
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ValueError("empty file: missing header") from None
        kind, horizon = _split_header(header)
        ids: list[str] = []
        seq_rows: list[np.ndarray] = []
        feat_rows: list[np.ndarray] = []
        records: list[PostRecord] = []
        for row_num, cells in enumerate(reader, start=1):
            if len(cells) != len(header):
                raise ValueError(
                    f"row {row_num}: expected {len(header)} cells, got {len(cells)}")
            ids.append(cells[0])
            body = cells[1:len(cells) - horizon]
            if kind == "engineered":
                feat_rows.append(np.array(
                    [_parse_numeric(c, row_num, name)
                     for c, name in zip(body, FEATURE_NAMES)]))
            else:
                records.append(_raw_record(body, row_num))
            if horizon:
                seq = np.array([_parse_numeric(c, row_num, name)
                                for c, name in zip(cells[len(cells) - horizon:],
                                                   _seq_columns(horizon))])
                _check_sequence(seq, row_num)
                seq_rows.append(seq)
    if kind == "raw":
        features = engineer_many(records)
    else:
        features = np.stack(feat_rows) if feat_rows else np.zeros((0, N_FEATURES))
    sequences = None
    if horizon:
        sequences = np.stack(seq_rows) if seq_rows else np.zeros((0, horizon))
    return Dataset(ids=tuple(ids), features=features, sequences=sequences)


def _raw_record(body: list[str], row: int) -> PostRecord:
    named = dict(zip(RAW_COLUMNS[1:], body))
    numeric = {col: _parse_numeric(named[col], row, col) for col in _RAW_NUMERIC}
    try:
        posted = dt.datetime.fromisoformat(named["posted_at"])
    except ValueError:
        raise ValueError(
            f"row {row}: posted_at {named['posted_at']!r} is not ISO format") from None
    tags = tuple(t for t in named["tags"].split(";") if t)
    try:
        return PostRecord(title=named["title"], description=named["description"],
                          tags=tags, posted_at=posted, **numeric)
    except ValueError as exc:
        raise ValueError(f"row {row}: {exc}") from None


def skewness(values) -> float:
    """Fisher-Pearson moment coefficient g1 = m3 / m2^(3/2)."""
    values = np.asarray(values, dtype=np.float64)
    if values.ndim != 1 or values.size < 3:
        raise ValueError("need at least 3 values")
    centered = values - values.mean()
    m2 = np.mean(centered ** 2)
    if m2 == 0:
        raise ValueError("skewness undefined for constant values")
    m3 = np.mean(centered ** 3)
    return float(m3 / m2 ** 1.5)


# ---------------------------------------------------------------------------
# synthetic generation

# per-column value ranges: (lo, hi, power, integer); power skews the draw
_COLUMN_RANGES = {
    0: (0, 12, 1.0, True), 1: (0, 80, 1.0, True), 2: (2, 10, 1.0, False),
    3: (0, 3, 1.0, True), 4: (0, 6, 1.0, True), 5: (0, 120, 1.0, True),
    6: (0, 600, 1.0, True), 7: (2, 10, 1.0, False), 8: (0, 4, 1.0, True),
    9: (0, 12, 1.0, True), 10: (0, 24, 1.0, True), 11: (0, 200, 1.0, True),
    12: (0, 8, 1.0, False), 13: (0, 4, 1.0, True), 14: (0, 8, 1.0, True),
    15: (0, 5000, 2.0, False), 16: (1, 5000, 1.0, True), 17: (0, 80, 1.0, True),
    18: (0, 2000, 1.0, True), 19: (0, 2000, 2.0, False), 20: (0, 5000, 1.5, False),
    21: (0, 1, 1.0, True), 22: (0, 3650, 1.0, False), 28: (320, 4000, 1.0, True),
    29: (240, 3000, 1.0, True), 31: (20, 8020, 2.0, False), 32: (0, 255, 1.0, False),
    33: (0, 23, 1.0, True), 34: (0, 6, 1.0, True), 35: (0, 3, 1.0, True),
}
_RATIO_SOURCES = (16, 17, 18, 19, 20)  # denominators for columns 23..27
_DERIVED_COLUMNS = (23, 24, 25, 26, 27, 30, 36)


@dataclass(frozen=True)
class SynthParams:
    """Generator knobs; defaults give a learnable but noisy corpus."""

    n_samples: int = 1000
    seed: int = 42
    horizon: int = 30
    n_archetypes: int = 3
    archetype_weights: tuple[float, ...] | None = None
    scale_mu: float = 0.0
    scale_sigma: float = 2.0
    scale_coef: float = 4.89
    shape_noise: float = 0.05
    label_noise: float = 0.05
    archetype_features: tuple[tuple[int, int], ...] = ((2, 7), (19, 20), (31, 32))
    scale_features: tuple[int, int] = (15, 22)

    def __post_init__(self):
        object.__setattr__(self, "archetype_features",
                           tuple(tuple(int(i) for i in pair)
                                 for pair in self.archetype_features))
        object.__setattr__(self, "scale_features",
                           tuple(int(i) for i in self.scale_features))
        if self.n_samples < 1:
            raise ValueError("n_samples must be >= 1")
        if self.horizon < 1 or self.horizon % len(self.archetype_features) != 0:
            raise ValueError("horizon must be a positive multiple of the period count")
        if self.n_archetypes < 2:
            raise ValueError("need at least 2 archetypes")
        if self.archetype_weights is not None:
            w = tuple(float(x) for x in self.archetype_weights)
            if len(w) != self.n_archetypes or any(x <= 0 for x in w):
                raise ValueError("weights must be positive, one per archetype")
            object.__setattr__(self, "archetype_weights", w)
        if self.scale_sigma <= 0:
            raise ValueError("scale_sigma must be > 0")
        if not 0 <= self.scale_coef <= self.scale_sigma * math.sqrt(6):
            raise ValueError("scale_coef must be in [0, scale_sigma*sqrt(6)]")
        if not 0 <= self.shape_noise < 1:
            raise ValueError("shape_noise must be in [0, 1)")
        if not 0 <= self.label_noise <= 1:
            raise ValueError("label_noise must be in [0, 1]")
        sets = [set(p) for p in self.archetype_features] + [set(self.scale_features)]
        if any(len(p) != 2 for p in self.archetype_features) or len(self.scale_features) != 2:
            raise ValueError("informative feature groups must be pairs")
        seen: set[int] = set()
        for s in sets:
            if len(s) != 2 or s & seen:
                raise ValueError("informative feature indices must be distinct and disjoint")
            seen |= s
        bad = seen - set(_COLUMN_RANGES)
        if bad:
            raise ValueError(
                f"indices {sorted(bad)} are derived or out of range; "
                "informative columns must be directly generated")

    @property
    def n_periods(self) -> int:
        return len(self.archetype_features)

    @property
    def weights(self) -> np.ndarray:
        if self.archetype_weights is None:
            return np.full(self.n_archetypes, 1.0 / self.n_archetypes)
        w = np.asarray(self.archetype_weights, dtype=np.float64)
        return w / w.sum()

    def to_dict(self) -> dict:
        return {
            "n_samples": self.n_samples,
            "seed": self.seed,
            "horizon": self.horizon,
            "n_archetypes": self.n_archetypes,
            "archetype_weights":
                None if self.archetype_weights is None else list(self.archetype_weights),
            "scale_mu": self.scale_mu,
            "scale_sigma": self.scale_sigma,
            "scale_coef": self.scale_coef,
            "shape_noise": self.shape_noise,
            "label_noise": self.label_noise,
            "archetype_features": [list(p) for p in self.archetype_features],
            "scale_features": list(self.scale_features),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "SynthParams":
        kwargs = dict(d)
        if kwargs.get("archetype_weights") is not None:
            kwargs["archetype_weights"] = tuple(kwargs["archetype_weights"])
        if "archetype_features" in kwargs:
            kwargs["archetype_features"] = tuple(tuple(p) for p in kwargs["archetype_features"])
        if "scale_features" in kwargs:
            kwargs["scale_features"] = tuple(kwargs["scale_features"])
        return cls(**kwargs)


def _irwin_hall2_ppf(q: np.ndarray) -> np.ndarray:
    """Quantiles of the sum of two independent U(0,1) draws."""
    q = np.asarray(q, dtype=np.float64)
    lo = np.sqrt(2 * q)
    hi = 2 - np.sqrt(2 * (1 - q))
    return np.where(q <= 0.5, lo, hi)


def _column_values(col: int, u: np.ndarray) -> np.ndarray:
    lo, hi, power, as_int = _COLUMN_RANGES[col]
    if as_int:
        return np.floor(u * (hi - lo + 1)) + lo
    return lo + (hi - lo) * u ** power


def _archetype_exponents(m: int) -> np.ndarray:
    # concave (fast-saturating) through convex (late-burst) growth curves
    return np.geomspace(0.35, 2.85, m)


def synth_generate(params: SynthParams) -> Dataset:
    """Deterministic synthetic dataset; meta records per-period archetypes."""
    n = params.n_samples
    g = params.n_periods
    m = params.n_archetypes
    horizon = params.horizon
    p = horizon // g
    weights = params.weights
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(params.seed)))

    # latents first, then noise columns, in a fixed order
    u_arch = rng.random((g, 2, n))
    noise_mask = rng.random((g, n)) < params.label_noise
    resample_u = rng.random((g, n))
    u_scale = rng.random((2, n))
    z = rng.standard_normal(n)
    inc_noise = rng.uniform(-params.shape_noise, params.shape_noise, (n, horizon))

    cum_w = np.cumsum(weights)
    thresholds = _irwin_hall2_ppf(cum_w[:-1])
    arch = np.empty((g, n), dtype=np.int64)
    for j in range(g):
        drawn = np.searchsorted(thresholds, u_arch[j, 0] + u_arch[j, 1], side="right")
        resampled = np.searchsorted(cum_w, resample_u[j], side="right")
        arch[j] = np.where(noise_mask[j], resampled, drawn)

    gammas = _archetype_exponents(m)
    pos = np.arange(1, p + 1) / p
    increments = np.empty((n, horizon))
    for j in range(g):
        cum = pos[None, :] ** gammas[arch[j]][:, None]
        inc = np.diff(cum, axis=1, prepend=0.0) / g
        increments[:, j * p:(j + 1) * p] = inc
    increments *= 1.0 + inc_noise
    shapes = np.cumsum(increments, axis=1)
    shapes /= shapes[:, -1:]

    ln_scale = (params.scale_mu
                + params.scale_coef * (u_scale[0] + u_scale[1] - 1.0)
                + math.sqrt(max(params.scale_sigma ** 2 - params.scale_coef ** 2 / 6, 0.0)) * z)
    scale = np.exp(ln_scale)

    sequences = np.maximum.accumulate(np.round(shapes * scale[:, None]), axis=1)
    sequences[:, -1] = np.maximum(sequences[:, -1], 1.0)

    informative = {pair[idx]: u_arch[j, idx]
                   for j, pair in enumerate(params.archetype_features)
                   for idx in (0, 1)}
    informative[params.scale_features[0]] = u_scale[0]
    informative[params.scale_features[1]] = u_scale[1]

    features = np.zeros((n, N_FEATURES))
    for col in range(N_FEATURES):
        if col in _DERIVED_COLUMNS:
            continue
        u = informative.get(col)
        if u is None:
            u = rng.random(n)
        features[:, col] = _column_values(col, u)

    mv = features[:, 15]
    for offset, src in enumerate(_RATIO_SOURCES):
        den = features[:, src]
        features[:, 23 + offset] = np.where(den > 0, mv / np.where(den > 0, den, 1.0), 0.0)
    features[:, 30] = features[:, 28] / features[:, 29]
    hour = features[:, 33]
    features[:, 36] = np.select(
        [(hour >= 6) & (hour <= 10), (hour >= 11) & (hour <= 14),
         (hour >= 15) & (hour <= 17), (hour >= 18) & (hour <= 21)],
        [0.0, 1.0, 2.0, 3.0], default=4.0)

    return Dataset(
        ids=tuple(f"s{i:06d}" for i in range(n)),
        features=features,
        sequences=sequences,
        meta={"archetypes": arch, "params": params},
    )
