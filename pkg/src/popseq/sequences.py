"""Engagement sequences: shape/scale decomposition and scale normalization.

A cumulative view-count sequence splits into a shape (the curve rescaled to
end at 1) and a scale (the final count). Scales are heavily right skewed, so
regression targets go through one of four normalization schemes, each with an
exact inverse.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "EngagementSequence",
    "ShapeVector",
    "ScaleValue",
    "NormScheme",
    "decompose",
    "recompose",
    "decompose_matrix",
    "normalize_scale",
    "denormalize_scale",
]

DEFAULT_HORIZON = 30


def _as_float_array(values) -> np.ndarray:
    arr = np.asarray(values, dtype=np.float64)
    if arr.ndim != 1:
        raise ValueError(f"expected a 1-D sequence, got shape {arr.shape}")
    return arr


@dataclass(frozen=True, eq=False)
class EngagementSequence:
    """Cumulative daily view counts over the observation horizon."""

    values: np.ndarray

    def __post_init__(self):
        arr = _as_float_array(self.values)
        if arr.size == 0:
            raise ValueError("sequence must not be empty")
        if not np.all(np.isfinite(arr)):
            raise ValueError("sequence contains non-finite values")
        if np.any(arr < 0):
            raise ValueError("sequence contains negative values")
        if np.any(np.diff(arr) < 0):
            raise ValueError("sequence must be non-decreasing")
        arr.flags.writeable = False
        object.__setattr__(self, "values", arr)

    def __len__(self) -> int:
        return self.values.size

    @property
    def scale(self) -> float:
        return float(self.values[-1])


@dataclass(frozen=True, eq=False)
class ShapeVector:
    """A sequence divided by its scale; values in [0, 1], ending at 1.

    ``degenerate`` marks shapes coming from an all-zero sequence, which have
    no meaningful curve and are stored as all zeros.
    """

    values: np.ndarray
    degenerate: bool = False

    def __post_init__(self):
        arr = _as_float_array(self.values)
        if np.any(arr < 0) or np.any(arr > 1.0 + 1e-12):
            raise ValueError("shape values must lie in [0, 1]")
        if np.any(np.diff(arr) < 0):
            raise ValueError("shape must be non-decreasing")
        if self.degenerate:
            if np.any(arr != 0):
                raise ValueError("degenerate shape must be all zero")
        elif arr[-1] != 1.0:
            raise ValueError("non-degenerate shape must end at 1.0")
        arr.flags.writeable = False
        object.__setattr__(self, "values", arr)

    def __len__(self) -> int:
        return self.values.size


@dataclass(frozen=True)
class ScaleValue:
    """Final cumulative view count, optionally paired with its normalized form."""

    raw: float
    normalized: float | None = None

    def __post_init__(self):
        if not math.isfinite(self.raw) or self.raw < 0:
            raise ValueError(f"scale must be finite and >= 0, got {self.raw}")


@dataclass(frozen=True)
class NormScheme:
    """Scale normalization scheme.

    kind is one of:
      - "none":       identity
      - "log":        ln(raw + 1)
      - "ratio-log":  ln(raw / horizon + b)
      - "log-log":    ln(ln(raw + c) + c)

    Natural logarithm throughout; every scheme is strictly increasing on its
    domain and exactly invertible.
    """

    kind: str
    b: float = 1.0
    c: float = 1.0
    horizon: int = DEFAULT_HORIZON

    _KINDS = ("none", "log", "ratio-log", "log-log")

    def __post_init__(self):
        if self.kind not in self._KINDS:
            raise ValueError(f"unknown scheme kind {self.kind!r}")
        if self.b <= 0:
            raise ValueError("ratio-log offset b must be positive")
        if self.c <= 0:
            raise ValueError("log-log offset c must be positive")
        if self.horizon < 1:
            raise ValueError("horizon must be >= 1")

    @classmethod
    def none(cls) -> "NormScheme":
        return cls(kind="none")

    @classmethod
    def log(cls) -> "NormScheme":
        return cls(kind="log")

    @classmethod
    def ratio_log(cls, b: float = 1.0, horizon: int = DEFAULT_HORIZON) -> "NormScheme":
        return cls(kind="ratio-log", b=b, horizon=horizon)

    @classmethod
    def log_log(cls, c: float = 1.0) -> "NormScheme":
        return cls(kind="log-log", c=c)

    def label(self) -> str:
        if self.kind == "ratio-log":
            return f"ratio-log(b={self.b:g})"
        if self.kind == "log-log":
            return f"log-log(c={self.c:g})"
        return self.kind

    def to_dict(self) -> dict:
        return {"kind": self.kind, "b": self.b, "c": self.c, "horizon": self.horizon}

    @classmethod
    def from_dict(cls, d: dict) -> "NormScheme":
        return cls(
            kind=d["kind"],
            b=float(d.get("b", 1.0)),
            c=float(d.get("c", 1.0)),
            horizon=int(d.get("horizon", DEFAULT_HORIZON)),
        )


def decompose(seq) -> tuple[ShapeVector, ScaleValue]:
    """Split a sequence into its shape and scale.

    An all-zero sequence has scale 0 and a degenerate all-zero shape.
    """
    arr = seq.values if isinstance(seq, EngagementSequence) else EngagementSequence(seq).values
    scale = float(arr[-1])
    if scale == 0.0:
        return ShapeVector(np.zeros_like(arr), degenerate=True), ScaleValue(0.0)
    return ShapeVector(arr / scale), ScaleValue(scale)


def recompose(shape: ShapeVector, scale: ScaleValue | float) -> EngagementSequence:
    """Rebuild a sequence from shape and scale; inverse of :func:`decompose`."""
    raw = scale.raw if isinstance(scale, ScaleValue) else float(scale)
    values = shape.values if isinstance(shape, ShapeVector) else _as_float_array(shape)
    return EngagementSequence(values * raw)


def decompose_matrix(seqs: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Vectorized decomposition of an (n, L) matrix of sequences.

    Returns (shapes, scales, degenerate_mask). Degenerate rows get an all-zero
    shape.
    """
    seqs = np.asarray(seqs, dtype=np.float64)
    scales = seqs[:, -1].copy()
    degenerate = scales == 0.0
    safe = np.where(degenerate, 1.0, scales)
    shapes = seqs / safe[:, None]
    shapes[degenerate] = 0.0
    return shapes, scales, degenerate


def normalize_scale(raw, scheme: NormScheme):
    """Apply the scheme to a raw scale (scalar or array).

    Raises ValueError when an inner log argument is not positive, which can
    happen only for the log-log scheme with small c and a raw value close to
    zero.
    """
    x = np.asarray(raw, dtype=np.float64)
    if np.any(x < 0):
        raise ValueError("raw scale must be >= 0")
    if scheme.kind == "none":
        out = x.copy()
    elif scheme.kind == "log":
        out = np.log(x + 1.0)
    elif scheme.kind == "ratio-log":
        out = np.log(x / scheme.horizon + scheme.b)
    else:
        inner = np.log(x + scheme.c) + scheme.c
        if np.any(inner <= 0):
            bad = float(np.min(x))
            raise ValueError(
                f"log-log scheme with c={scheme.c:g} is undefined for raw={bad:g} "
                f"(inner log argument <= 0)"
            )
        out = np.log(inner)
    return out if isinstance(raw, np.ndarray) else float(out)


_EXP_CAP = 345.0  # caps outputs near 1e150 so even squared errors stay finite


def denormalize_scale(norm, scheme: NormScheme):
    """Invert :func:`normalize_scale`; the result is clamped to >= 0.

    Exponent arguments are capped so extreme model extrapolations saturate
    at a huge finite value instead of overflowing to inf.
    """
    z = np.asarray(norm, dtype=np.float64)
    if scheme.kind == "none":
        out = z.copy()
    elif scheme.kind == "log":
        out = np.exp(np.minimum(z, _EXP_CAP)) - 1.0
    elif scheme.kind == "ratio-log":
        out = (np.exp(np.minimum(z, _EXP_CAP)) - scheme.b) * scheme.horizon
    else:
        inner = np.exp(np.minimum(z, _EXP_CAP)) - scheme.c
        out = np.exp(np.minimum(inner, _EXP_CAP)) - scheme.c
    out = np.maximum(out, 0.0)
    return out if isinstance(norm, np.ndarray) else float(out)
