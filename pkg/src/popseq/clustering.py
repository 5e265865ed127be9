"""K-means shape prototyping: Lloyd's algorithm, elbow scans, prototype memories."""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

__all__ = [
    "KMeansResult",
    "ShapeMemory",
    "ElbowCurve",
    "kmeans",
    "elbow_scan",
    "build_memory",
    "lookup",
    "assign_nearest",
]


@dataclass(frozen=True, eq=False)
class KMeansResult:
    centroids: np.ndarray  # (k, d)
    assignments: np.ndarray  # (n,) int
    inertia: float
    iterations: int


@dataclass(frozen=True, eq=False)
class ShapeMemory:
    """Per-period matrix of prototype shape slices, indexed by cluster label."""

    prototypes: np.ndarray  # (k, slice_len)
    period_index: int = 0

    @property
    def n_prototypes(self) -> int:
        return self.prototypes.shape[0]


@dataclass(frozen=True)
class ElbowCurve:
    entries: tuple[tuple[int, float], ...]  # (k, inertia) pairs

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["K", "inertia"])
            for k, inertia in self.entries:
                writer.writerow([k, repr(float(inertia))])


def _squared_distances(points: np.ndarray, centroids: np.ndarray) -> np.ndarray:
    """Pairwise squared Euclidean distances, (n, k)."""
    diff = points[:, None, :] - centroids[None, :, :]
    return np.einsum("nkd,nkd->nk", diff, diff)


def assign_nearest(points: np.ndarray, centroids: np.ndarray) -> np.ndarray:
    """Index of the nearest centroid per point; ties go to the lowest index."""
    return np.argmin(_squared_distances(points, centroids), axis=1)


def _kmeanspp_init(points: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    n = points.shape[0]
    centroids = np.empty((k, points.shape[1]), dtype=np.float64)
    first = rng.integers(n)
    centroids[0] = points[first]
    d2 = np.sum((points - centroids[0]) ** 2, axis=1)
    for j in range(1, k):
        total = d2.sum()
        if total > 0:
            probs = d2 / total
            choice = rng.choice(n, p=probs)
        else:
            # all points already covered; any pick keeps inertia at zero
            choice = int(rng.integers(n))
        centroids[j] = points[choice]
        d2 = np.minimum(d2, np.sum((points - centroids[j]) ** 2, axis=1))
    return centroids


def _lloyd(points, centroids, max_iter, tol):
    """Run Lloyd iterations from given centroids; empty clusters are reseeded
    to the point currently farthest from its assigned centroid."""
    k = centroids.shape[0]
    centroids = centroids.copy()
    iterations = 0
    for _ in range(max_iter):
        iterations += 1
        d2 = _squared_distances(points, centroids)
        labels = np.argmin(d2, axis=1)
        point_d2 = d2[np.arange(points.shape[0]), labels]
        new_centroids = centroids.copy()
        counts = np.bincount(labels, minlength=k)
        for j in range(k):
            if counts[j] > 0:
                new_centroids[j] = points[labels == j].mean(axis=0)
        for j in np.flatnonzero(counts == 0):
            far = int(np.argmax(point_d2))
            new_centroids[j] = points[far]
            point_d2[far] = -1.0  # each empty cluster grabs a distinct point
        shift = np.max(np.abs(new_centroids - centroids))
        centroids = new_centroids
        if shift < tol:
            break
    d2 = _squared_distances(points, centroids)
    labels = np.argmin(d2, axis=1)
    inertia = float(d2[np.arange(points.shape[0]), labels].sum())
    return KMeansResult(centroids, labels, inertia, iterations)


def kmeans(
    points,
    k: int,
    seed: int = 0,
    max_iter: int = 300,
    tol: float = 1e-6,
    restarts: int = 10,
) -> KMeansResult:
    """Best-of-``restarts`` Lloyd's K-means with k-means++ seeding.

    Deterministic for fixed arguments; ties between restarts keep the first.
    """
    points = np.asarray(points, dtype=np.float64)
    if points.ndim == 1:
        points = points[:, None]
    n = points.shape[0]
    if not 1 <= k <= n:
        raise ValueError(f"k must be in [1, {n}], got {k}")
    if max_iter < 1:
        raise ValueError("max_iter must be >= 1")
    if tol < 0:
        raise ValueError("tol must be >= 0")
    best = None
    for ss in np.random.SeedSequence(seed).spawn(max(1, restarts)):
        rng = np.random.Generator(np.random.PCG64(ss))
        init = _kmeanspp_init(points, k, rng)
        result = _lloyd(points, init, max_iter, tol)
        if best is None or result.inertia < best.inertia:
            best = result
    return best


def elbow_scan(
    points,
    k_range: tuple[int, int],
    seed: int = 0,
    restarts: int = 10,
    max_iter: int = 300,
    tol: float = 1e-6,
) -> ElbowCurve:
    """Inertia of the best clustering for each K in the inclusive range.

    Each K additionally warm-starts one run from the previous K's solution
    plus the farthest point as an extra centroid, which makes the curve
    non-increasing by construction.
    """
    points = np.asarray(points, dtype=np.float64)
    if points.ndim == 1:
        points = points[:, None]
    lo, hi = int(k_range[0]), int(k_range[1])
    if not 1 <= lo <= hi <= points.shape[0]:
        raise ValueError(f"k range [{lo}, {hi}] invalid for {points.shape[0]} points")
    entries = []
    prev = None
    for k in range(lo, hi + 1):
        best = kmeans(points, k, seed=seed, max_iter=max_iter, tol=tol, restarts=restarts)
        if prev is not None:
            d2 = _squared_distances(points, prev.centroids)
            far = int(np.argmax(d2[np.arange(points.shape[0]), prev.assignments]))
            init = np.vstack([prev.centroids, points[far]])
            warm = _lloyd(points, init, max_iter, tol)
            if warm.inertia < best.inertia:
                best = warm
        entries.append((k, best.inertia))
        prev = best
    return ElbowCurve(tuple(entries))


def build_memory(
    shape_slices,
    k: int,
    seed: int = 0,
    period_index: int = 0,
    restarts: int = 10,
) -> tuple[ShapeMemory, np.ndarray]:
    """Cluster period slices into k prototypes; labels are the classifier targets."""
    result = kmeans(shape_slices, k, seed=seed, restarts=restarts)
    memory = ShapeMemory(prototypes=result.centroids, period_index=period_index)
    return memory, result.assignments


def lookup(memory: ShapeMemory, label: int) -> np.ndarray:
    """Prototype row for a cluster label."""
    if not 0 <= label < memory.n_prototypes:
        raise IndexError(f"label {label} out of range [0, {memory.n_prototypes})")
    return memory.prototypes[label]
