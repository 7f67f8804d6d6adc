"""Batch k-means over a reference window, producing a ClusterModel.

Lloyd iterations with either uniform-random or ++-style seeding, a fixed
64-bit RNG seed for bit-identical reruns, lowest-index tie-breaking on
assignment, and farthest-point re-seeding of clusters that go empty. The
finished model always has exactly k non-empty clusters; the micro-cluster
of each is the exact summary of its assigned points.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .features import ClusterModel, MicroCluster
from .stream import StreamElement

SEEDINGS = ("plus-plus", "uniform-random")


class InsufficientPointsError(ValueError):
    """Fewer input points than requested clusters."""


class DegenerateSeedingError(ValueError):
    """Fewer distinct input points than requested seeds."""


class DegenerateDataError(ValueError):
    """No assignment with k non-empty clusters exists for this input."""


@dataclass(frozen=True)
class KMeansConfig:
    k: int
    seeding: str = "plus-plus"
    max_iterations: int = 100
    tolerance: float = 1e-9  # max centroid displacement to declare convergence
    rng_seed: int = 0

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("k must be at least 1")
        if self.seeding not in SEEDINGS:
            raise ValueError(f"seeding must be one of {SEEDINGS}")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be at least 1")
        if self.tolerance < 0:
            raise ValueError("tolerance cannot be negative")


def _as_value_array(points) -> np.ndarray:
    """Coerce StreamElements or raw rows to a (n, d) float array."""
    rows = [p.values if isinstance(p, StreamElement) else p for p in points]
    if rows:
        d = len(rows[0])
        if any(len(r) != d for r in rows):
            raise ValueError("all points must share one dimension")
    return np.asarray(rows, dtype=float)


def _sq_dists_to(values: np.ndarray, x2: np.ndarray, center: np.ndarray) -> np.ndarray:
    d2 = x2 + (center * center).sum() - 2.0 * (values @ center)
    return np.maximum(d2, 0.0, out=d2)


def _seed_plus_plus(values: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    """++-style seeding: next seed drawn with probability ~ squared distance
    to the nearest already-chosen seed, so duplicates of chosen seeds have
    zero mass and seeds land on distinct points whenever k distinct points
    exist."""
    n = len(values)
    if n < k:
        raise InsufficientPointsError(f"need at least {k} points, got {n}")
    x2 = (values * values).sum(axis=1)
    seeds = np.empty((k, values.shape[1]))
    chosen: list[int] = [int(rng.integers(n))]
    seeds[0] = values[chosen[0]]
    d2 = _sq_dists_to(values, x2, seeds[0])
    for j in range(1, k):
        total = float(d2.sum())
        if total > 0.0:
            idx = int(rng.choice(n, p=d2 / total))
        else:
            # All remaining mass is zero. Genuine degeneracy (fewer distinct
            # points than seeds) is an error; numerical underflow falls back
            # to a uniform draw over not-yet-chosen points.
            if len(np.unique(values, axis=0)) < k:
                raise DegenerateSeedingError(
                    f"need {k} distinct points for {k} seeds"
                )
            remaining = np.setdiff1d(np.arange(n), np.asarray(chosen))
            idx = int(rng.choice(remaining))
        chosen.append(idx)
        seeds[j] = values[idx]
        np.minimum(d2, _sq_dists_to(values, x2, seeds[j]), out=d2)
    return seeds


def seed_plus_plus(points, k: int, rng_seed: int) -> np.ndarray:
    """Pick k seed vectors from ``points`` (++-style), deterministically."""
    values = _as_value_array(points)
    return _seed_plus_plus(values, k, np.random.default_rng(rng_seed))


def _seed_uniform(values: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    n = len(values)
    if n < k:
        raise InsufficientPointsError(f"need at least {k} points, got {n}")
    return values[rng.choice(n, size=k, replace=False)]


def _assign(values: np.ndarray, x2: np.ndarray, centroids: np.ndarray) -> np.ndarray:
    """Nearest-centroid labels; argmin breaks ties toward the lower index."""
    d2 = x2[:, None] + (centroids * centroids).sum(axis=1)[None, :] - 2.0 * (
        values @ centroids.T
    )
    return d2.argmin(axis=1)


def _repair_empty(
    values: np.ndarray, x2: np.ndarray, centroids: np.ndarray, counts: np.ndarray
) -> None:
    """Re-seed each empty cluster on the point farthest from its centroid.

    Points claimed within one repair pass are not reused, so two empty
    clusters cannot land on the same point.
    """
    claimed: set[int] = set()
    for i in np.flatnonzero(counts == 0):
        d2 = _sq_dists_to(values, x2, centroids[i])
        order = np.argsort(d2)[::-1]
        for idx in order:
            if int(idx) not in claimed:
                claimed.add(int(idx))
                centroids[i] = values[idx]
                break


def _cluster_sums(
    values: np.ndarray, labels: np.ndarray, k: int
) -> tuple[np.ndarray, np.ndarray]:
    counts = np.bincount(labels, minlength=k)
    sums = np.empty((k, values.shape[1]))
    for p in range(values.shape[1]):
        sums[:, p] = np.bincount(labels, weights=values[:, p], minlength=k)
    return counts, sums


def fit_arrays(
    values: np.ndarray,
    timestamps: np.ndarray,
    cfg: KMeansConfig,
    iteration_trace: list | None = None,
) -> ClusterModel:
    """Array-level k-means core; ``kmeans_fit`` is the element-level wrapper.

    ``iteration_trace``, when given, receives one (wcss, repaired) pair per
    Lloyd iteration for diagnostics.
    """
    values = np.asarray(values, dtype=float)
    timestamps = np.asarray(timestamps, dtype=float)
    n = len(values)
    if n < cfg.k:
        raise InsufficientPointsError(f"need at least {cfg.k} points, got {n}")
    rng = np.random.default_rng(cfg.rng_seed)
    x2 = (values * values).sum(axis=1)
    if cfg.seeding == "plus-plus":
        centroids = _seed_plus_plus(values, cfg.k, rng)
    else:
        centroids = _seed_uniform(values, cfg.k, rng)

    for _ in range(cfg.max_iterations):
        labels = _assign(values, x2, centroids)
        counts, sums = _cluster_sums(values, labels, cfg.k)
        if iteration_trace is not None:
            d2 = x2[:, None] + (centroids * centroids).sum(axis=1)[None, :] - 2.0 * (
                values @ centroids.T
            )
            wcss = float(np.maximum(d2[np.arange(n), labels], 0.0).sum())
            iteration_trace.append((wcss, bool((counts == 0).any())))
        if (counts == 0).any():
            _repair_empty(values, x2, centroids, counts)
            continue
        new_centroids = sums / counts[:, None]
        shift2 = float(((new_centroids - centroids) ** 2).sum(axis=1).max())
        centroids = new_centroids
        if shift2 <= cfg.tolerance * cfg.tolerance:
            break

    # Final assignment; the model's centroids/radii derive from the exact
    # summaries of the assigned points, so repair any residual empties here.
    for _ in range(cfg.k + 1):
        labels = _assign(values, x2, centroids)
        counts, sums = _cluster_sums(values, labels, cfg.k)
        if (counts > 0).all():
            break
        _repair_empty(values, x2, centroids, counts)
    else:
        raise DegenerateDataError(
            f"could not form {cfg.k} non-empty clusters; input has too few distinct points"
        )

    clusters = []
    for i in range(cfg.k):
        mask = labels == i
        pts = values[mask]
        ts = timestamps[mask]
        clusters.append(
            MicroCluster(
                int(counts[i]),
                pts.sum(axis=0),
                (pts * pts).sum(axis=0),
                float(ts.sum()),
                float((ts * ts).sum()),
            )
        )
    return ClusterModel.from_clusters(clusters)


def kmeans_fit(
    points: Sequence[StreamElement],
    cfg: KMeansConfig,
    iteration_trace: list | None = None,
) -> ClusterModel:
    """Cluster a window of elements into exactly cfg.k non-empty clusters."""
    values = _as_value_array(points)
    timestamps = np.asarray(
        [p.timestamp if isinstance(p, StreamElement) else 0.0 for p in points], dtype=float
    )
    return fit_arrays(values, timestamps, cfg, iteration_trace)
