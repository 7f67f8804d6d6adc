"""Additive cluster summaries and the geometry derived from them.

A :class:`MicroCluster` stores, for a set of points, the count, the
per-dimension linear and squared sums, and the linear and squared sums of
the timestamps. These five fields are additive: the summary of a union of
two disjoint sets is the fieldwise sum of their summaries, so clusters can
be built and merged without retaining points. Centroid and radius (the
root-mean-square distance of the members from the centroid) are derived
from the fields alone.

A :class:`ClusterModel` is the finished clustering of a reference window:
K non-empty micro-clusters plus their derived centroids and radii, which is
all the change detector needs.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .stream import StreamElement


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.asarray(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class MicroCluster:
    """Summary (n, ls, ss, ts, tss) of n absorbed points.

    ``ls``/``ss`` are d-vectors of per-dimension sums and sums of squares;
    ``ts``/``tss`` are the scalar sums of timestamps and squared timestamps.
    An empty summary (n == 0) has all-zero fields.
    """

    n: int
    ls: np.ndarray
    ss: np.ndarray
    ts: float
    tss: float

    def __post_init__(self):
        object.__setattr__(self, "ls", _frozen(self.ls))
        object.__setattr__(self, "ss", _frozen(self.ss))
        if self.ls.ndim != 1 or self.ls.shape != self.ss.shape:
            raise ValueError("ls and ss must be vectors of equal length")
        if self.n < 0:
            raise ValueError("point count cannot be negative")
        if self.n == 0 and (self.ls.any() or self.ss.any() or self.ts or self.tss):
            raise ValueError("an empty micro-cluster must have all-zero sums")

    @property
    def dims(self) -> int:
        return self.ls.shape[0]

    @classmethod
    def empty(cls, dims: int) -> "MicroCluster":
        return cls(0, np.zeros(dims), np.zeros(dims), 0.0, 0.0)


def mc_from_point(x: StreamElement) -> MicroCluster:
    """Encode a single element as a micro-cluster."""
    v = np.asarray(x.values, dtype=float)
    return MicroCluster(1, v, v * v, x.timestamp, x.timestamp * x.timestamp)


def mc_from_points(values: np.ndarray, timestamps: np.ndarray) -> MicroCluster:
    """Summarize a batch of points given as a (n, d) array plus timestamps."""
    values = np.asarray(values, dtype=float)
    timestamps = np.asarray(timestamps, dtype=float)
    if values.ndim != 2:
        raise ValueError("values must be a (n, d) array")
    if timestamps.shape != (values.shape[0],):
        raise ValueError("need one timestamp per point")
    if values.shape[0] == 0:
        return MicroCluster.empty(values.shape[1])
    return MicroCluster(
        values.shape[0],
        values.sum(axis=0),
        (values * values).sum(axis=0),
        float(timestamps.sum()),
        float((timestamps * timestamps).sum()),
    )


def mc_merge(a: MicroCluster, b: MicroCluster) -> MicroCluster:
    """Summary of the union of two disjoint point sets: fieldwise sums."""
    if a.dims != b.dims:
        raise ValueError(f"dimension mismatch: {a.dims} vs {b.dims}")
    return MicroCluster(a.n + b.n, a.ls + b.ls, a.ss + b.ss, a.ts + b.ts, a.tss + b.tss)


def mc_centroid(m: MicroCluster) -> np.ndarray:
    """Mean of the absorbed points, ls / n."""
    if m.n == 0:
        raise ValueError("centroid of an empty micro-cluster is undefined")
    return m.ls / m.n


def mc_radius(m: MicroCluster) -> float:
    """Root-mean-square distance of the points from their centroid.

    Computed from the summary as sqrt(sum_p(ss[p]/n - (ls[p]/n)^2)); the
    variance sum is clamped at zero before the square root to absorb
    round-off.
    """
    if m.n == 0:
        raise ValueError("radius of an empty micro-cluster is undefined")
    mean = m.ls / m.n
    var = m.ss / m.n - mean * mean
    return float(np.sqrt(max(float(var.sum()), 0.0)))


def point_centroid_distance(x: StreamElement | Sequence[float], c: np.ndarray) -> float:
    """Euclidean distance between a point and a centroid."""
    v = np.asarray(x.values if isinstance(x, StreamElement) else x, dtype=float)
    c = np.asarray(c, dtype=float)
    if v.shape != c.shape:
        raise ValueError(f"dimension mismatch: {v.shape[0]} vs {c.shape[0]}")
    diff = c - v
    return float(np.sqrt((diff * diff).sum()))


@dataclass(frozen=True, eq=False)
class ClusterModel:
    """K non-empty micro-clusters with their derived centroids and radii."""

    clusters: tuple[MicroCluster, ...]
    centroids: np.ndarray  # (K, d)
    radii: np.ndarray  # (K,)

    def __post_init__(self):
        object.__setattr__(self, "centroids", _frozen(self.centroids))
        object.__setattr__(self, "radii", _frozen(self.radii))

    @classmethod
    def from_clusters(cls, clusters: Iterable[MicroCluster]) -> "ClusterModel":
        clusters = tuple(clusters)
        if not clusters:
            raise ValueError("a model needs at least one cluster")
        if any(m.n < 1 for m in clusters):
            raise ValueError("a finished model has no empty clusters")
        dims = clusters[0].dims
        if any(m.dims != dims for m in clusters):
            raise ValueError("all clusters must share one dimension")
        centroids = np.stack([mc_centroid(m) for m in clusters])
        radii = np.array([mc_radius(m) for m in clusters])
        return cls(clusters, centroids, radii)

    @property
    def k(self) -> int:
        return len(self.clusters)

    @property
    def dims(self) -> int:
        return self.clusters[0].dims


# ---------------------------------------------------------------------------
# Clustering snapshot serialization (JSONL, one clustering per line)
# ---------------------------------------------------------------------------


def snapshot_line(at_index: int, model: ClusterModel) -> str:
    """Serialize one clustering; centroid and radius are stored redundantly."""
    clusters = []
    for m, centroid, radius in zip(model.clusters, model.centroids, model.radii):
        clusters.append(
            {
                "n": int(m.n),
                "ls": [float(v) for v in m.ls],
                "ss": [float(v) for v in m.ss],
                "ts": float(m.ts),
                "tss": float(m.tss),
                "centroid": [float(v) for v in centroid],
                "radius": float(radius),
            }
        )
    return json.dumps({"at_index": int(at_index), "clusters": clusters}, separators=(",", ":"))


def parse_snapshot_line(line: str, context: str = "snapshot") -> tuple[int, ClusterModel]:
    """Parse one snapshot line, recomputing centroids/radii as a check.

    The stored redundant centroid/radius must match the values recomputed
    from the summary fields within 1e-9 relative, else the snapshot is
    rejected as corrupt.
    """
    try:
        obj = json.loads(line)
    except json.JSONDecodeError as exc:
        raise ValueError(f"{context}: invalid JSON ({exc})") from None
    try:
        at_index = int(obj["at_index"])
        clusters = []
        stored_centroids = []
        stored_radii = []
        for c in obj["clusters"]:
            clusters.append(
                MicroCluster(
                    int(c["n"]),
                    np.asarray(c["ls"], dtype=float),
                    np.asarray(c["ss"], dtype=float),
                    float(c["ts"]),
                    float(c["tss"]),
                )
            )
            stored_centroids.append(np.asarray(c["centroid"], dtype=float))
            stored_radii.append(float(c["radius"]))
    except (KeyError, TypeError) as exc:
        raise ValueError(f"{context}: malformed snapshot object ({exc!r})") from None
    model = ClusterModel.from_clusters(clusters)
    for i, (centroid, radius) in enumerate(zip(stored_centroids, stored_radii)):
        if not np.allclose(centroid, model.centroids[i], rtol=1e-9, atol=1e-12):
            raise ValueError(f"{context}: cluster {i} stored centroid disagrees with sums")
        if not np.isclose(radius, model.radii[i], rtol=1e-9, atol=1e-12):
            raise ValueError(f"{context}: cluster {i} stored radius disagrees with sums")
    return at_index, model


def load_snapshots(path: str | Path) -> list[tuple[int, ClusterModel]]:
    """Load a snapshot JSONL file; I/O and parse errors carry the path."""
    path = Path(path)
    out = []
    with path.open() as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            out.append(parse_snapshot_line(line, context=f"{path}: line {lineno}"))
    return out
