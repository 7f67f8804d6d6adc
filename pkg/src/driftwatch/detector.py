"""The threshold-free change predicate.

A newly arriving point is a change point exactly when it lies strictly
outside every cluster of the reference model: for all i,
distance(x, centroid_i) > radius_i. A point at distance equal to a radius
is a member, not a change. A block of b points is a change when at least
one of its points is.

The decision is a pure function of the point and the model; no tunable
scalar is involved. The optional ``radius_floor`` (default 0, i.e. off)
substitutes max(radius, floor) for degenerate zero-radius clusters and is
an extension beyond the core method.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .features import ClusterModel
from .stream import Block, StreamElement


def distances_to_centroids(values: np.ndarray, centroids: np.ndarray) -> np.ndarray:
    """Euclidean distances from each of M points to each of K centroids, (M, K)."""
    diff = values[:, None, :] - centroids[None, :, :]
    return np.sqrt((diff * diff).sum(axis=2))


def change_mask(
    values: np.ndarray, model: ClusterModel, radius_floor: float = 0.0
) -> np.ndarray:
    """Per-point change decisions for a (M, d) batch, as a boolean mask."""
    values = np.asarray(values, dtype=float)
    if values.ndim != 2 or values.shape[1] != model.dims:
        raise ValueError(
            f"dimension mismatch: points have {values.shape[-1]}, model has {model.dims}"
        )
    dists = distances_to_centroids(values, model.centroids)
    radii = model.radii if radius_floor <= 0.0 else np.maximum(model.radii, radius_floor)
    return (dists > radii[None, :]).all(axis=1)


def point_is_change(
    x: StreamElement | Sequence[float], model: ClusterModel, radius_floor: float = 0.0
) -> bool:
    """True iff x is strictly outside every cluster's radius around its centroid."""
    v = np.asarray(x.values if isinstance(x, StreamElement) else x, dtype=float)
    return bool(change_mask(v[None, :], model, radius_floor)[0])


@dataclass(frozen=True)
class ChangeDecision:
    """Outcome of testing a block: changed iff any position offended.

    ``offending_indices`` are positions within the tested block (the first
    one only by default); ``distances`` are the K centroid distances of the
    first offending point, empty when nothing changed.
    """

    changed: bool
    offending_indices: tuple[int, ...]
    distances: tuple[float, ...]

    def __post_init__(self):
        if self.changed != bool(self.offending_indices):
            raise ValueError("changed must mirror offending_indices being non-empty")


def block_is_change(
    blk: Block,
    model: ClusterModel,
    radius_floor: float = 0.0,
    collect_all: bool = False,
) -> ChangeDecision:
    """Disjunction of the point predicate over a block.

    By default only the first offending position is listed; with
    ``collect_all`` every offending position is.
    """
    values = np.asarray([e.values for e in blk.elements], dtype=float)
    mask = change_mask(values, model, radius_floor)
    hits = np.flatnonzero(mask)
    if hits.size == 0:
        return ChangeDecision(False, (), ())
    first = int(hits[0])
    offending = tuple(int(i) for i in hits) if collect_all else (first,)
    dists = distances_to_centroids(values[first : first + 1], model.centroids)[0]
    return ChangeDecision(True, offending, tuple(float(v) for v in dists))


@dataclass(frozen=True)
class ChangeEvent:
    """Alarm record: the first offending point and where its block started."""

    index: int
    timestamp: float
    block_start: int
    offending: tuple[int, ...]  # positions within the tested block


def event_line(event: ChangeEvent) -> str:
    return json.dumps(
        {
            "index": int(event.index),
            "timestamp": float(event.timestamp),
            "block_start": int(event.block_start),
            "offending": [int(i) for i in event.offending],
        },
        separators=(",", ":"),
    )


def parse_event_line(line: str, context: str = "event") -> ChangeEvent:
    try:
        obj = json.loads(line)
        return ChangeEvent(
            int(obj["index"]),
            float(obj["timestamp"]),
            int(obj["block_start"]),
            tuple(int(i) for i in obj["offending"]),
        )
    except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
        raise ValueError(f"{context}: malformed change event ({exc!r})") from None


def load_events(path) -> list[ChangeEvent]:
    events = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            if line.strip():
                events.append(parse_event_line(line, context=f"{path}: line {lineno}"))
    return events
