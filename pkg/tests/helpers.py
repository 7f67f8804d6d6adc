"""Shared test utilities: independent oracles and small builders.

The oracles here deliberately avoid the library's vectorized code paths:
the reference pipeline drives the public window operations one element at
a time, and the predicate oracle is plain Python arithmetic.
"""

from __future__ import annotations

import math

import numpy as np

from driftwatch import (
    Block,
    ChangeEvent,
    ClusterModel,
    DetectorConfig,
    EndOfStreamError,
    StreamElement,
    block_is_change,
    kmeans_fit,
    mc_from_points,
    snapshot_line,
    window_fill,
    window_slide,
)


def elements_from_array(arr, t0: float = 0.0) -> list[StreamElement]:
    arr = np.asarray(arr, dtype=float)
    return [
        StreamElement(tuple(float(v) for v in row), t0 + i, i)
        for i, row in enumerate(arr)
    ]


def indexed_elements(n: int, dims: int = 1) -> list[StreamElement]:
    """Elements whose single value equals their index; handy for window tests."""
    return [StreamElement((float(i),) * dims, float(i), i) for i in range(n)]


def model_from_groups(groups, t0: float = 0.0) -> ClusterModel:
    """Build a model whose clusters summarize the given point groups."""
    clusters = []
    for g in groups:
        g = np.asarray(g, dtype=float)
        clusters.append(mc_from_points(g, np.full(len(g), t0)))
    return ClusterModel.from_clusters(clusters)


def brute_point_change(values, model: ClusterModel, radius_floor: float = 0.0) -> bool:
    """Plain-Python rendition of the change predicate."""
    for mc, radius in zip(model.clusters, model.radii):
        center = [s / mc.n for s in mc.ls.tolist()]
        dist = math.sqrt(sum((c - float(x)) ** 2 for c, x in zip(center, values)))
        if dist <= max(float(radius), radius_floor):
            return False
    return True


def naive_pipeline(elements, cfg: DetectorConfig):
    """Reference monitoring loop built from the public one-step operations.

    Returns (events, snapshots, report_dict); snapshots are serialized lines
    so runs can be compared exactly.
    """
    consumed = 0

    def counting(source):
        nonlocal consumed
        for element in source:
            consumed += 1
            yield element

    source = counting(iter(elements))
    n, b = cfg.window_width, cfg.block_size
    window = window_fill(source, n)
    model = kmeans_fit(window.elements, cfg.kmeans)
    snapshots = [snapshot_line(window.last_index, model)]
    events: list[ChangeEvent] = []
    skipped = 0
    while True:
        try:
            window, blk = window_slide(window, b, source)
        except EndOfStreamError:
            break
        decision = block_is_change(blk, model, cfg.radius_floor)
        if not decision.changed:
            continue
        offset = decision.offending_indices[0]
        event = ChangeEvent(
            index=blk.start_index + offset,
            timestamp=blk.elements[offset].timestamp,
            block_start=blk.start_index,
            offending=(offset,),
        )
        if cfg.mode == "continuous":
            events.append(event)
            model = kmeans_fit(window.elements, cfg.kmeans)
            snapshots.append(snapshot_line(window.last_index, model))
        else:
            try:
                window = window_fill(source, n)
            except EndOfStreamError:
                break  # trailing alarm dropped: its reset cannot complete
            events.append(event)
            model = kmeans_fit(window.elements, cfg.kmeans)
            snapshots.append(snapshot_line(window.last_index, model))
            skipped += n
    report = {
        "change_count": len(events),
        "clustering_count": len(snapshots),
        "points_processed": consumed,
        "points_skipped": skipped,
    }
    return events, snapshots, report


def spearman(xs, ys) -> float:
    """Spearman rank correlation with average ranks for ties."""

    def ranks(vals):
        order = np.argsort(vals, kind="stable")
        r = np.empty(len(vals))
        sorted_vals = np.asarray(vals)[order]
        i = 0
        while i < len(vals):
            j = i
            while j + 1 < len(vals) and sorted_vals[j + 1] == sorted_vals[i]:
                j += 1
            r[order[i : j + 1]] = (i + j) / 2.0 + 1.0
            i = j + 1
        return r

    rx, ry = ranks(xs), ranks(ys)
    rx -= rx.mean()
    ry -= ry.mean()
    denom = math.sqrt(float((rx * rx).sum() * (ry * ry).sum()))
    return float((rx * ry).sum() / denom) if denom else 0.0
