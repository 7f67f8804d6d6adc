"""Reactive monitoring loop: detect on arrival, re-cluster only on change.

The run starts by clustering the first N elements (the reference window).
Every subsequent block of b new arrivals is tested against the current
model. When a block changes, a continuous detector re-clusters the window
that ends with the offending block; a restarting detector discards its
state and refills a fresh reference window from the next N arrivals,
testing none of them. Either way the current window keeps sliding one
block per iteration, so every clustering after the first is caused by a
change and the number of clusterings is the number of changes plus one.

Internally the loop buffers the stream tail in flat arrays and evaluates
the per-point predicate in chunks; between two changes the model is fixed,
so decisions are identical to testing one element at a time.
"""

from __future__ import annotations

import time
import tracemalloc
from dataclasses import dataclass, field
from typing import Callable, Iterable, Iterator

import numpy as np

from .detector import ChangeEvent, change_mask
from .features import ClusterModel
from .kmeans import KMeansConfig, fit_arrays
from .stream import EndOfStreamError, StreamElement

_CHUNK = 4096


@dataclass(frozen=True)
class DetectorConfig:
    window_width: int
    kmeans: KMeansConfig
    block_size: int = 1
    mode: str = "continuous"  # or "restarting"
    radius_floor: float = 0.0

    def __post_init__(self):
        if self.window_width < 1:
            raise ValueError("window_width must be positive")
        if self.window_width < self.kmeans.k:
            raise ValueError("window_width must be at least the cluster count")
        if not 1 <= self.block_size <= self.window_width:
            raise ValueError("block_size must be in [1, window_width]")
        if self.mode not in ("continuous", "restarting"):
            raise ValueError("mode must be 'continuous' or 'restarting'")
        if self.radius_floor < 0:
            raise ValueError("radius_floor cannot be negative")


@dataclass
class PipelineReport:
    change_count: int
    clustering_count: int
    points_processed: int
    points_skipped: int
    wall_time_ms: int
    peak_memory_bytes: int


@dataclass
class PipelineSinks:
    """Consumers called from the pipeline thread as results are produced."""

    on_event: Callable[[ChangeEvent], None] | None = None
    on_snapshot: Callable[[int, ClusterModel], None] | None = None


class _TailBuffer:
    """Array-backed buffer of the newest stretch of the stream.

    Rows are stream elements in order; ``base`` is the absolute index of
    row 0. Old rows are dropped once no window can need them again, so
    memory stays O(window + chunk).
    """

    def __init__(self):
        self.values: np.ndarray | None = None
        self.ts = np.empty(0)
        self.base = 0
        self.pulled = 0
        self.exhausted = False

    @property
    def end(self) -> int:
        return self.base + (0 if self.values is None else len(self.values))

    def pull(self, source: Iterator[StreamElement], count: int) -> int:
        """Append up to ``count`` elements; returns how many arrived."""
        if self.exhausted or count <= 0:
            return 0
        rows, stamps, got = [], [], 0
        for element in source:
            if element.index != self.pulled:
                raise ValueError(
                    f"stream indices must be consecutive from 0: expected "
                    f"{self.pulled}, got {element.index}"
                )
            rows.append(element.values)
            stamps.append(element.timestamp)
            self.pulled += 1
            got += 1
            if got == count:
                break
        else:
            self.exhausted = True
        if not rows:
            return 0
        new_values = np.asarray(rows, dtype=float)
        new_ts = np.asarray(stamps, dtype=float)
        if self.values is None:
            self.values, self.ts = new_values, new_ts
        else:
            if new_values.shape[1] != self.values.shape[1]:
                raise ValueError("all stream elements must share one dimension")
            self.values = np.concatenate([self.values, new_values])
            self.ts = np.concatenate([self.ts, new_ts])
        return got

    def ensure(self, source: Iterator[StreamElement], abs_end: int) -> bool:
        """Make rows up to absolute index ``abs_end`` available if possible."""
        missing = abs_end - self.end
        if missing > 0:
            self.pull(source, max(missing, _CHUNK))
        return self.end >= abs_end

    def rows(self, abs_start: int, abs_end: int) -> tuple[np.ndarray, np.ndarray]:
        lo, hi = abs_start - self.base, abs_end - self.base
        return self.values[lo:hi], self.ts[lo:hi]

    def compact(self, keep_from: int) -> None:
        cut = keep_from - self.base
        if cut >= _CHUNK:
            self.values = self.values[cut:].copy()
            self.ts = self.ts[cut:].copy()
            self.base = keep_from


def _peak_memory_bytes() -> int:
    if tracemalloc.is_tracing():
        return tracemalloc.get_traced_memory()[1]
    try:
        import resource

        return resource.getrusage(resource.RUSAGE_SELF).ru_maxrss * 1024
    except Exception:  # pragma: no cover - non-POSIX fallback
        return 0


def run_pipeline(
    stream: Iterable[StreamElement],
    cfg: DetectorConfig,
    sinks: PipelineSinks | None = None,
) -> PipelineReport:
    """Run the detector over a stream until it ends; returns the run report.

    Raises :class:`EndOfStreamError` if the stream is shorter than the
    window width. A restarting-mode change so close to the stream end that
    its fresh reference window cannot be filled is discarded: the partial
    refill is consumed but neither the event nor a clustering is produced,
    keeping clusterings == changes + 1 in every finished run.
    """
    sinks = sinks or PipelineSinks()
    started = time.perf_counter()
    source = iter(stream)
    buf = _TailBuffer()
    n, b = cfg.window_width, cfg.block_size

    got = buf.pull(source, n)
    if got < n:
        raise EndOfStreamError(requested=n, received=got)

    def refit(abs_start: int, abs_end: int) -> ClusterModel:
        values, ts = buf.rows(abs_start, abs_end)
        return fit_arrays(values, ts, cfg.kmeans)

    changes = 0
    clusterings = 0
    skipped = 0

    def emit_snapshot(at_index: int, model: ClusterModel) -> None:
        nonlocal clusterings
        clusterings += 1
        if sinks.on_snapshot is not None:
            sinks.on_snapshot(at_index, model)

    model = refit(0, n)
    emit_snapshot(n - 1, model)

    pos = n  # absolute index of the next untested element
    while True:
        if not buf.ensure(source, pos + b):
            break  # fewer than one block left; the loop ends cleanly
        n_blocks = min((buf.end - pos) // b, max(_CHUNK // b, 1))
        values, _ = buf.rows(pos, pos + n_blocks * b)
        mask = change_mask(values, model, cfg.radius_floor)
        per_block = mask.reshape(n_blocks, b)
        hit_blocks = np.flatnonzero(per_block.any(axis=1))
        if hit_blocks.size == 0:
            pos += n_blocks * b
            buf.compact(pos - n)
            continue

        blk = int(hit_blocks[0])
        s = pos + blk * b  # absolute start of the offending block
        offset = int(np.flatnonzero(per_block[blk])[0])
        event = ChangeEvent(
            index=s + offset,
            timestamp=float(buf.rows(s + offset, s + offset + 1)[1][0]),
            block_start=s,
            offending=(offset,),
        )

        if cfg.mode == "continuous":
            changes += 1
            if sinks.on_event is not None:
                sinks.on_event(event)
            model = refit(s + b - n, s + b)
            emit_snapshot(s + b - 1, model)
            pos = s + b
        else:
            if not buf.ensure(source, s + b + n):
                break  # refill cannot complete: trailing alarm is dropped
            changes += 1
            if sinks.on_event is not None:
                sinks.on_event(event)
            model = refit(s + b, s + b + n)
            emit_snapshot(s + b + n - 1, model)
            skipped += n
            pos = s + b + n
        buf.compact(pos - n)

    wall_ms = int(round((time.perf_counter() - started) * 1000))
    return PipelineReport(
        change_count=changes,
        clustering_count=clusterings,
        points_processed=buf.pulled,
        points_skipped=skipped,
        wall_time_ms=wall_ms,
        peak_memory_bytes=_peak_memory_bytes(),
    )
