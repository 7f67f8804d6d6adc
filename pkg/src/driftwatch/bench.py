"""Sweep harness: run the pipeline across one varied axis, emit a table.

Each cell (axis value x mode) runs ``repetitions`` times; change counts
must agree across repetitions (they are seeded) and the reported time is
the median. Streams are loaded or generated up front so cell timing covers
the monitoring loop and re-clustering only, never file I/O. A failed cell
becomes an error row and the sweep continues.
"""

from __future__ import annotations

import gc
import statistics
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path

from .datagen import HyperplaneConfig, ShiftStreamConfig, gen_hyperplane, gen_shift_stream
from .pipeline import DetectorConfig, run_pipeline
from .stream import StreamElement, open_stream

AXES = ("window_width", "cluster_count")


@dataclass(frozen=True)
class SweepSpec:
    base: DetectorConfig  # fixed parameters; the swept field is overridden
    axis: str
    values: tuple[int, ...]
    input: str | Path | HyperplaneConfig | ShiftStreamConfig
    repetitions: int = 3
    modes: tuple[str, ...] = ("continuous", "restarting")
    timestamp_column: bool = False
    stream_format: str = "auto"
    strict_timing: bool = False
    workers: int = 1

    def __post_init__(self):
        if self.axis not in AXES:
            raise ValueError(f"axis must be one of {AXES}")
        if not self.values:
            raise ValueError("values must be non-empty")
        if any(v < 1 for v in self.values):
            raise ValueError("axis values must be positive integers")
        if list(self.values) != sorted(set(self.values)):
            raise ValueError("axis values must be strictly increasing")
        if self.repetitions < 1:
            raise ValueError("repetitions must be at least 1")
        if any(m not in ("continuous", "restarting") for m in self.modes):
            raise ValueError("modes must be continuous/restarting")
        if self.workers < 1:
            raise ValueError("workers must be at least 1")


@dataclass
class BenchRow:
    axis_value: int
    mode: str
    changes: int | None
    clusterings: int | None
    time_ms: int | None
    mem_bytes: int | None
    error: str = ""


def _load_elements(spec: SweepSpec) -> list[StreamElement]:
    if isinstance(spec.input, HyperplaneConfig):
        return gen_hyperplane(spec.input)[0]
    if isinstance(spec.input, ShiftStreamConfig):
        return gen_shift_stream(spec.input)[0]
    return list(
        open_stream(spec.input, fmt=spec.stream_format, timestamp_column=spec.timestamp_column)
    )


def _cell_config(spec: SweepSpec, axis_value: int, mode: str) -> DetectorConfig:
    cfg = replace(spec.base, mode=mode)
    if spec.axis == "window_width":
        return replace(cfg, window_width=axis_value)
    return replace(cfg, kmeans=replace(cfg.kmeans, k=axis_value))


def _run_cell(elements: list[StreamElement], cfg: DetectorConfig, repetitions: int,
              strict_timing: bool) -> tuple[int, int, int, int]:
    changes = clusterings = mem = None
    times = []
    for _ in range(repetitions):
        if strict_timing:
            gc.collect()
        report = run_pipeline(elements, cfg)
        if changes is None:
            changes, clusterings = report.change_count, report.clustering_count
        elif (changes, clusterings) != (report.change_count, report.clustering_count):
            raise AssertionError(
                "seeded repetitions disagree: "
                f"{(changes, clusterings)} vs "
                f"{(report.change_count, report.clustering_count)}"
            )
        times.append(report.wall_time_ms)
        mem = report.peak_memory_bytes
    return changes, clusterings, int(statistics.median(times)), mem


def _cell_task(args) -> BenchRow:
    elements, axis_value, mode, cfg, repetitions, strict = args
    try:
        changes, clusterings, time_ms, mem = _run_cell(elements, cfg, repetitions, strict)
        return BenchRow(axis_value, mode, changes, clusterings, time_ms, mem)
    except Exception as exc:
        return BenchRow(axis_value, mode, None, None, None, None, error=str(exc))


def run_sweep(spec: SweepSpec) -> list[BenchRow]:
    """Run every (axis value x mode) cell; order is values-major, then mode."""
    elements = _load_elements(spec)
    tasks = [
        (elements, value, mode, _cell_config(spec, value, mode), spec.repetitions,
         spec.strict_timing)
        for value in spec.values
        for mode in spec.modes
    ]
    if spec.workers > 1 and not spec.strict_timing:
        with ProcessPoolExecutor(max_workers=spec.workers) as pool:
            return list(pool.map(_cell_task, tasks))
    return [_cell_task(t) for t in tasks]


TABLE_COLUMNS = ("axis_value", "mode", "changes", "clusterings", "time_ms", "mem_bytes", "error")


def write_table(rows: list[BenchRow], path: str | Path) -> None:
    with Path(path).open("w") as fh:
        fh.write(",".join(TABLE_COLUMNS) + "\n")
        for r in rows:
            cells = [
                str(r.axis_value),
                r.mode,
                "" if r.changes is None else str(r.changes),
                "" if r.clusterings is None else str(r.clusterings),
                "" if r.time_ms is None else str(r.time_ms),
                "" if r.mem_bytes is None else str(r.mem_bytes),
                r.error.replace(",", ";").replace("\n", " "),
            ]
            fh.write(",".join(cells) + "\n")


def format_table(rows: list[BenchRow]) -> str:
    lines = [" ".join(f"{c:>12}" for c in TABLE_COLUMNS[:-1])]
    for r in rows:
        lines.append(
            f"{r.axis_value:>12} {r.mode:>12} "
            f"{'-' if r.changes is None else r.changes:>12} "
            f"{'-' if r.clusterings is None else r.clusterings:>12} "
            f"{'-' if r.time_ms is None else r.time_ms:>12} "
            f"{'-' if r.mem_bytes is None else r.mem_bytes:>12}"
            + (f"  ERROR: {r.error}" if r.error else "")
        )
    return "\n".join(lines)
