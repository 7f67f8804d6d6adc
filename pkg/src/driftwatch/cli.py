"""Command-line front end: generate, detect, bench.

Exit codes: 0 success, 1 usage error, 2 runtime failure. The DRIFTWATCH_LOG
environment variable sets the log level.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import os
import sys
import tracemalloc
from pathlib import Path

from . import bench as bench_mod
from .datagen import (
    HyperplaneConfig,
    ShiftStreamConfig,
    gen_hyperplane,
    gen_shift_stream,
    write_ground_truth,
    write_labels,
)
from .detector import event_line
from .features import snapshot_line
from .kmeans import KMeansConfig
from .pipeline import DetectorConfig, PipelineSinks, run_pipeline
from .stream import open_stream, write_stream_csv, write_stream_jsonl

log = logging.getLogger("driftwatch")

USAGE_EXIT = 1
RUNTIME_EXIT = 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        raise SystemExit(USAGE_EXIT)


def _stream_format(path: Path, fmt: str) -> str:
    if fmt != "auto":
        return fmt
    return "jsonl" if path.suffix.lower() in (".jsonl", ".ndjson") else "csv"


def _write_stream(path: Path, elements, fmt: str) -> int:
    if _stream_format(path, fmt) == "jsonl":
        return write_stream_jsonl(path, elements)
    return write_stream_csv(path, elements)


def _add_kmeans_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--clusters", "-k", type=int, default=5, help="number of clusters K")
    p.add_argument("--seeding", choices=("plus-plus", "uniform-random"), default="plus-plus")
    p.add_argument("--max-iterations", type=int, default=100)
    p.add_argument("--tolerance", type=float, default=1e-9)
    p.add_argument("--seed", type=int, default=0, help="RNG seed (reruns are identical)")


def _kmeans_config(args, k: int | None = None) -> KMeansConfig:
    return KMeansConfig(
        k=k if k is not None else args.clusters,
        seeding=args.seeding,
        max_iterations=args.max_iterations,
        tolerance=args.tolerance,
        rng_seed=args.seed,
    )


def _config_dict(cfg: DetectorConfig) -> dict:
    return dataclasses.asdict(cfg)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="driftwatch", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("generate", help="write a synthetic stream")
    gen_sub = gen.add_subparsers(dest="generator", required=True)

    hp = gen_sub.add_parser("hyperplane", help="rotating-hyperplane drift stream")
    hp.add_argument("--points", type=int, default=100_000)
    hp.add_argument("--dims", type=int, default=10)
    hp.add_argument("--classes", type=int, default=5)
    hp.add_argument("--drift-magnitude", type=float, default=0.001)
    hp.add_argument("--drifting-dims", type=int, default=2)
    hp.add_argument("--noise-fraction", type=float, default=0.05)
    hp.add_argument("--seed", type=int, default=1)
    hp.add_argument("-o", "--output", required=True, type=Path)
    hp.add_argument("--labels", type=Path, help="label sidecar path (default OUTPUT.labels)")
    hp.add_argument("--format", choices=("auto", "csv", "jsonl"), default="auto")

    sh = gen_sub.add_parser("shift", help="mean-shift Gaussian stream with ground truth")
    sh.add_argument("--segment", type=int, required=True, help="segment length L")
    sh.add_argument("--segments", type=int, required=True, help="number of segments")
    sh.add_argument("--dims", type=int, default=2)
    sh.add_argument("--shift", type=float, default=10.0, help="per-dimension shift per boundary")
    sh.add_argument("--noise-std", type=float, default=1.0)
    sh.add_argument("--base-mean", type=float, default=0.0, help="per-dimension base mean")
    sh.add_argument("--seed", type=int, default=1)
    sh.add_argument("-o", "--output", required=True, type=Path)
    sh.add_argument("--truth", type=Path, help="ground-truth path (default OUTPUT.truth.json)")
    sh.add_argument("--format", choices=("auto", "csv", "jsonl"), default="auto")

    det = sub.add_parser("detect", help="run the change detector over a stream file")
    det.add_argument("input", type=Path)
    det.add_argument("--window", "-n", type=int, required=True, help="window width N")
    _add_kmeans_flags(det)
    det.add_argument("--block", type=int, default=1, help="slide step / tested block size b")
    det.add_argument("--mode", choices=("continuous", "restarting"), default="continuous")
    det.add_argument("--radius-floor", type=float, default=0.0)
    det.add_argument("--format", choices=("auto", "csv", "jsonl"), default="auto")
    det.add_argument("--timestamp-column", action="store_true",
                     help="first CSV column is the timestamp")
    det.add_argument("--outdir", "-o", type=Path, default=Path("."))
    det.add_argument("--track-memory", action="store_true",
                     help="measure allocator-level peak memory (slower)")

    ben = sub.add_parser("bench", help="sweep one axis and write a results table")
    ben.add_argument("--axis", choices=("window", "clusters"), required=True)
    ben.add_argument("--values", required=True,
                     help="comma-separated increasing integers, e.g. 200,400,800")
    ben.add_argument("--input", type=Path, required=True)
    ben.add_argument("--window", "-n", type=int, default=1000, help="fixed window width")
    _add_kmeans_flags(ben)
    ben.add_argument("--block", type=int, default=1)
    ben.add_argument("--mode", choices=("both", "continuous", "restarting"), default="both")
    ben.add_argument("--radius-floor", type=float, default=0.0)
    ben.add_argument("--repetitions", "-r", type=int, default=3)
    ben.add_argument("--format", choices=("auto", "csv", "jsonl"), default="auto")
    ben.add_argument("--timestamp-column", action="store_true")
    ben.add_argument("--strict-timing", action="store_true",
                     help="run timing cells strictly sequentially")
    ben.add_argument("--workers", type=int, default=1)
    ben.add_argument("-o", "--output", required=True, type=Path)
    return parser


def _cmd_generate(args) -> int:
    if args.generator == "hyperplane":
        cfg = HyperplaneConfig(
            n_points=args.points,
            dims=args.dims,
            n_classes=args.classes,
            drift_magnitude=args.drift_magnitude,
            drifting_dims=args.drifting_dims,
            noise_fraction=args.noise_fraction,
            rng_seed=args.seed,
        )
        elements, labels = gen_hyperplane(cfg)
        rows = _write_stream(args.output, elements, args.format)
        labels_path = args.labels or args.output.with_suffix(args.output.suffix + ".labels")
        write_labels(labels_path, labels)
        print(f"wrote {rows} points ({cfg.dims}d, {cfg.n_classes} classes) to "
              f"{args.output}; labels in {labels_path}")
    else:
        cfg = ShiftStreamConfig(
            segment_length=args.segment,
            n_segments=args.segments,
            dims=args.dims,
            base_mean=(args.base_mean,) * args.dims,
            shift_vector=(args.shift,) * args.dims,
            noise_std=args.noise_std,
            rng_seed=args.seed,
        )
        elements, boundaries = gen_shift_stream(cfg)
        rows = _write_stream(args.output, elements, args.format)
        truth_path = args.truth or args.output.with_suffix(args.output.suffix + ".truth.json")
        write_ground_truth(truth_path, boundaries)
        print(f"wrote {rows} points ({cfg.dims}d, {cfg.n_segments} segments) to "
              f"{args.output}; ground truth {boundaries} in {truth_path}")
    return 0


def _cmd_detect(args) -> int:
    cfg = DetectorConfig(
        window_width=args.window,
        kmeans=_kmeans_config(args),
        block_size=args.block,
        mode=args.mode,
        radius_floor=args.radius_floor,
    )
    args.outdir.mkdir(parents=True, exist_ok=True)
    events_path = args.outdir / "events.jsonl"
    snapshots_path = args.outdir / "snapshots.jsonl"
    metrics_path = args.outdir / "metrics.json"
    stream = open_stream(args.input, fmt=args.format, timestamp_column=args.timestamp_column)

    if args.track_memory:
        tracemalloc.start()
    events_written = snapshots_written = 0
    try:
        with events_path.open("w") as ef, snapshots_path.open("w") as sf:

            def on_event(event):
                nonlocal events_written
                ef.write(event_line(event) + "\n")
                events_written += 1

            def on_snapshot(at_index, model):
                nonlocal snapshots_written
                sf.write(snapshot_line(at_index, model) + "\n")
                snapshots_written += 1

            try:
                report = run_pipeline(stream, cfg, PipelineSinks(on_event, on_snapshot))
            finally:
                ef.flush()
                sf.flush()
    except Exception as exc:
        log.error("detection failed: %s", exc)
        metrics_path.write_text(json.dumps({
            "incomplete": True,
            "error": str(exc),
            "changes": events_written,
            "clusterings": snapshots_written,
            "config": _config_dict(cfg),
        }, indent=2) + "\n")
        sys.stderr.write(f"driftwatch: detect failed: {exc}\n")
        return RUNTIME_EXIT
    finally:
        if args.track_memory:
            tracemalloc.stop()

    metrics_path.write_text(json.dumps({
        "changes": report.change_count,
        "clusterings": report.clustering_count,
        "points": report.points_processed,
        "skipped": report.points_skipped,
        "wall_time_ms": report.wall_time_ms,
        "peak_memory_bytes": report.peak_memory_bytes,
        "config": _config_dict(cfg),
    }, indent=2) + "\n")
    print(f"{report.change_count} changes, {report.clustering_count} clusterings over "
          f"{report.points_processed} points -> {args.outdir}")
    return 0


def _cmd_bench(args) -> int:
    try:
        values = tuple(int(v) for v in args.values.split(",") if v.strip())
    except ValueError:
        sys.stderr.write("driftwatch: --values must be comma-separated integers\n")
        return USAGE_EXIT
    modes = ("continuous", "restarting") if args.mode == "both" else (args.mode,)
    base = DetectorConfig(
        window_width=args.window,
        kmeans=_kmeans_config(args),
        block_size=args.block,
        radius_floor=args.radius_floor,
    )
    spec = bench_mod.SweepSpec(
        base=base,
        axis="window_width" if args.axis == "window" else "cluster_count",
        values=values,
        input=args.input,
        repetitions=args.repetitions,
        modes=modes,
        timestamp_column=args.timestamp_column,
        stream_format=args.format,
        strict_timing=args.strict_timing,
        workers=args.workers,
    )
    rows = bench_mod.run_sweep(spec)
    bench_mod.write_table(rows, args.output)
    print(bench_mod.format_table(rows))
    failed = [r for r in rows if r.error]
    if failed:
        sys.stderr.write(f"driftwatch: {len(failed)} sweep cell(s) failed\n")
    return 0


def main(argv=None) -> int:
    logging.basicConfig(level=os.environ.get("DRIFTWATCH_LOG", "WARNING").upper())
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else USAGE_EXIT
    try:
        if args.command == "generate":
            return _cmd_generate(args)
        if args.command == "detect":
            return _cmd_detect(args)
        return _cmd_bench(args)
    except (ValueError, OSError) as exc:
        sys.stderr.write(f"driftwatch: {exc}\n")
        return RUNTIME_EXIT


if __name__ == "__main__":
    raise SystemExit(main())
