"""Threshold-free change detection and reactive clustering for data streams."""

from .bench import BenchRow, SweepSpec, run_sweep, write_table
from .datagen import (
    HyperplaneConfig,
    ShiftStreamConfig,
    gen_hyperplane,
    gen_shift_stream,
)
from .detector import (
    ChangeDecision,
    ChangeEvent,
    block_is_change,
    change_mask,
    event_line,
    load_events,
    parse_event_line,
    point_is_change,
)
from .features import (
    ClusterModel,
    MicroCluster,
    load_snapshots,
    mc_centroid,
    mc_from_point,
    mc_from_points,
    mc_merge,
    mc_radius,
    parse_snapshot_line,
    point_centroid_distance,
    snapshot_line,
)
from .kmeans import (
    DegenerateDataError,
    DegenerateSeedingError,
    InsufficientPointsError,
    KMeansConfig,
    kmeans_fit,
    seed_plus_plus,
)
from .pipeline import DetectorConfig, PipelineReport, PipelineSinks, run_pipeline
from .stream import (
    Block,
    EndOfStreamError,
    SlidingWindow,
    StreamElement,
    make_element,
    open_stream,
    read_stream_csv,
    read_stream_jsonl,
    window_fill,
    window_slide,
    write_stream_csv,
    write_stream_jsonl,
)

__version__ = "0.1.0"
