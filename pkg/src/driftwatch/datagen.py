"""Synthetic evaluation streams.

Two generators: a rotating-hyperplane stream (gradually drifting concept,
the drift lives in the labels while the feature distribution stays uniform)
and a mean-shift Gaussian stream whose segment boundaries are known exactly,
for detection-delay and false-alarm measurement. Both are pure functions of
their config: the same seed reproduces the same stream byte for byte.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .stream import StreamElement

# Probability per emitted point that a drifting weight reverses direction,
# as in the usual rotating-hyperplane construction.
FLIP_PROBABILITY = 0.1


@dataclass(frozen=True)
class HyperplaneConfig:
    """Rotating-hyperplane stream shape.

    Defaults mirror the usual benchmark shape (100000 points, 10 attributes,
    5 classes). Drift magnitude and noise defaults are chosen to make label
    drift visible within ~10k points; they are conventions, not calibrated
    constants.
    """

    n_points: int = 100_000
    dims: int = 10
    n_classes: int = 5
    drift_magnitude: float = 0.001  # per-point weight increment
    drifting_dims: int = 2
    noise_fraction: float = 0.05
    rng_seed: int = 1

    def __post_init__(self):
        if self.n_points < 1 or self.dims < 1 or self.n_classes < 1:
            raise ValueError("n_points, dims, and n_classes must be positive")
        if not 1 <= self.drifting_dims <= self.dims:
            raise ValueError("drifting_dims must be in [1, dims]")
        if self.drift_magnitude < 0:
            raise ValueError("drift_magnitude cannot be negative")
        if not 0.0 <= self.noise_fraction <= 1.0:
            raise ValueError("noise_fraction must be in [0, 1]")


def gen_hyperplane(cfg: HyperplaneConfig) -> tuple[list[StreamElement], np.ndarray]:
    """Generate the stream and its class labels.

    Points are uniform in [0,1]^d. A weight vector defines a hyperplane;
    the label is the point's margin quantized into ``n_classes`` equal
    bands of the attainable margin range. After each emitted point the
    first ``drifting_dims`` weights move by ``drift_magnitude`` in a
    direction that reverses with small probability, and ``noise_fraction``
    of the labels are replaced by uniform random classes. Labels are a
    sidecar: the detector never sees them.
    """
    rng = np.random.default_rng(cfg.rng_seed)
    n, d, m = cfg.n_points, cfg.dims, cfg.drifting_dims
    points = rng.uniform(0.0, 1.0, size=(n, d))
    weights0 = rng.uniform(-1.0, 1.0, size=d)
    directions0 = rng.choice([-1.0, 1.0], size=m)

    # Direction of each drifting weight at each point: a sign sequence that
    # flips with FLIP_PROBABILITY, then the cumulative drift added to w0.
    flips = rng.random(size=(n, m)) < FLIP_PROBABILITY
    signs = directions0[None, :] * np.where(
        np.cumsum(flips, axis=0) % 2 == 1, -1.0, 1.0
    )
    # Point i sees the weights after i updates (none before the first point).
    cum = np.vstack([np.zeros((1, m)), np.cumsum(signs, axis=0)[:-1]])
    drift_weights = weights0[None, :m] + cfg.drift_magnitude * cum

    weights = np.broadcast_to(weights0, (n, d)).copy()
    weights[:, :m] = drift_weights
    margins = (points * weights).sum(axis=1)
    lo = np.minimum(weights, 0.0).sum(axis=1)
    hi = np.maximum(weights, 0.0).sum(axis=1)
    span = np.where(hi > lo, hi - lo, 1.0)
    bands = np.floor((margins - lo) / span * cfg.n_classes).astype(int)
    labels = np.clip(bands, 0, cfg.n_classes - 1)

    if cfg.noise_fraction > 0.0:
        noisy = rng.random(n) < cfg.noise_fraction
        labels = np.where(noisy, rng.integers(0, cfg.n_classes, size=n), labels)

    elements = [
        StreamElement(tuple(float(v) for v in row), float(i), i)
        for i, row in enumerate(points)
    ]
    return elements, labels.astype(int)


@dataclass(frozen=True)
class ShiftStreamConfig:
    """Piecewise-stationary Gaussian stream with known change points.

    Segment s has mean base_mean + s * shift_vector and isotropic noise;
    the boundaries at multiples of segment_length are the ground truth.
    """

    segment_length: int
    n_segments: int
    dims: int
    base_mean: tuple[float, ...] = ()
    shift_vector: tuple[float, ...] = ()
    noise_std: float = 1.0
    rng_seed: int = 1

    def __post_init__(self):
        if self.segment_length < 1 or self.n_segments < 1 or self.dims < 1:
            raise ValueError("segment_length, n_segments, and dims must be positive")
        if self.noise_std <= 0:
            raise ValueError("noise_std must be positive")
        base = self.base_mean or (0.0,) * self.dims
        shift = self.shift_vector or (1.0,) * self.dims
        if len(base) != self.dims or len(shift) != self.dims:
            raise ValueError("base_mean and shift_vector must have length dims")
        object.__setattr__(self, "base_mean", tuple(float(v) for v in base))
        object.__setattr__(self, "shift_vector", tuple(float(v) for v in shift))


def gen_shift_stream(cfg: ShiftStreamConfig) -> tuple[list[StreamElement], list[int]]:
    """Generate the stream plus the exact ground-truth boundary indices.

    Segment s covers indices [s*L, (s+1)*L); the returned boundaries are
    the L*s for s = 1..n_segments-1.
    """
    rng = np.random.default_rng(cfg.rng_seed)
    length, segments, d = cfg.segment_length, cfg.n_segments, cfg.dims
    base = np.asarray(cfg.base_mean)
    shift = np.asarray(cfg.shift_vector)
    noise = rng.normal(0.0, cfg.noise_std, size=(length * segments, d))
    seg_ids = np.repeat(np.arange(segments), length)
    points = noise + base[None, :] + seg_ids[:, None] * shift[None, :]
    elements = [
        StreamElement(tuple(float(v) for v in row), float(i), i)
        for i, row in enumerate(points)
    ]
    boundaries = [length * s for s in range(1, segments)]
    return elements, boundaries


def write_labels(path: str | Path, labels) -> None:
    """One class label per line, aligned with the stream rows."""
    with Path(path).open("w") as fh:
        for label in labels:
            fh.write(f"{int(label)}\n")


def write_ground_truth(path: str | Path, boundaries: list[int]) -> None:
    Path(path).write_text(json.dumps([int(i) for i in boundaries]) + "\n")
