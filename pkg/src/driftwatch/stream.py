"""Stream elements, tuple-based sliding windows, and block extraction.

A stream is an iterator of :class:`StreamElement`. Windows are counted in
tuples (elements), never in time: a window of width N always holds the N
most recent elements. Sliding a full window by ``step`` evicts the oldest
``step`` elements and admits ``step`` new ones; the newly admitted elements
are returned as a :class:`Block`, the unit the change detector tests.

Also provides the CSV / JSONL ingestion formats shared with the synthetic
generators.
"""

from __future__ import annotations

import csv
import json
from collections import deque
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Iterator, Sequence


class EndOfStreamError(Exception):
    """Raised when a window operation needs more elements than the stream has.

    ``requested`` is how many elements were needed, ``received`` how many the
    stream actually yielded before exhausting.
    """

    def __init__(self, requested: int, received: int):
        super().__init__(
            f"stream exhausted: needed {requested} element(s), got {received}"
        )
        self.requested = requested
        self.received = received


@dataclass(frozen=True, slots=True)
class StreamElement:
    """One d-dimensional observation with its arrival timestamp.

    ``values`` has the same length d for every element of a stream,
    ``index`` is the zero-based position in the stream, and ``timestamp``
    is non-decreasing with index.
    """

    values: tuple[float, ...]
    timestamp: float
    index: int

    def __post_init__(self):
        if len(self.values) < 1:
            raise ValueError("element needs at least one value dimension")
        if self.index < 0:
            raise ValueError("element index must be non-negative")

    @property
    def dims(self) -> int:
        return len(self.values)


def make_element(values: Sequence[float], timestamp: float, index: int) -> StreamElement:
    return StreamElement(tuple(float(v) for v in values), float(timestamp), int(index))


@dataclass(frozen=True, slots=True)
class Block:
    """A run of b >= 1 consecutive stream elements (the slide step)."""

    elements: tuple[StreamElement, ...]

    def __post_init__(self):
        if len(self.elements) < 1:
            raise ValueError("a block holds at least one element")
        for prev, cur in zip(self.elements, self.elements[1:]):
            if cur.index != prev.index + 1:
                raise ValueError("block elements must be consecutive by index")

    def __len__(self) -> int:
        return len(self.elements)

    @property
    def start_index(self) -> int:
        return self.elements[0].index


class SlidingWindow:
    """Tuple-based window of the most recent ``capacity`` elements.

    Backed by a ring buffer: appending once the window is full evicts the
    oldest element in O(1). The window is owned by a single writer;
    ``elements`` returns an immutable snapshot that may be shared freely.
    """

    def __init__(self, capacity: int):
        if capacity < 1:
            raise ValueError("window capacity must be positive")
        self.capacity = capacity
        self._buf: deque[StreamElement] = deque(maxlen=capacity)

    def __len__(self) -> int:
        return len(self._buf)

    @property
    def is_full(self) -> bool:
        return len(self._buf) == self.capacity

    @property
    def elements(self) -> tuple[StreamElement, ...]:
        return tuple(self._buf)

    @property
    def last_index(self) -> int:
        if not self._buf:
            raise ValueError("window is empty")
        return self._buf[-1].index

    def append(self, element: StreamElement) -> None:
        if self._buf:
            last = self._buf[-1]
            if element.index != last.index + 1:
                raise ValueError(
                    f"window indices must be consecutive: got {element.index} "
                    f"after {last.index}"
                )
            if element.timestamp < last.timestamp:
                raise ValueError("timestamps must be non-decreasing")
            if element.dims != last.dims:
                raise ValueError("all window elements must share one dimension")
        self._buf.append(element)


def window_fill(source: Iterator[StreamElement], n: int) -> SlidingWindow:
    """Read the first ``n`` elements from ``source`` into a fresh window.

    ``source`` must be a stateful iterator; consumed elements are gone.
    Raises :class:`EndOfStreamError` (carrying the count actually read) if
    the stream exhausts first.
    """
    if n < 1:
        raise ValueError("window width must be positive")
    window = SlidingWindow(n)
    for got, element in enumerate(source):
        window.append(element)
        if got + 1 == n:
            return window
    raise EndOfStreamError(requested=n, received=len(window))


def window_slide(
    window: SlidingWindow, step: int, source: Iterator[StreamElement]
) -> tuple[SlidingWindow, Block]:
    """Advance a full window by ``step`` elements drawn from ``source``.

    Returns the advanced window (the same object, mutated) and the Block of
    exactly the newly admitted elements. With step=1 the new window overlaps
    the old one in capacity-1 elements. Raises :class:`EndOfStreamError` if
    fewer than ``step`` elements remain.
    """
    if step < 1:
        raise ValueError("slide step must be positive")
    if not window.is_full:
        raise ValueError("can only slide a full window")
    admitted: list[StreamElement] = []
    for element in source:
        window.append(element)
        admitted.append(element)
        if len(admitted) == step:
            return window, Block(tuple(admitted))
    raise EndOfStreamError(requested=step, received=len(admitted))


# ---------------------------------------------------------------------------
# Ingestion formats (shared with the synthetic generators)
# ---------------------------------------------------------------------------


def read_stream_csv(
    path: str | Path, timestamp_column: bool = False
) -> Iterator[StreamElement]:
    """Yield elements from a CSV file, one row per element.

    Rows are d numeric columns; with ``timestamp_column`` the first column is
    the timestamp and the rest are values. Without it the element index is
    used as an integer tick. Any malformed row is a hard error naming the
    line number.
    """
    path = Path(path)
    dims: int | None = None
    index = 0
    with path.open(newline="") as fh:
        for lineno, row in enumerate(csv.reader(fh), start=1):
            if not row:
                raise ValueError(f"{path}: line {lineno}: empty row")
            try:
                fields = [float(cell) for cell in row]
            except ValueError as exc:
                raise ValueError(f"{path}: line {lineno}: non-numeric cell ({exc})") from None
            if timestamp_column:
                if len(fields) < 2:
                    raise ValueError(
                        f"{path}: line {lineno}: need a timestamp plus at least one value"
                    )
                timestamp, values = fields[0], fields[1:]
            else:
                timestamp, values = float(index), fields
            if dims is None:
                dims = len(values)
            elif len(values) != dims:
                raise ValueError(
                    f"{path}: line {lineno}: expected {dims} value column(s), got {len(values)}"
                )
            yield StreamElement(tuple(values), timestamp, index)
            index += 1


def read_stream_jsonl(path: str | Path) -> Iterator[StreamElement]:
    """Yield elements from a JSONL file of {"t": num, "x": [num, ...]} objects."""
    path = Path(path)
    dims: int | None = None
    index = 0
    with path.open() as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                raise ValueError(f"{path}: line {lineno}: empty line")
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ValueError(f"{path}: line {lineno}: invalid JSON ({exc})") from None
            if not isinstance(obj, dict) or "t" not in obj or "x" not in obj:
                raise ValueError(f"{path}: line {lineno}: object needs 't' and 'x' fields")
            t, x = obj["t"], obj["x"]
            if not isinstance(t, (int, float)) or isinstance(t, bool):
                raise ValueError(f"{path}: line {lineno}: 't' must be a number")
            if (
                not isinstance(x, list)
                or not x
                or any(isinstance(v, bool) or not isinstance(v, (int, float)) for v in x)
            ):
                raise ValueError(f"{path}: line {lineno}: 'x' must be a non-empty number list")
            if dims is None:
                dims = len(x)
            elif len(x) != dims:
                raise ValueError(f"{path}: line {lineno}: expected {dims} dims, got {len(x)}")
            yield StreamElement(tuple(float(v) for v in x), float(t), index)
            index += 1


def open_stream(
    path: str | Path, fmt: str = "auto", timestamp_column: bool = False
) -> Iterator[StreamElement]:
    """Open a stream file by format ("csv", "jsonl", or "auto" by suffix)."""
    path = Path(path)
    if fmt == "auto":
        fmt = "jsonl" if path.suffix.lower() in (".jsonl", ".ndjson") else "csv"
    if fmt == "csv":
        return read_stream_csv(path, timestamp_column=timestamp_column)
    if fmt == "jsonl":
        return read_stream_jsonl(path)
    raise ValueError(f"unknown stream format: {fmt!r}")


def write_stream_csv(
    path: str | Path, elements: Iterable[StreamElement], timestamp_column: bool = False
) -> int:
    """Write elements as CSV; returns the row count. Float cells use repr."""
    count = 0
    with Path(path).open("w", newline="") as fh:
        writer = csv.writer(fh)
        for element in elements:
            row = [repr(v) for v in element.values]
            if timestamp_column:
                row.insert(0, repr(element.timestamp))
            writer.writerow(row)
            count += 1
    return count


def write_stream_jsonl(path: str | Path, elements: Iterable[StreamElement]) -> int:
    count = 0
    with Path(path).open("w") as fh:
        for element in elements:
            fh.write(
                json.dumps(
                    {"t": element.timestamp, "x": list(element.values)},
                    separators=(",", ":"),
                )
            )
            fh.write("\n")
            count += 1
    return count
