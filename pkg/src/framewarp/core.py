"""Shared domain types and their file formats.

Frames are stored as rows of a ``(T, K)`` float array. A frame is either
unit-norm or all-zero; all-zero frames carry an ``empty`` flag and are
treated by every distance routine as maximally distant.

All indices exposed in this module (segment bounds, path steps) are
1-based, matching the on-disk formats.
"""
from __future__ import annotations

import csv
import json
import logging
import os
import tempfile
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, NamedTuple, Sequence

import numpy as np

logger = logging.getLogger(__name__)

FORMAT_VERSION = 1
NORM_TOL = 1e-6
RENORM_REPORT_TOL = 1e-3
# squared-Euclidean "diameter" used for frames without any feature
EMPTY_DISTANCE = 2.0


class FormatError(ValueError):
    """Malformed input file."""


class DimensionError(ValueError):
    """Inconsistent vector dimensions."""


class InvariantError(ValueError):
    """A domain-type invariant does not hold."""


def normalize_rows(values):
    """Scale each row to unit l2 norm; all-zero rows stay zero.

    Returns
    -------
    frames : ndarray, shape (T, K)
    empty : ndarray of bool, shape (T,)
    norms : ndarray, shape (T,)
        Norms of the input rows.
    """
    values = np.asarray(values, dtype=float)
    norms = np.linalg.norm(values, axis=1)
    empty = norms == 0.0
    # rows already unit-norm to rounding are left bit-identical so files round-trip
    keep = empty | (np.abs(norms - 1.0) <= 1e-12)
    safe = np.where(keep, 1.0, norms)
    return values / safe[:, None], empty, norms


@dataclass(frozen=True, eq=False)
class TimeSeries:
    """Sequence of unit-norm frame vectors (a ``(T, K)`` array).

    Use :meth:`from_array` to build one from raw vectors; the constructor
    assumes the rows are already normalized.
    """

    frames: np.ndarray
    empty: np.ndarray = field(default=None)

    def __post_init__(self):
        frames = np.ascontiguousarray(self.frames, dtype=float)
        if frames.ndim != 2 or frames.shape[0] < 1 or frames.shape[1] < 1:
            raise DimensionError(f"expected a non-empty (T, K) array, got shape {frames.shape}")
        norms = np.linalg.norm(frames, axis=1)
        empty = self.empty
        if empty is None:
            empty = norms == 0.0
        empty = np.asarray(empty, dtype=bool)
        if empty.shape != (frames.shape[0],):
            raise DimensionError("empty flags must have one entry per frame")
        bad = (~empty & (np.abs(norms - 1.0) > NORM_TOL)) | (empty & (norms != 0.0))
        if bad.any():
            raise InvariantError(f"frame {int(np.argmax(bad)) + 1} is neither unit-norm nor empty")
        frames.setflags(write=False)
        empty.setflags(write=False)
        object.__setattr__(self, "frames", frames)
        object.__setattr__(self, "empty", empty)

    @classmethod
    def from_array(cls, values) -> "TimeSeries":
        frames, empty, norms = normalize_rows(np.atleast_2d(values))
        off = ~empty & (np.abs(norms - 1.0) > RENORM_REPORT_TOL)
        if off.any():
            logger.info("renormalized %d frames (norms %s)", int(off.sum()), norms[off][:10].tolist())
        return cls(frames, empty)

    def __len__(self):
        return self.frames.shape[0]

    @property
    def dim(self) -> int:
        return self.frames.shape[1]

    def slice(self, begin: int, end: int) -> "TimeSeries":
        """Frames ``begin..end`` (1-based, inclusive)."""
        return TimeSeries(self.frames[begin - 1:end], self.empty[begin - 1:end])

    def __eq__(self, other):
        if not isinstance(other, TimeSeries):
            return NotImplemented
        return (
            self.frames.shape == other.frames.shape
            and np.array_equal(self.frames, other.frames)
            and np.array_equal(self.empty, other.empty)
        )

    __hash__ = None


def concatenate(series: Sequence[TimeSeries]) -> TimeSeries:
    return TimeSeries(
        np.concatenate([s.frames for s in series]),
        np.concatenate([s.empty for s in series]),
    )


class Segment(NamedTuple):
    begin: int
    end: int
    label: int


@dataclass(frozen=True)
class Segmentation:
    """Labeled intervals tiling ``1..T``.

    Adjacent segments may share a label (e.g. repeated motion patterns).
    """

    segments: tuple

    def __post_init__(self):
        segs = tuple(Segment(int(b), int(e), int(l)) for b, e, l in self.segments)
        if not segs:
            raise InvariantError("segmentation has no segments")
        if segs[0].begin != 1:
            raise InvariantError(f"first segment starts at {segs[0].begin}, not 1")
        for j, s in enumerate(segs):
            if s.begin > s.end:
                raise InvariantError(f"segment {j + 1} has begin {s.begin} > end {s.end}")
            if j and s.begin != segs[j - 1].end + 1:
                raise InvariantError(
                    f"segment {j + 1} starts at {s.begin}, expected {segs[j - 1].end + 1}"
                )
        object.__setattr__(self, "segments", segs)

    @property
    def length(self) -> int:
        return self.segments[-1].end

    def frame_labels(self) -> np.ndarray:
        return np.concatenate([np.full(s.end - s.begin + 1, s.label, dtype=int) for s in self.segments])

    def boundaries(self) -> list:
        """1-based first frames of every segment but the first."""
        return [s.begin for s in self.segments[1:]]

    @classmethod
    def from_labels(cls, labels) -> "Segmentation":
        """Collapse runs of equal per-frame labels."""
        labels = np.asarray(labels, dtype=int)
        if labels.size == 0:
            raise InvariantError("empty label track")
        cuts = np.flatnonzero(np.diff(labels)) + 1
        starts = np.concatenate([[0], cuts])
        ends = np.concatenate([cuts, [labels.size]])
        return cls(tuple(Segment(int(b) + 1, int(e), int(labels[b])) for b, e in zip(starts, ends)))

    def to_dict(self) -> dict:
        return {
            "format_version": FORMAT_VERSION,
            "segments": [{"begin": s.begin, "end": s.end, "label": s.label} for s in self.segments],
            "frame_labels": self.frame_labels().tolist(),
        }

    @classmethod
    def from_dict(cls, obj: dict) -> "Segmentation":
        try:
            seg = cls(tuple((d["begin"], d["end"], d["label"]) for d in obj["segments"]))
        except (KeyError, TypeError) as exc:
            raise FormatError(f"bad segmentation object: {exc!r}") from exc
        if "frame_labels" in obj and list(obj["frame_labels"]) != seg.frame_labels().tolist():
            raise InvariantError("frame_labels disagree with segments")
        return seg


@dataclass(frozen=True, eq=False)
class AlignmentPath:
    """Monotone sequence of (t, t', label) grid steps, 1-based.

    ``visit`` numbers the template visits along the path; it changes
    exactly at between-template jumps (including self-jumps).
    """

    t: np.ndarray
    t_prime: np.ndarray
    label: np.ndarray
    visit: np.ndarray = None

    def __post_init__(self):
        for name in ("t", "t_prime", "label"):
            object.__setattr__(self, name, np.asarray(getattr(self, name), dtype=int))
        visit = self.visit
        if visit is None:
            visit = np.zeros(len(self.t), dtype=int)
        object.__setattr__(self, "visit", np.asarray(visit, dtype=int))

    def __len__(self):
        return len(self.t)

    def steps(self) -> list:
        return list(zip(self.t.tolist(), self.t_prime.tolist(), self.label.tolist()))

    def jumps(self) -> list:
        """Indices ``i`` at which step ``i`` starts a new template visit."""
        return (np.flatnonzero(np.diff(self.visit)) + 1).tolist()

    def __eq__(self, other):
        if not isinstance(other, AlignmentPath):
            return NotImplemented
        return self.steps() == other.steps() and np.array_equal(self.visit, other.visit)

    __hash__ = None


def _umask() -> int:
    mask = os.umask(0)
    os.umask(mask)
    return mask


def _atomic_write_text(path, text):
    """Write ``text`` (str or bytes) to a temp file beside ``path``, then rename."""
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent if str(path.parent) else ".", prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "wb" if isinstance(text, bytes) else "w") as fh:
            fh.write(text)
        os.chmod(tmp, 0o666 & ~_umask())
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except FileNotFoundError:
            pass
        raise


def write_json(obj, path):
    """Write ``obj`` as JSON atomically (temp file + rename)."""
    try:
        _atomic_write_text(path, json.dumps(obj, indent=1) + "\n")
    except OSError as exc:
        raise OSError(f"{path}: {exc}") from exc


def read_json(path):
    try:
        with open(path) as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from exc


def _parse_csv_rows(path) -> list:
    rows = []
    with open(path, newline="") as fh:
        for lineno, row in enumerate(csv.reader(fh), start=1):
            if not row or all(not c.strip() for c in row):
                continue
            try:
                rows.append([float(c) for c in row])
            except ValueError as exc:
                raise FormatError(f"{path}: row {lineno}: {exc}") from exc
    return rows


def read_time_series(path, format: str | None = None) -> TimeSeries:
    """Load a series from CSV (one frame per row) or JSON ``{"dim", "frames"}``.

    Rows are renormalized to unit norm; all-zero rows are kept and flagged
    as empty.
    """
    path = Path(path)
    fmt = format or ("json" if path.suffix.lower() == ".json" else "csv")
    if fmt == "json":
        obj = read_json(path)
        try:
            rows = obj["frames"]
            dim = obj.get("dim")
        except (TypeError, KeyError) as exc:
            raise FormatError(f"{path}: missing 'frames'") from exc
    elif fmt == "csv":
        rows = _parse_csv_rows(path)
        dim = None
    else:
        raise ValueError(f"unknown format {fmt!r}")
    if not rows:
        raise FormatError(f"{path}: no frames")
    width = dim if dim is not None else len(rows[0])
    for i, row in enumerate(rows, start=1):
        if len(row) != width:
            raise DimensionError(f"{path}: row {i} has {len(row)} values, expected {width}")
    try:
        values = np.array(rows, dtype=float)
    except (TypeError, ValueError) as exc:
        raise FormatError(f"{path}: {exc}") from exc
    if not np.all(np.isfinite(values)):
        row = int(np.argmax(~np.isfinite(values).all(axis=1))) + 1
        raise FormatError(f"{path}: row {row} has non-finite values")
    return TimeSeries.from_array(values)


def write_time_series(series: TimeSeries, path):
    path = Path(path)
    if path.suffix.lower() == ".json":
        write_json({"format_version": FORMAT_VERSION, "dim": series.dim, "frames": series.frames.tolist()}, path)
    else:
        lines = [",".join(repr(float(v)) for v in row) for row in series.frames]
        _atomic_write_text(path, "\n".join(lines) + "\n")


def write_segmentation(seg: Segmentation, path):
    write_json(seg.to_dict(), path)


def read_segmentation(path) -> Segmentation:
    return Segmentation.from_dict(read_json(path))


def read_label_track(path) -> np.ndarray:
    """Per-frame labels from a segmentation JSON, a per-frame label CSV,
    or a ``begin,end,label`` segment CSV (with header)."""
    path = Path(path)
    if path.suffix.lower() == ".json":
        obj = read_json(path)
        if "segments" in obj:
            return Segmentation.from_dict(obj).frame_labels()
        return np.asarray(obj["frame_labels"], dtype=int)
    with open(path, newline="") as fh:
        rows = [r for r in csv.reader(fh) if r]
    if rows and [c.strip() for c in rows[0]] == ["begin", "end", "label"]:
        try:
            segs = [(int(b), int(e), int(l)) for b, e, l in rows[1:]]
        except ValueError as exc:
            raise FormatError(f"{path}: {exc}") from exc
        return Segmentation(tuple(segs)).frame_labels()
    try:
        return np.array([int(r[0]) for r in rows], dtype=int)
    except ValueError as exc:
        raise FormatError(f"{path}: {exc}") from exc


def write_label_track(labels: Iterable[int], path):
    _atomic_write_text(Path(path), "".join(f"{int(l)}\n" for l in labels))
