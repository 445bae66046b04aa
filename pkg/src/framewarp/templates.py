"""Class templates learned from labeled examples.

A class template is the most central training example of a category
(the one with the smallest summed warping score to all others), where
each of its frames is replaced by a *metaframe*: the set of frames that
every example aligned to it. Templates are concatenated, in a fixed
order, into a :class:`SuperTemplate` used by continuous recognition.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .core import FORMAT_VERSION, FormatError, InvariantError, TimeSeries, read_json, write_json
from .dtw import dtw_align, pairwise_distances

logger = logging.getLogger(__name__)

NULL_LABEL = 0
DEFAULT_NULL_MAX_FRAMES = 512


@dataclass(frozen=True, eq=False)
class Metaframe:
    """Training frames matched to one frame of a class center.

    ``source`` lists (example index, frame index) pairs, both 1-based.
    """

    frames: np.ndarray
    source: tuple = ()

    def __post_init__(self):
        frames = np.atleast_2d(np.asarray(self.frames, dtype=float))
        if frames.shape[0] < 1:
            raise InvariantError("metaframe without frames")
        object.__setattr__(self, "frames", frames)
        object.__setattr__(self, "source", tuple((int(a), int(b)) for a, b in self.source))

    def __len__(self):
        return self.frames.shape[0]


@dataclass(frozen=True, eq=False)
class ClassTemplate:
    label: int
    metaframes: tuple
    t_min: int = 1
    t_max: float = math.inf
    is_pattern: bool = False
    is_null: bool = False

    def __post_init__(self):
        object.__setattr__(self, "metaframes", tuple(self.metaframes))
        if not self.metaframes:
            raise InvariantError(f"template {self.label} has no metaframes")
        if self.is_null and (len(self.metaframes) != 1 or self.t_min != 1 or self.t_max != math.inf):
            raise InvariantError("null template must have one metaframe and no length bounds")
        if not 1 <= self.t_min <= self.t_max:
            raise InvariantError(f"template {self.label}: bad length bounds ({self.t_min}, {self.t_max})")

    def __len__(self):
        return len(self.metaframes)

    @property
    def constrained(self) -> bool:
        return not self.is_null and self.t_max != math.inf

    def pooled_frames(self, t_prime: int, w_meta: int = 1) -> np.ndarray:
        """Frames of metaframes within ``(w_meta - 1) / 2`` of ``t_prime`` (1-based)."""
        half = (w_meta - 1) // 2
        lo = max(1, t_prime - half)
        hi = min(len(self), t_prime + half)
        return np.concatenate([self.metaframes[i - 1].frames for i in range(lo, hi + 1)])


@dataclass(frozen=True, eq=False)
class SuperTemplate:
    """Class templates concatenated in a fixed order."""

    templates: tuple
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "templates", tuple(self.templates))
        labels = [t.label for t in self.templates]
        if not labels:
            raise InvariantError("empty super-template")
        if len(set(labels)) != len(labels):
            raise InvariantError(f"duplicate template labels in {labels}")

    def __len__(self):
        return len(self.templates)

    def __iter__(self):
        return iter(self.templates)

    @property
    def labels(self) -> list:
        return [t.label for t in self.templates]

    @property
    def lengths(self) -> np.ndarray:
        return np.array([len(t) for t in self.templates], dtype=np.int64)

    @property
    def offsets(self) -> np.ndarray:
        return np.concatenate([[0], np.cumsum(self.lengths)[:-1]]).astype(np.int64)

    @property
    def total_length(self) -> int:
        return int(self.lengths.sum())

    @property
    def dim(self) -> int:
        return self.templates[0].metaframes[0].frames.shape[1]

    def without_null(self) -> "SuperTemplate":
        return SuperTemplate(tuple(t for t in self.templates if not t.is_null), self.metadata)

    def __getitem__(self, label) -> ClassTemplate:
        for t in self.templates:
            if t.label == label:
                return t
        raise KeyError(label)


def select_class_center(examples: Sequence[TimeSeries]) -> int:
    """Index (1-based) of the example with the smallest summed warping score
    to all other examples; ties go to the lowest index."""
    n = len(examples)
    if n == 0:
        raise ValueError("no examples")
    scores = np.zeros((n, n))
    for i in range(n):
        for j in range(i + 1, n):
            _, s = dtw_align(examples[i], examples[j])
            scores[i, j] = s
            scores[j, i] = s
    return int(np.argmin(scores.sum(axis=1))) + 1


def length_bounds(examples: Sequence[TimeSeries]) -> tuple:
    if len(examples) == 0:
        raise ValueError("no examples")
    lengths = [len(x) for x in examples]
    return min(lengths), max(lengths)


def build_class_template(label: int, examples: Sequence[TimeSeries], is_pattern: bool = False) -> ClassTemplate:
    """Align every example to the class center and pool matched frames.

    Each example frame joins exactly one metaframe: among the center frames
    it is paired with on the optimal path, the closest one (earliest on
    ties). Center frames paired only with repeated example frames may thus
    receive nothing from that example.
    """
    if len(examples) == 0:
        raise ValueError(f"class {label}: no examples")
    center_idx = select_class_center(examples) - 1
    center = examples[center_idx]
    buckets = [[] for _ in range(len(center))]
    for j, ex in enumerate(examples):
        if j == center_idx:
            for tp in range(len(center)):
                buckets[tp].append((j, tp))
            continue
        path, _ = dtw_align(ex, center)
        C = pairwise_distances(ex, center)
        best = {}
        for t, tp in zip(path.t - 1, path.t_prime - 1):
            if t not in best or C[t, tp] < C[t, best[t]]:
                best[t] = tp
        for t, tp in best.items():
            buckets[tp].append((j, t))
    metaframes = []
    for bucket in buckets:
        bucket.sort()
        frames = np.array([examples[j].frames[t] for j, t in bucket])
        metaframes.append(Metaframe(frames, tuple((j + 1, t + 1) for j, t in bucket)))
    t_min, t_max = length_bounds(examples)
    return ClassTemplate(label, tuple(metaframes), t_min, t_max, is_pattern=is_pattern)


def subsample_indices(n: int, max_frames: int, seed: int = 0) -> np.ndarray:
    """Sorted uniform subsample of ``range(n)`` of size ``min(n, max_frames)``."""
    if n <= max_frames:
        return np.arange(n)
    rng = np.random.default_rng(seed)
    return np.sort(rng.choice(n, size=max_frames, replace=False))


def build_null_template(background_frames, max_frames: int = DEFAULT_NULL_MAX_FRAMES, seed: int = 0) -> ClassTemplate:
    """Unit-length template whose single metaframe holds background frames."""
    frames = np.asarray(background_frames, dtype=float)
    if frames.ndim != 2 or frames.shape[0] == 0:
        raise ValueError("null template needs at least one background frame")
    keep = subsample_indices(frames.shape[0], max_frames, seed)
    mf = Metaframe(frames[keep], tuple((1, int(i) + 1) for i in keep))
    return ClassTemplate(NULL_LABEL, (mf,), 1, math.inf, is_null=True)


def build_super_template(templates: Sequence[ClassTemplate], metadata: dict | None = None) -> SuperTemplate:
    return SuperTemplate(tuple(templates), dict(metadata or {}))


def train(examples_by_label: dict, background_frames=None, patterns: Sequence[int] = (),
          null_max_frames: int = DEFAULT_NULL_MAX_FRAMES, seed: int = 0) -> SuperTemplate:
    """Learn one template per label (sorted order), plus a null template
    when background frames are given."""
    templates = [
        build_class_template(label, examples_by_label[label], is_pattern=label in patterns)
        for label in sorted(examples_by_label)
    ]
    if background_frames is not None and len(background_frames):
        templates.append(build_null_template(background_frames, null_max_frames, seed))
    return build_super_template(templates)


def model_to_dict(model: SuperTemplate) -> dict:
    out = []
    for t in model.templates:
        out.append({
            "label": t.label,
            "is_pattern": t.is_pattern,
            "is_null": t.is_null,
            "t_min": t.t_min,
            "t_max": None if t.t_max == math.inf else int(t.t_max),
            "metaframes": [mf.frames.tolist() for mf in t.metaframes],
            "sources": [[list(s) for s in mf.source] for mf in t.metaframes],
        })
    obj = {"format_version": FORMAT_VERSION, "order": model.labels, "templates": out}
    if model.metadata:
        obj["metadata"] = model.metadata
    return obj


def model_from_dict(obj: dict) -> SuperTemplate:
    try:
        templates = []
        for d in obj["templates"]:
            sources = d.get("sources") or [()] * len(d["metaframes"])
            mfs = tuple(Metaframe(np.array(f, dtype=float), tuple(map(tuple, s)))
                        for f, s in zip(d["metaframes"], sources))
            templates.append(ClassTemplate(
                int(d["label"]), mfs, int(d["t_min"]),
                math.inf if d["t_max"] is None else int(d["t_max"]),
                bool(d.get("is_pattern", False)), bool(d.get("is_null", False)),
            ))
        order = obj.get("order")
    except (KeyError, TypeError, ValueError) as exc:
        raise FormatError(f"bad template store: {exc!r}") from exc
    model = SuperTemplate(tuple(templates), obj.get("metadata", {}))
    if order is not None and list(order) != model.labels:
        raise FormatError(f"'order' {order} does not match template labels {model.labels}")
    dims = {mf.frames.shape[1] for t in model for mf in t.metaframes}
    if len(dims) != 1:
        raise FormatError(f"templates mix frame dimensions {sorted(dims)}")
    return model


def save_model(model: SuperTemplate, path):
    write_json(model_to_dict(model), path)


def load_model(path) -> SuperTemplate:
    return model_from_dict(read_json(path))
