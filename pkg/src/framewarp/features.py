"""Bag-of-words frame descriptors from timestamped keypoint descriptors.

Each frame is described by the histogram of visual words of the keypoints
found in a temporal window around it. The window either grows
symmetrically until it holds ``Q`` keypoints (capped at half-width
``cap``) or has a fixed width ``W``.
"""
from __future__ import annotations

import json
import logging
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.spatial.distance import cdist
from sklearn.cluster import KMeans

from .core import FORMAT_VERSION, DimensionError, FormatError, TimeSeries, _atomic_write_text, read_json, write_json

logger = logging.getLogger(__name__)


class CapacityError(ValueError):
    """Not enough keypoints to build the requested dictionary."""


@dataclass(frozen=True, eq=False)
class KeypointStream:
    """Keypoints of one video: 1-based frame indices and descriptors."""

    frame_index: np.ndarray
    descriptors: np.ndarray
    video_length: int

    def __post_init__(self):
        fi = np.asarray(self.frame_index, dtype=np.int64).reshape(-1)
        desc = np.asarray(self.descriptors, dtype=float)
        if desc.size == 0:
            desc = desc.reshape(0, desc.shape[-1] if desc.ndim == 2 else 0)
        if desc.ndim != 2 or desc.shape[0] != fi.size:
            raise DimensionError("need one descriptor row per keypoint")
        if self.video_length < 1:
            raise ValueError("video_length must be positive")
        if fi.size and (fi.min() < 1 or fi.max() > self.video_length):
            raise ValueError(f"keypoint frame indices must lie in [1, {self.video_length}]")
        object.__setattr__(self, "frame_index", fi)
        object.__setattr__(self, "descriptors", desc)

    @property
    def dim(self) -> int:
        return self.descriptors.shape[1]

    def __len__(self):
        return self.frame_index.size

    def counts_per_frame(self) -> np.ndarray:
        return np.bincount(self.frame_index - 1, minlength=self.video_length)


@dataclass(frozen=True, eq=False)
class Dictionary:
    words: np.ndarray
    idf: np.ndarray

    def __post_init__(self):
        words = np.asarray(self.words, dtype=float)
        idf = np.asarray(self.idf, dtype=float)
        if words.ndim != 2 or words.shape[0] < 2:
            raise ValueError("a dictionary needs at least 2 words")
        if not np.all(np.isfinite(words)):
            raise ValueError("non-finite word centroid")
        if idf.shape != (words.shape[0],) or np.any(idf < 0):
            raise ValueError("idf must hold one non-negative weight per word")
        object.__setattr__(self, "words", words)
        object.__setattr__(self, "idf", idf)

    @property
    def K(self) -> int:
        return self.words.shape[0]

    @property
    def dim(self) -> int:
        return self.words.shape[1]

    def quantize(self, descriptors) -> np.ndarray:
        """Index of the nearest word (squared Euclidean) per descriptor."""
        descriptors = np.atleast_2d(np.asarray(descriptors, dtype=float))
        if descriptors.shape[0] == 0:
            return np.zeros(0, dtype=np.int64)
        if descriptors.shape[1] != self.dim:
            raise DimensionError(f"descriptor dimension {descriptors.shape[1]} != dictionary dimension {self.dim}")
        return np.argmin(cdist(descriptors, self.words, "sqeuclidean"), axis=1)

    def with_idf(self, idf) -> "Dictionary":
        return Dictionary(self.words, idf)


def build_dictionary(streams: Sequence[KeypointStream], K: int, seed: int = 0) -> Dictionary:
    """k-means (k-means++ init, one run, at most 100 iterations) over all
    keypoint descriptors. IDF weights start at 1."""
    descriptors = np.concatenate([s.descriptors for s in streams]) if streams else np.zeros((0, 0))
    if descriptors.shape[0] < K:
        raise CapacityError(f"{descriptors.shape[0]} keypoints cannot support {K} words")
    km = KMeans(n_clusters=K, init="k-means++", n_init=1, max_iter=100, tol=1e-6, random_state=seed)
    km.fit(descriptors)
    return Dictionary(km.cluster_centers_, np.ones(K))


def adaptive_window(stream: KeypointStream, t: int, Q: int, cap: int | None = None) -> tuple:
    """Smallest symmetric window around frame ``t`` holding ``Q`` keypoints.

    The half-width grows from 0 up to ``cap`` (default: video length); the
    bounds are clipped to the video. Returns 1-based inclusive ``(lo, hi)``.
    """
    n = stream.video_length
    if not 1 <= t <= n:
        raise ValueError(f"frame {t} outside [1, {n}]")
    cap = n if cap is None else cap
    csum = np.concatenate([[0], np.cumsum(stream.counts_per_frame())])
    return _grow(csum, t, Q, cap, n)


def _grow(csum, t, Q, cap, n):
    for w in range(cap + 1):
        lo, hi = max(1, t - w), min(n, t + w)
        if csum[hi] - csum[lo - 1] >= Q:
            return lo, hi
    return max(1, t - cap), min(n, t + cap)


def frame_windows(stream: KeypointStream, Q: int | None = None, cap: int | None = None,
                  fixed_window: int | None = None) -> np.ndarray:
    """``(T, 2)`` array of 1-based window bounds for every frame."""
    n = stream.video_length
    out = np.empty((n, 2), dtype=np.int64)
    if fixed_window is not None:
        half = (fixed_window - 1) // 2
        for t in range(1, n + 1):
            out[t - 1] = max(1, t - half), min(n, t + fixed_window - 1 - half)
        return out
    if Q is None:
        raise ValueError("either Q or fixed_window is required")
    cap = n if cap is None else cap
    csum = np.concatenate([[0], np.cumsum(stream.counts_per_frame())])
    for t in range(1, n + 1):
        out[t - 1] = _grow(csum, t, Q, cap, n)
    return out


def histograms(stream: KeypointStream, dictionary: Dictionary, Q: int | None = None, cap: int | None = None,
               fixed_window: int | None = None) -> np.ndarray:
    """Raw word counts per frame over each frame's window, shape ``(T, K)``."""
    if len(stream) and stream.dim != dictionary.dim:
        raise DimensionError(f"stream dimension {stream.dim} != dictionary dimension {dictionary.dim}")
    words = dictionary.quantize(stream.descriptors)
    per_frame = np.zeros((stream.video_length, dictionary.K))
    np.add.at(per_frame, (stream.frame_index - 1, words), 1.0)
    csum = np.vstack([np.zeros(dictionary.K), np.cumsum(per_frame, axis=0)])
    win = frame_windows(stream, Q, cap, fixed_window)
    return csum[win[:, 1]] - csum[win[:, 0] - 1]


def featurize(stream: KeypointStream, dictionary: Dictionary, Q: int | None = None, cap: int | None = None,
              use_idf: bool = True, fixed_window: int | None = None) -> TimeSeries:
    """Unit-norm (optionally IDF-weighted) word histograms, one per frame."""
    h = histograms(stream, dictionary, Q, cap, fixed_window)
    if use_idf:
        h = h * dictionary.idf
    return TimeSeries.from_array(h)


def compute_idf(counts: Sequence[np.ndarray]) -> np.ndarray:
    """``ln(N / n_k)`` over the N non-empty frames, where ``n_k`` frames use
    word k; words never seen get ``ln(N)``."""
    H = np.concatenate([np.atleast_2d(c) for c in counts])
    H = H[H.sum(axis=1) > 0]
    if H.shape[0] == 0:
        raise ValueError("idf needs at least one non-empty frame")
    N = H.shape[0]
    n_k = (H > 0).sum(axis=0)
    return np.log(N / np.maximum(n_k, 1))


def read_keypoints(path) -> KeypointStream:
    """JSON-lines: header ``{"video_length", "dim"}`` then ``{"t", "desc"}`` per keypoint."""
    with open(path) as fh:
        lines = [(i, ln) for i, ln in enumerate(fh, start=1) if ln.strip()]
    if not lines:
        raise FormatError(f"{path}: empty keypoint file")
    try:
        header = json.loads(lines[0][1])
        n, dim = int(header["video_length"]), int(header["dim"])
    except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
        raise FormatError(f"{path}: line {lines[0][0]}: bad header ({exc})") from exc
    frames, desc = [], []
    for lineno, ln in lines[1:]:
        try:
            obj = json.loads(ln)
            frames.append(int(obj["t"]))
            d = [float(v) for v in obj["desc"]]
        except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
            raise FormatError(f"{path}: line {lineno}: {exc}") from exc
        if len(d) != dim:
            raise DimensionError(f"{path}: line {lineno}: descriptor has {len(d)} values, expected {dim}")
        desc.append(d)
    return KeypointStream(np.array(frames, dtype=np.int64), np.array(desc, dtype=float).reshape(-1, dim), n)


def write_keypoints(stream: KeypointStream, path):
    lines = [json.dumps({"format_version": FORMAT_VERSION, "video_length": stream.video_length, "dim": stream.dim})]
    lines += [json.dumps({"t": int(t), "desc": d.tolist()}) for t, d in zip(stream.frame_index, stream.descriptors)]
    _atomic_write_text(path, "\n".join(lines) + "\n")


def save_dictionary(d: Dictionary, path):
    write_json({"format_version": FORMAT_VERSION, "K": d.K, "dim": d.dim,
                "words": d.words.tolist(), "idf": d.idf.tolist()}, path)


def load_dictionary(path) -> Dictionary:
    obj = read_json(path)
    try:
        d = Dictionary(np.array(obj["words"], dtype=float), np.array(obj["idf"], dtype=float))
    except (KeyError, TypeError, ValueError) as exc:
        raise FormatError(f"{path}: {exc}") from exc
    if d.K != obj.get("K", d.K) or d.dim != obj.get("dim", d.dim):
        raise FormatError(f"{path}: K/dim fields disagree with words")
    return d
