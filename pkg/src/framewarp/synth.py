"""Deterministic synthetic corpora of labeled action sequences.

Every class owns a trajectory through word space (a signature). An actor
renders an action by resampling the trajectory at its own speed and
adding noise; a sequence concatenates several actions, optionally with
out-of-vocabulary gaps labeled 0. Frames are either produced directly or
as keypoint streams whose descriptors quantize to the signature's words.

Three kinds of corpora are available:

``"smooth"``
    Each class sweeps a bump across its own subset of words.
``"periodic"``
    Class 1 repeats a short cycle through a ring of words 3 to 6 times and
    is annotated per repetition (pattern label ``PATTERN_OFFSET + 1``);
    class 2 spreads over the same ring with a broad, slowly drifting profile;
    the remaining classes are smooth.
``"jitter"``
    Classes visit the same words in different orders, and every rendered
    action has its frames shuffled within small blocks.
"""
from __future__ import annotations

from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import numpy as np

from .core import FORMAT_VERSION, Segment, Segmentation, TimeSeries, _atomic_write_text, write_json, write_time_series
from .features import Dictionary, KeypointStream, save_dictionary, write_keypoints
from .templates import NULL_LABEL

PATTERN_OFFSET = 100
KINDS = ("smooth", "periodic", "jitter")


@dataclass(frozen=True)
class SynthConfig:
    n_classes: int = 3
    n_actors: int = 5
    actions_per_sequence: tuple = (4, 8)
    mean_action_length: float = 40.0
    length_jitter: float = 0.3
    signature_noise: float = 0.1
    background_noise: float = 0.0
    smoothing_window: int = 1
    keypoint_rate: float = 0.0
    null_gap_prob: float = 0.0
    seed: int = 0
    kind: str = "smooth"
    sequences_per_actor: int = 2
    words_per_class: int = 6
    null_length_ratio: float = 0.5
    actor_speed_spread: float = 0.15
    actor_warp_spread: float = 0.35
    pattern_length: int = 10
    pattern_repeats: tuple = (3, 6)
    shuffle_window: int = 5
    descriptor_dim: int = 16

    def __post_init__(self):
        aps = tuple(int(v) for v in np.atleast_1d(self.actions_per_sequence))
        if len(aps) == 1:
            aps = aps * 2
        object.__setattr__(self, "actions_per_sequence", aps)
        object.__setattr__(self, "pattern_repeats", tuple(int(v) for v in self.pattern_repeats))
        for name in ("n_classes", "n_actors", "sequences_per_actor", "words_per_class", "pattern_length",
                     "shuffle_window", "descriptor_dim", "smoothing_window"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be positive")
        if not 1 <= aps[0] <= aps[1]:
            raise ValueError(f"bad actions_per_sequence {aps}")
        if not 1 <= self.pattern_repeats[0] <= self.pattern_repeats[1]:
            raise ValueError(f"bad pattern_repeats {self.pattern_repeats}")
        if self.mean_action_length < 2:
            raise ValueError("mean_action_length must be at least 2")
        for name in ("length_jitter", "signature_noise", "background_noise", "null_gap_prob", "actor_speed_spread"):
            if not 0.0 <= getattr(self, name) <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1]")
        if self.keypoint_rate < 0 or self.null_length_ratio <= 0 or self.actor_warp_spread < 0:
            raise ValueError("keypoint_rate, null_length_ratio and actor_warp_spread must be non-negative")
        if self.kind not in KINDS:
            raise ValueError(f"kind must be one of {KINDS}, got {self.kind!r}")
        if self.kind == "periodic" and self.n_classes < 2:
            raise ValueError("the periodic corpus needs at least 2 classes")

    @property
    def dim(self) -> int:
        return self.n_classes * self.words_per_class

    def to_dict(self) -> dict:
        d = asdict(self)
        d["actions_per_sequence"] = list(self.actions_per_sequence)
        d["pattern_repeats"] = list(self.pattern_repeats)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "SynthConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(d) - known - {"format_version"}
        if unknown:
            raise ValueError(f"unknown synth config keys {sorted(unknown)}")
        return cls(**{k: v for k, v in d.items() if k in known})


@dataclass(frozen=True, eq=False)
class SynthSequence:
    """One rendered sequence.

    ``parts`` splits each action into its annotated units: whole actions,
    or single repetitions (with pattern labels) for periodic actions.
    """

    actor: int
    series: TimeSeries
    labels: np.ndarray
    parts: tuple
    stream: KeypointStream | None = None

    def segmentation(self) -> Segmentation:
        return Segmentation(self.parts)

    def ground_truth(self) -> Segmentation:
        return Segmentation.from_labels(self.labels)


@dataclass(frozen=True, eq=False)
class SynthCorpus:
    config: SynthConfig
    sequences: tuple
    word_centers: np.ndarray | None = None
    alias: dict = field(default_factory=dict)

    @property
    def patterns(self) -> tuple:
        return tuple(sorted(l for l in self.alias if l != self.alias[l]))

    def by_actor(self, actor: int) -> list:
        return [s for s in self.sequences if s.actor == actor]

    def split(self, test_actor: int):
        """Training and test sequences for one leave-one-actor-out fold."""
        train = [s for s in self.sequences if s.actor != test_actor]
        test = [s for s in self.sequences if s.actor == test_actor]
        return train, test


def training_examples(sequences, use_parts: bool = True):
    """Cut annotated units out of sequences.

    Returns ``(examples_by_label, background_frames)``; background frames
    are the frames labeled 0, or ``None`` when there are none.
    """
    examples, background = {}, []
    for s in sequences:
        for b, e, label in (s.parts if use_parts else Segmentation.from_labels(s.labels).segments):
            if label == NULL_LABEL:
                background.append(s.series.frames[b - 1:e][~s.series.empty[b - 1:e]])
            else:
                examples.setdefault(label, []).append(s.series.slice(b, e))
    bg = np.concatenate(background) if background else None
    return examples, bg


# ---------------------------------------------------------------- signatures

def _bump(pos, n, width):
    k = np.arange(n)
    return np.exp(-0.5 * ((k - pos) / width) ** 2)


def _ring_bump(pos, n, width):
    k = np.arange(n)
    d = np.abs(k - pos % n)
    d = np.minimum(d, n - d)
    return np.exp(-0.5 * (d / width) ** 2)


class _Signatures:
    """Callable trajectories ``f(label, s) -> (len(s), K)`` for ``s`` in [0, 1]."""

    def __init__(self, cfg: SynthConfig, rng):
        self.cfg = cfg
        self.K = cfg.dim
        m = cfg.words_per_class
        self.orders = {}
        if cfg.kind == "jitter":
            # shared vocabulary, class-specific visiting order
            n_keys = 2 * m
            for c in range(1, cfg.n_classes + 1):
                self.orders[c] = rng.permutation(self.K)[:n_keys]

    def __call__(self, label, s):
        cfg, K, m = self.cfg, self.K, self.cfg.words_per_class
        s = np.asarray(s, dtype=float)
        out = np.zeros((s.size, K))
        if cfg.kind == "jitter":
            keys = self.orders[label]
            idx = np.minimum((s * len(keys)).astype(int), len(keys) - 1)
            out[np.arange(s.size), keys[idx]] = 1.0
            return out
        if cfg.kind == "periodic" and label in (1, 2, PATTERN_OFFSET + 1):
            # ring of 2m words shared by the pattern and its decoy
            ring = 2 * m
            for i, p in enumerate(s):
                if label == 2:
                    out[i, :ring] = 1.0 + 0.5 * _ring_bump(p * ring, ring, 3.0)
                else:
                    out[i, :ring] = _ring_bump(p * ring, ring, 0.8)
            return out
        lo = (label - 1) * m
        for i, p in enumerate(s):
            out[i, lo:lo + m] = _bump(p * (m - 1), m, 0.8) + 0.5 * _bump((1 - p) * (m - 1), m, 1.5)
        return out


def _actor_params(cfg, rng):
    speed = 1.0 + cfg.actor_speed_spread * rng.uniform(-1, 1, cfg.n_actors)
    warp = np.exp(cfg.actor_warp_spread * rng.uniform(-1, 1, cfg.n_actors))
    return speed, warp


def _render(sig, label, n, warp, cfg, rng):
    s = ((np.arange(n) + 0.5) / n) ** warp
    frames = sig(label, s)
    # signature noise stays on the words active in each frame; background noise hits every word
    support = frames > 0.01 * frames.max(axis=1, keepdims=True)
    frames = frames + cfg.signature_noise * rng.standard_normal(frames.shape) * support
    if cfg.background_noise > 0:
        frames = frames + cfg.background_noise * rng.standard_normal(frames.shape)
    frames = np.clip(frames, 0.0, None)
    if cfg.kind == "jitter" and cfg.shuffle_window > 1:
        for b in range(0, n, cfg.shuffle_window):
            blk = slice(b, min(n, b + cfg.shuffle_window))
            frames[blk] = frames[blk][rng.permutation(frames[blk].shape[0])]
    return frames


def _length(mean, cfg, rng, speed=1.0):
    return max(2, int(round(mean * speed * (1.0 + cfg.length_jitter * rng.uniform(-1, 1)))))


def _null_gap(cfg, rng):
    n = _length(cfg.mean_action_length * cfg.null_length_ratio, cfg, rng)
    a, b = rng.uniform(0, 1, cfg.dim), rng.uniform(0, 1, cfg.dim)
    w = np.linspace(0, 1, n)[:, None]
    frames = (1 - w) * a + w * b + cfg.signature_noise * rng.standard_normal((n, cfg.dim))
    return np.clip(frames, 0.0, None)


def _action(sig, label, cfg, rng, speed, warp):
    """Frames plus annotated parts (relative, 1-based) of one action."""
    if cfg.kind == "periodic" and label == 1:
        reps = int(rng.integers(cfg.pattern_repeats[0], cfg.pattern_repeats[1] + 1))
        blocks, parts, pos = [], [], 0
        for _ in range(reps):
            n = max(2, int(round(cfg.pattern_length * speed * (1.0 + 0.1 * rng.uniform(-1, 1)))))
            blocks.append(_render(sig, label, n, warp, cfg, rng))
            parts.append((pos + 1, pos + n, PATTERN_OFFSET + 1))
            pos += n
        return np.concatenate(blocks), parts
    n = _length(cfg.mean_action_length, cfg, rng, speed)
    return _render(sig, label, n, warp, cfg, rng), [(1, n, label)]


def _smooth(frames, width):
    # moving sum over a centered window, like histogramming a fixed temporal window
    if width <= 1:
        return frames
    half = (width - 1) // 2
    csum = np.vstack([np.zeros(frames.shape[1]), np.cumsum(frames, axis=0)])
    T = frames.shape[0]
    lo = np.clip(np.arange(T) - half, 0, T)
    hi = np.clip(np.arange(T) + width - half, 0, T)
    return csum[hi] - csum[lo]


def _keypoints(frames, centers, rate, rng):
    T = frames.shape[0]
    t_idx, desc = [], []
    for t in range(T):
        p = frames[t]
        total = p.sum()
        n = int(rng.poisson(rate))
        if total <= 0 or n == 0:
            continue
        words = rng.choice(len(p), size=n, p=p / total)
        t_idx.extend([t + 1] * n)
        desc.append(centers[words] + 0.1 * rng.standard_normal((n, centers.shape[1])))
    D = centers.shape[1]
    desc = np.concatenate(desc) if desc else np.zeros((0, D))
    return KeypointStream(np.array(t_idx, dtype=np.int64), desc, T)


def generate_corpus(cfg: SynthConfig) -> SynthCorpus:
    """Render ``n_actors * sequences_per_actor`` sequences from ``cfg.seed``."""
    rng = np.random.default_rng(cfg.seed)
    sig = _Signatures(cfg, rng)
    speed, warp = _actor_params(cfg, rng)
    centers = None
    if cfg.keypoint_rate > 0:
        centers = 3.0 * rng.standard_normal((cfg.dim, cfg.descriptor_dim))
    sequences = []
    for a in range(cfg.n_actors):
        for _ in range(cfg.sequences_per_actor):
            n_act = int(rng.integers(cfg.actions_per_sequence[0], cfg.actions_per_sequence[1] + 1))
            blocks, labels, parts, pos, prev = [], [], [], 0, None
            for _ in range(n_act):
                if cfg.null_gap_prob > 0 and rng.uniform() < cfg.null_gap_prob:
                    g = _null_gap(cfg, rng)
                    blocks.append(g)
                    labels.append(np.full(g.shape[0], NULL_LABEL))
                    parts.append(Segment(pos + 1, pos + g.shape[0], NULL_LABEL))
                    pos += g.shape[0]
                choices = [c for c in range(1, cfg.n_classes + 1) if c != prev]
                label = int(choices[rng.integers(len(choices))])
                prev = label
                frames, rel = _action(sig, label, cfg, rng, speed[a], warp[a])
                blocks.append(frames)
                labels.append(np.full(frames.shape[0], label))
                parts.extend(Segment(pos + b, pos + e, l) for b, e, l in rel)
                pos += frames.shape[0]
            raw = _smooth(np.concatenate(blocks), cfg.smoothing_window)
            stream = None
            if centers is not None:
                stream = _keypoints(raw, centers, cfg.keypoint_rate, rng)
            sequences.append(SynthSequence(a + 1, TimeSeries.from_array(raw), np.concatenate(labels), tuple(parts), stream))
    alias = {c: c for c in range(1, cfg.n_classes + 1)}
    alias[NULL_LABEL] = NULL_LABEL
    if cfg.kind == "periodic":
        alias[PATTERN_OFFSET + 1] = 1
    return SynthCorpus(cfg, tuple(sequences), centers, alias)


def word_dictionary(corpus: SynthCorpus) -> Dictionary:
    """The dictionary the keypoints were drawn from (unit IDF)."""
    if corpus.word_centers is None:
        raise ValueError("corpus was generated without keypoints")
    return Dictionary(corpus.word_centers, np.ones(corpus.word_centers.shape[0]))


def write_corpus(corpus: SynthCorpus, out_dir):
    """Write series, label tracks, keypoints and an annotation CSV to ``out_dir``.

    ``annotations.csv`` lists ``series_path,begin,end,label`` per annotated
    unit and can be fed straight to training.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    rows = ["series_path,begin,end,label"]
    entries = []
    for i, s in enumerate(corpus.sequences, start=1):
        stem = f"seq_{i:03d}"
        write_time_series(s.series, out / f"{stem}.csv")
        _atomic_write_text(out / f"{stem}_labels.csv", "\n".join(str(int(v)) for v in s.labels) + "\n")
        entry = {"actor": s.actor, "series": f"{stem}.csv", "labels": f"{stem}_labels.csv"}
        if s.stream is not None:
            write_keypoints(s.stream, out / f"{stem}.jsonl")
            entry["keypoints"] = f"{stem}.jsonl"
        entries.append(entry)
        rows.extend(f"{stem}.csv,{b},{e},{l}" for b, e, l in s.parts)
    _atomic_write_text(out / "annotations.csv", "\n".join(rows) + "\n")
    manifest = {
        "format_version": FORMAT_VERSION,
        "config": corpus.config.to_dict(),
        "sequences": entries,
        "alias": {str(k): v for k, v in sorted(corpus.alias.items())},
        "patterns": list(corpus.patterns),
    }
    if corpus.word_centers is not None:
        manifest["dictionary"] = "dictionary.json"
        save_dictionary(word_dictionary(corpus), out / "dictionary.json")
    write_json(manifest, out / "manifest.json")
    return out / "manifest.json"
