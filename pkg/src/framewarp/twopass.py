"""Two-pass continuous recognition.

The action-level pass scores every sub-sequence ``Z[tb..te]`` (with
``te - tb >= t_min``) against every template by isolated warping and keeps
the best label and score. The sequence-level pass then picks the tiling of
``1..T_Z`` into such sub-sequences with the smallest summed score.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .core import Segment, Segmentation, TimeSeries
from .metaframe import DistanceConfig, cell_distances
from .templates import SuperTemplate

DEFAULT_T_MIN = 2


@dataclass(frozen=True, eq=False)
class SubsequenceTables:
    """Best label and score per sub-sequence, indexed ``[tb - 1, te - 1]``.

    Cells with ``te - tb < t_min`` hold ``inf`` and label -1.
    """

    best_label: np.ndarray
    best_cost: np.ndarray
    t_min: int
    n_subsequences: int = 0
    distance_evals: int = 0

    @property
    def length(self) -> int:
        return self.best_cost.shape[0]


def action_level_pass(Z: TimeSeries, model: SuperTemplate, t_min: int = DEFAULT_T_MIN,
                      cfg: DistanceConfig | None = None, threads: int = 1) -> SubsequenceTables:
    """Isolated warping of every admissible sub-sequence against every template.

    Frame-to-metaframe distances are computed once on the full grid and
    shared by all sub-sequences.
    """
    if t_min < 1:
        raise ValueError("t_min must be >= 1")
    if len(Z) <= t_min:
        raise ValueError(f"series of {len(Z)} frames is too short for t_min={t_min}")
    C, evals = cell_distances(Z, model, cfg, threads)
    return tables_from_costs(C, model, t_min, evals)


def tables_from_costs(C, model: SuperTemplate, t_min: int, distance_evals: int = 0) -> SubsequenceTables:
    T = C.shape[0]
    best = np.full((T, T), np.inf)
    label = np.full((T, T), -1, dtype=int)
    n_sub = 0
    order = sorted(range(len(model)), key=lambda i: model.templates[i].label)
    for i in order:
        tmpl, off = model.templates[i], model.offsets[i]
        scores = np.full((T, T), np.inf)
        n_sub = _kernels.subsequence_scores(np.ascontiguousarray(C[:, off:off + len(tmpl)]), t_min, scores)
        better = scores < best
        best[better] = scores[better]
        label[better] = tmpl.label
    return SubsequenceTables(label, best, t_min, int(n_sub), distance_evals)


def sequence_level_pass(tables: SubsequenceTables, T_Z: int | None = None):
    """Cheapest tiling of ``1..T_Z`` by admissible sub-sequences.

    Returns
    -------
    seg : Segmentation
    score : float
        Sum of the chosen sub-sequence scores.
    """
    T = tables.length if T_Z is None else T_Z
    t_min = tables.t_min
    if T < t_min + 1:
        raise ValueError(f"no tiling of {T} frames into segments of at least {t_min + 1}")
    d = tables.best_cost[:T, :T]
    acc = np.full((T, T), np.inf)
    prev = np.full((T, T), -1, dtype=int)
    acc[0, t_min:] = d[0, t_min:]
    for tb in range(1, T):
        hi = tb - t_min  # last admissible begin of the preceding segment (0-based)
        if hi < 0:
            continue
        column = acc[: hi + 1, tb - 1]
        k = int(np.argmin(column))
        if not np.isfinite(column[k]):
            continue
        te = np.arange(tb + t_min, T)
        acc[tb, te] = d[tb, te] + column[k]
        prev[tb, te] = k
    last = acc[:, T - 1]
    tb = int(np.argmin(last))
    if not np.isfinite(last[tb]):
        raise ValueError("no admissible tiling")
    score = float(last[tb])
    segs = []
    te = T - 1
    while True:
        segs.append(Segment(tb + 1, te + 1, int(tables.best_label[tb, te])))
        if tb == 0:
            break
        tb, te = int(prev[tb, te]), tb - 1
    segs.reverse()
    return Segmentation(tuple(segs)), score


def tp_dfw_segment(Z: TimeSeries, model: SuperTemplate, t_min: int = DEFAULT_T_MIN,
                   cfg: DistanceConfig | None = None, threads: int = 1):
    """Both passes; returns ``(segmentation, score)``."""
    tables = action_level_pass(Z, model, t_min, cfg, threads)
    return sequence_level_pass(tables, len(Z))
