"""Isolated recognition: warp a single-action series against each class
template with the frame-to-metaframe distance and keep the best."""
from __future__ import annotations

import numpy as np

from .core import TimeSeries
from .dtw import warp_costs
from .metaframe import DistanceConfig, cell_distances
from .templates import ClassTemplate, SuperTemplate, build_super_template


def dfw_align(Z: TimeSeries, template: ClassTemplate, cfg: DistanceConfig | None = None, threads: int = 1):
    """Warp ``Z`` against one class template.

    Returns the optimal path and its length-normalized distance sum.
    """
    if template.is_null:
        raise ValueError("the null template is not used for isolated alignment")
    C, _ = cell_distances(Z, build_super_template([template]), cfg, threads)
    path, score, _ = warp_costs(C, label=template.label)
    return path, score


def classify_isolated(Z: TimeSeries, model: SuperTemplate, cfg: DistanceConfig | None = None, threads: int = 1):
    """Label of the template with the lowest warping score.

    Returns
    -------
    label : int
        Lowest label among tied minima.
    scores : dict
        Score per non-null template label.
    """
    actions = model.without_null()
    if len(actions.templates) == 0:
        raise ValueError("model has no action templates")
    C, _ = cell_distances(Z, actions, cfg, threads)
    scores = {}
    for t, off in zip(actions.templates, actions.offsets):
        _, s, _ = warp_costs(C[:, off:off + len(t)])
        scores[t.label] = s
    best = min(scores.values())
    label = min(l for l, s in scores.items() if s == best)
    return label, scores
