"""One-pass continuous recognition.

A single dynamic program runs over the grid of test frames against the
super-template. Inside a template the usual warping steps apply; from the
last frame of any template the path may jump, one test frame later, to the
first frame of any template (itself included). Per-class duration bounds
gate these jumps and the final frame.

Two ways of tracking durations are available:

``"exact"`` (default)
    The DP state also holds the number of test frames consumed in the
    current template visit, so the returned path is the cheapest among all
    paths whose every visit satisfies its bounds.
``"greedy"``
    One accumulated length per grid cell, inherited from the cheapest
    predecessor. Cheaper in memory but may miss the optimum when a bound
    is active.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .core import AlignmentPath, Segment, Segmentation, TimeSeries
from .metaframe import DistanceConfig, cell_distances
from .templates import SuperTemplate

logger = logging.getLogger(__name__)


class InfeasibleError(RuntimeError):
    """No path satisfies the duration bounds."""


@dataclass(frozen=True, eq=False)
class OnePassResult:
    segmentation: Segmentation
    path: AlignmentPath
    score: float
    cost: float
    relaxed: bool = False
    distance_evals: int = 0
    grid: np.ndarray = None

    def __iter__(self):
        # unpacks as (segmentation, path, score)
        return iter((self.segmentation, self.path, self.score))


def _bounds(model: SuperTemplate, enforce_lengths: bool):
    constrained = np.array([enforce_lengths and t.constrained for t in model], dtype=np.bool_)
    t_min = np.array([t.t_min if c else 1 for t, c in zip(model, constrained)], dtype=np.int64)
    t_max = np.array([int(t.t_max) if c else 1 for t, c in zip(model, constrained)], dtype=np.int64)
    return t_min, t_max, constrained


def _pick_terminal(term):
    costs = term[:, 0]
    if not np.isfinite(costs).any():
        return None
    return int(np.argmin(costs))


def _backtrack_exact(codes, jump_k, jump_n, n_dim, base, lens, l, ni, T):
    t, tp = T - 1, lens[l] - 1
    steps = []
    visit = 0
    while True:
        steps.append((t, l, tp, visit))
        code = codes[t, base[l] + tp * n_dim[l] + ni]
        if code == _kernels.START:
            break
        shrink = 1 if n_dim[l] > 1 else 0
        if code == _kernels.DIAG:
            t, tp, ni = t - 1, tp - 1, ni - shrink
        elif code == _kernels.HORIZ:
            t, ni = t - 1, ni - shrink
        elif code == _kernels.VERT:
            tp -= 1
        elif code == _kernels.JUMP:
            l, tp, ni = jump_k[t], lens[jump_k[t]] - 1, jump_n[t]
            t -= 1
            visit += 1
        else:
            raise RuntimeError(f"broken back-pointer at t={t}, template {l}, frame {tp}")
    return steps


def _backtrack_greedy(codes, jump_k, off, lens, l, T):
    t, tp = T - 1, lens[l] - 1
    steps = []
    visit = 0
    while True:
        steps.append((t, l, tp, visit))
        code = codes[t, off[l] + tp]
        if code == _kernels.START:
            break
        if code == _kernels.DIAG:
            t, tp = t - 1, tp - 1
        elif code == _kernels.HORIZ:
            t -= 1
        elif code == _kernels.VERT:
            tp -= 1
        elif code == _kernels.JUMP:
            l = jump_k[t]
            tp = lens[l] - 1
            t -= 1
            visit += 1
        else:
            raise RuntimeError(f"broken back-pointer at t={t}, template {l}, frame {tp}")
    return steps


def _assemble(steps, labels, C, off):
    steps.reverse()
    n_visits = steps[0][3]
    t = np.array([s[0] + 1 for s in steps])
    tp = np.array([s[2] + 1 for s in steps])
    lab = np.array([labels[s[1]] for s in steps])
    visit = np.array([n_visits - s[3] for s in steps])
    path = AlignmentPath(t, tp, lab, visit)
    # each test frame takes the template of its last cell; vertical steps share t
    last = {}
    for s in steps:
        last[s[0]] = s
    segs = []
    for ti in sorted(last):
        _, l, _, v = last[ti]
        if segs and segs[-1][3] == v:
            segs[-1][1] = ti + 1
        else:
            segs.append([ti + 1, ti + 1, labels[l], v])
    seg = Segmentation(tuple(Segment(b, e, lab_) for b, e, lab_, _ in segs))
    unweighted = float(sum(C[s[0], off[s[1]] + s[2]] for s in steps))
    return seg, path, unweighted


def one_pass_costs(C, model: SuperTemplate, enforce_lengths: bool = True, lengths: str = "exact",
                   relax: bool = True) -> OnePassResult:
    """Run the one-pass DP on a precomputed ``(T_Z, total length)`` cost grid."""
    C = np.ascontiguousarray(C, dtype=float)
    if C.ndim != 2 or C.shape[0] == 0 or C.shape[1] != model.total_length:
        raise ValueError(f"cost grid shape {C.shape} does not match model length {model.total_length}")
    if lengths not in ("exact", "greedy"):
        raise ValueError(f"unknown length tracking {lengths!r}")
    off, lens = model.offsets, model.lengths
    t_min, t_max, constrained = _bounds(model, enforce_lengths)
    T = C.shape[0]
    if lengths == "exact":
        codes, jump_k, jump_n, grid, term, n_dim, base = _kernels.one_pass_exact(C, off, lens, t_min, t_max, constrained)
    else:
        codes, jump_k, grid, _, term = _kernels.one_pass_greedy(C, off, lens, t_min, t_max, constrained)
    l = _pick_terminal(term)
    if l is None:
        if enforce_lengths and relax:
            logger.warning("duration bounds cannot be met by any path; retrying without them")
            res = one_pass_costs(C, model, False, lengths, relax=False)
            return OnePassResult(res.segmentation, res.path, res.score, res.cost, True, res.distance_evals, res.grid)
        raise InfeasibleError("no admissible path through the grid")
    if lengths == "exact":
        steps = _backtrack_exact(codes, jump_k, jump_n, n_dim, base, lens, l, int(term[l, 1]), T)
    else:
        steps = _backtrack_greedy(codes, jump_k, off, lens, l, T)
    seg, path, _ = _assemble(steps, model.labels, C, off)
    cost = float(term[l, 0])
    return OnePassResult(seg, path, cost / len(path), cost, False, 0, grid)


def op_dfw_segment(Z: TimeSeries, model: SuperTemplate, cfg: DistanceConfig | None = None,
                   enforce_lengths: bool = True, lengths: str = "exact", threads: int = 1) -> OnePassResult:
    """Segment and label ``Z`` in one pass over the super-template.

    The result unpacks as ``(segmentation, path, score)`` where ``score`` is
    the accumulated cost at the chosen terminal cell divided by the path
    length. ``relaxed`` is set when duration bounds had to be dropped.
    """
    C, evals = cell_distances(Z, model, cfg, threads)
    res = one_pass_costs(C, model, enforce_lengths, lengths)
    return OnePassResult(res.segmentation, res.path, res.score, res.cost, res.relaxed, evals, res.grid)


def op_dfw_stream_labels(seg: Segmentation, alias: dict) -> np.ndarray:
    """Per-frame labels after mapping pattern labels to their parents."""
    missing = sorted({s.label for s in seg.segments} - set(alias))
    if missing:
        raise KeyError(f"no alias for labels {missing}")
    return np.concatenate([np.full(s.end - s.begin + 1, alias[s.label], dtype=int) for s in seg.segments])


def alias_segmentation(seg: Segmentation, alias: dict) -> Segmentation:
    """Relabel segments through ``alias`` and merge equal neighbours."""
    return Segmentation.from_labels(op_dfw_stream_labels(seg, alias))
