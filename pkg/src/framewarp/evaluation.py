"""Frame-level scoring of label tracks and runtime scaling measurements."""
from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from .core import FORMAT_VERSION, Segmentation, TimeSeries
from .metaframe import DistanceConfig, cell_distances
from .onepass import one_pass_costs
from .templates import NULL_LABEL, SuperTemplate
from .twopass import tables_from_costs


@dataclass(frozen=True, eq=False)
class EvalReport:
    """Frame accuracy (percent), confusion counts and boundary error.

    ``confusion[i, j]`` counts frames of true label ``labels[i]`` predicted
    as ``labels[j]``. ``per_class_accuracy`` is NaN for labels absent from
    the ground truth.
    """

    frame_accuracy: float
    confusion: np.ndarray
    labels: tuple
    per_class_accuracy: np.ndarray
    boundary_mae: float

    def to_dict(self) -> dict:
        return {
            "format_version": FORMAT_VERSION,
            "frame_accuracy": self.frame_accuracy,
            "labels": list(self.labels),
            "confusion": self.confusion.tolist(),
            "per_class_accuracy": [None if np.isnan(a) else float(a) for a in self.per_class_accuracy],
            "boundary_mae": self.boundary_mae,
        }

    def recall(self, label) -> float:
        return float(self.per_class_accuracy[self.labels.index(label)])


def _track(x) -> np.ndarray:
    if isinstance(x, Segmentation):
        return x.frame_labels()
    return np.asarray(x, dtype=int).reshape(-1)


def label_boundaries(labels) -> list:
    """1-based frames where the label changes."""
    labels = _track(labels)
    return (np.flatnonzero(np.diff(labels)) + 2).tolist()


def boundary_mae(pred, gt, length: int) -> float:
    """Symmetric nearest-boundary error in frames.

    Every boundary of either list is matched to the closest boundary of the
    other; a boundary with nothing to match costs ``length / 2``. Returns 0
    when both lists are empty.
    """
    pred = np.asarray(pred, dtype=float)
    gt = np.asarray(gt, dtype=float)
    errs = []
    for a, b in ((pred, gt), (gt, pred)):
        if a.size == 0:
            continue
        if b.size == 0:
            errs.extend([length / 2.0] * a.size)
        else:
            errs.extend(np.abs(a[:, None] - b[None, :]).min(axis=1).tolist())
    return float(np.mean(errs)) if errs else 0.0


def frame_accuracy(pred, gt) -> EvalReport:
    """Compare two per-frame label tracks (arrays or segmentations).

    The null label 0 always takes part in the confusion matrix.
    """
    p, g = _track(pred), _track(gt)
    if p.shape != g.shape:
        raise ValueError(f"prediction has {p.size} frames, ground truth {g.size}")
    if p.size == 0:
        raise ValueError("empty label tracks")
    labels = tuple(sorted({NULL_LABEL} | set(g.tolist()) | set(p.tolist())))
    index = {l: i for i, l in enumerate(labels)}
    conf = np.zeros((len(labels), len(labels)), dtype=np.int64)
    np.add.at(conf, (np.vectorize(index.get)(g), np.vectorize(index.get)(p)), 1)
    rows = conf.sum(axis=1)
    with np.errstate(invalid="ignore", divide="ignore"):
        per_class = np.where(rows > 0, 100.0 * np.diag(conf) / rows, np.nan)
    pb = pred.boundaries() if isinstance(pred, Segmentation) else label_boundaries(p)
    gb = gt.boundaries() if isinstance(gt, Segmentation) else label_boundaries(g)
    return EvalReport(
        100.0 * float(np.trace(conf)) / p.size,
        conf,
        labels,
        per_class,
        boundary_mae(pb, gb, p.size),
    )


def _linear_fit(x, y):
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    ss_tot = float(((y - y.mean()) ** 2).sum())
    r2 = 1.0 - float((resid ** 2).sum()) / ss_tot if ss_tot > 0 else 1.0
    return float(slope), float(intercept), r2


def _synthetic_input(model: SuperTemplate, T: int, seed: int) -> TimeSeries:
    # test frames drawn from the model's own metaframes plus a little noise
    rng = np.random.default_rng(seed)
    pool = np.concatenate([mf.frames for t in model for mf in t.metaframes])
    pick = rng.integers(0, pool.shape[0], size=T)
    return TimeSeries.from_array(np.abs(pool[pick] + 0.05 * rng.standard_normal((T, pool.shape[1]))))


def benchmark_scaling(model: SuperTemplate, lengths, mode: str = "one-pass", cfg: DistanceConfig | None = None,
                      t_min: int = 2, repeats: int = 3, seed: int = 0, threads: int = 1, inputs=None) -> dict:
    """Time recognition on inputs of increasing length.

    Each length is run once to warm up, then ``repeats`` times; the fastest
    run is kept. ``distance_evals`` counts frame-to-metaframe distances,
    which is ``L * T_Y * T_Z`` for every mode.

    Returns a dict with a ``rows`` table and a linear fit of wall time
    against length (``slope``, ``intercept``, ``r2``).
    """
    lengths = [int(n) for n in lengths]
    if any(b <= a for a, b in zip(lengths, lengths[1:])):
        raise ValueError("lengths must be strictly increasing")
    if mode not in ("one-pass", "two-pass"):
        raise ValueError(f"unknown mode {mode!r}")
    cfg = cfg or DistanceConfig()
    rows = []
    for i, T in enumerate(lengths):
        Z = inputs[i] if inputs is not None else _synthetic_input(model, T, seed + i)

        def run():
            C, evals = cell_distances(Z, model, cfg, threads)
            if mode == "one-pass":
                one_pass_costs(C, model)
                return evals, None
            return evals, tables_from_costs(C, model, t_min, evals).n_subsequences

        run()
        best = np.inf
        for _ in range(max(1, repeats)):
            start = time.perf_counter()
            evals, n_sub = run()
            best = min(best, time.perf_counter() - start)
        row = {"T_Z": T, "wall_time": best, "distance_evals": int(evals)}
        if n_sub is not None:
            row["subsequences"] = int(n_sub)
        rows.append(row)
    slope, intercept, r2 = _linear_fit(lengths, [r["wall_time"] for r in rows])
    return {
        "format_version": FORMAT_VERSION,
        "mode": mode,
        "L": len(model),
        "model_length": model.total_length,
        "rows": rows,
        "slope": slope,
        "intercept": intercept,
        "r2": r2,
    }
