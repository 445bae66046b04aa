"""Frame-to-metaframe distance.

A test frame is reconstructed from a few frames of the metaframe chosen by
orthogonal matching pursuit. On the selected atoms the distance is

    min over sum(w) = 1 of || z - X w / ||X w|| ||^2

which only depends on the direction of ``X w``; it equals
``2 - 2 ||P z||`` (``P`` the projection onto the atoms' span) whenever the
projection coefficients have a positive sum.
"""
from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass

import numpy as np

from . import _kernels
from .core import EMPTY_DISTANCE, DimensionError, TimeSeries
from .templates import DEFAULT_NULL_MAX_FRAMES, ClassTemplate, SuperTemplate, subsample_indices

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class DistanceConfig:
    gamma: float = 0.05
    max_support: int = 8
    w_meta: int = 1
    null_max_frames: int = DEFAULT_NULL_MAX_FRAMES

    def __post_init__(self):
        if self.gamma < 0:
            raise ValueError("gamma must be non-negative")
        if self.max_support < 1:
            raise ValueError("max_support must be >= 1")
        if self.w_meta < 1 or self.w_meta % 2 == 0:
            raise ValueError(f"w_meta must be a positive odd integer, got {self.w_meta}")

    def to_dict(self):
        return asdict(self)


@dataclass(frozen=True, eq=False)
class SparseCode:
    coefficients: np.ndarray
    support: np.ndarray
    residual: float
    residual_history: np.ndarray


def _atoms(columns):
    X = np.atleast_2d(np.asarray(columns, dtype=float))
    nonzero = np.linalg.norm(X, axis=1) > 0
    return np.ascontiguousarray(X[nonzero]), np.flatnonzero(nonzero)


def sparse_code(z, columns, gamma: float = 0.05, max_support: int = 8) -> SparseCode:
    """Orthogonal matching pursuit of ``z`` over the rows of ``columns``.

    Stops once the residual norm is at most ``gamma``, or the support holds
    ``max_support`` (or ``min(N, K)``) atoms. All-zero atoms are never
    selected.
    """
    z = np.asarray(z, dtype=float)
    X, keep = _atoms(columns)
    n = np.atleast_2d(columns).shape[0]
    if X.shape[1] != z.shape[0]:
        raise DimensionError(f"atom dimension {X.shape[1]} != frame dimension {z.shape[0]}")
    coefficients = np.zeros(n)
    if X.shape[0] == 0:
        r = float(np.linalg.norm(z))
        return SparseCode(coefficients, np.zeros(0, dtype=int), r, np.array([r]))
    support, coef, history = _kernels.omp(z, X, float(gamma), int(max_support))
    coefficients[keep[support]] = coef
    return SparseCode(coefficients, keep[support], float(history[-1]), history)


def frame_to_metaframe(z, selected_columns) -> float:
    """Closed-form normalized reconstruction distance, in [0, 2]."""
    z = np.asarray(z, dtype=float)
    X, _ = _atoms(selected_columns)
    if X.shape[0] == 0:
        return EMPTY_DISTANCE
    if X.shape[1] != z.shape[0]:
        raise DimensionError(f"atom dimension {X.shape[1]} != frame dimension {z.shape[0]}")
    return float(_kernels.constrained_distance(z, X))


def metaframe_distance(z, columns, gamma: float = 0.05, max_support: int = 8, z_empty: bool = False) -> float:
    """Sparse-code ``z`` over ``columns`` then measure the closed-form distance."""
    if z_empty:
        return EMPTY_DISTANCE
    z = np.asarray(z, dtype=float)
    X, _ = _atoms(columns)
    if X.shape[0] and X.shape[1] != z.shape[0]:
        raise DimensionError(f"atom dimension {X.shape[1]} != frame dimension {z.shape[0]}")
    return float(_kernels.metaframe_distance(z, X, float(gamma), int(max_support)))


def pooled_distance(z, template: ClassTemplate, t_prime: int, w_meta: int = 1,
                    gamma: float = 0.05, max_support: int = 8,
                    max_frames: int = DEFAULT_NULL_MAX_FRAMES, z_empty: bool = False) -> float:
    """Distance to the union of metaframes ``t' - h .. t' + h`` of one
    template, with ``h = (w_meta - 1) / 2`` clipped to the template."""
    cols, _ = _atoms(template.pooled_frames(t_prime, w_meta))
    keep = subsample_indices(cols.shape[0], max_frames)
    return metaframe_distance(z, cols[keep], gamma, max_support, z_empty)


def _pooled_index(model: SuperTemplate, cfg: DistanceConfig):
    # flattened atom table plus, per super-template position, the atom rows it pools
    blocks = []
    starts = []
    row = 0
    for t in model:
        starts.append([])
        for mf in t.metaframes:
            starts[-1].append(row)
            blocks.append(mf.frames)
            row += len(mf)
        starts[-1].append(row)
    F = np.ascontiguousarray(np.concatenate(blocks))
    nonzero = np.linalg.norm(F, axis=1) > 0
    half = (cfg.w_meta - 1) // 2
    idx, ptr = [], [0]
    for t, st in zip(model, starts):
        n = len(t)
        for tp in range(n):
            lo = st[max(0, tp - half)]
            hi = st[min(n, tp + half + 1)]
            rows = np.arange(lo, hi)[nonzero[lo:hi]]
            rows = rows[subsample_indices(rows.size, cfg.null_max_frames)]
            idx.append(rows)
            ptr.append(ptr[-1] + rows.size)
    return F, np.concatenate(idx).astype(np.int64), np.array(ptr, dtype=np.int64)


def cell_distances(Z: TimeSeries, model: SuperTemplate, cfg: DistanceConfig | None = None, threads: int = 1):
    """Distance of every test frame to every super-template position.

    Returns
    -------
    grid : ndarray, shape (T_Z, total template length)
    evaluations : int
        Number of frame-to-metaframe distances computed.
    """
    cfg = cfg or DistanceConfig()
    if Z.dim != model.dim:
        raise DimensionError(f"series dimension {Z.dim} != model dimension {model.dim}")
    F, idx, ptr = _pooled_index(model, cfg)
    T = len(Z)
    out = np.empty((T, model.total_length))
    args = (Z.frames, Z.empty, F, idx, ptr, float(cfg.gamma), int(cfg.max_support))
    if threads <= 1 or T < 2 * threads:
        evals = _kernels.distance_grid(*args, 0, T, out)
    else:
        bounds = np.linspace(0, T, threads + 1).astype(int)
        with ThreadPoolExecutor(threads) as pool:
            futures = [pool.submit(_kernels.distance_grid, *args, int(a), int(b), out)
                       for a, b in zip(bounds[:-1], bounds[1:])]
            evals = sum(f.result() for f in futures)
    return out, int(evals)
