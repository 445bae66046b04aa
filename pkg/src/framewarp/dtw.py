"""Baseline dynamic time warping between two frame sequences.

Allowed steps are (0, 1), (1, 0) and (1, 1) with penalty ``tau + tau'``,
so a diagonal step costs the same as a horizontal plus a vertical one.
Ties in the recurrence prefer diagonal, then horizontal, then vertical.
"""
from __future__ import annotations

import numpy as np

from . import _kernels
from .core import EMPTY_DISTANCE, AlignmentPath, DimensionError, TimeSeries

ALLOWED_STEPS = ((0, 1), (1, 0), (1, 1))


def frame_distance(a, b, a_empty=False, b_empty=False) -> float:
    """Squared Euclidean distance; 2.0 when either frame is empty.

    >>> frame_distance(np.array([1.0, 0.0]), np.array([0.0, 1.0]))
    2.0
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape:
        raise DimensionError(f"frame dimensions differ: {a.shape} vs {b.shape}")
    if a_empty or b_empty:
        return EMPTY_DISTANCE
    diff = a - b
    return float(diff @ diff)


def transition_penalty(tau: int, tau_prime: int) -> float:
    if (tau, tau_prime) in ((0, 1), (1, 0), (1, 1)):
        return float(tau + tau_prime)
    return np.inf


def pairwise_distances(Z: TimeSeries, Y: TimeSeries) -> np.ndarray:
    """Cost matrix of :func:`frame_distance` for every frame pair."""
    if Z.dim != Y.dim:
        raise DimensionError(f"series dimensions differ: {Z.dim} vs {Y.dim}")
    diff = Z.frames[:, None, :] - Y.frames[None, :, :]
    C = np.einsum("ijk,ijk->ij", diff, diff)
    C[Z.empty, :] = EMPTY_DISTANCE
    C[:, Y.empty] = EMPTY_DISTANCE
    return C


def backtrack(codes, t, tp):
    """Follow back-pointer codes from (t, tp) to the start; 0-based pairs."""
    steps = []
    while True:
        steps.append((t, tp))
        code = codes[t, tp]
        if code == _kernels.START:
            break
        if code == _kernels.DIAG:
            t, tp = t - 1, tp - 1
        elif code == _kernels.HORIZ:
            t -= 1
        elif code == _kernels.VERT:
            tp -= 1
        else:
            raise RuntimeError(f"broken back-pointer at {(t, tp)}")
    steps.reverse()
    return steps


def warp_costs(C, label: int = 0):
    """Align on a precomputed local-cost matrix.

    Returns
    -------
    path : AlignmentPath
    score : float
        Mean local cost along the optimal path.
    accumulated : float
        Penalty-weighted accumulated cost at the last cell.
    """
    C = np.ascontiguousarray(C, dtype=float)
    if C.ndim != 2 or 0 in C.shape:
        raise ValueError("cannot align empty sequences")
    D, B, S, L = _kernels.warp(C)
    T, U = C.shape
    steps = backtrack(B, T - 1, U - 1)
    t = np.array([s[0] + 1 for s in steps])
    tp = np.array([s[1] + 1 for s in steps])
    path = AlignmentPath(t, tp, np.full(len(steps), label))
    return path, float(S[-1, -1] / L[-1, -1]), float(D[-1, -1])


def dtw_align(Z: TimeSeries, Y: TimeSeries, dist=None):
    """Optimal monotone alignment of ``Z`` against ``Y``.

    Parameters
    ----------
    Z, Y : TimeSeries
    dist : callable, optional
        ``dist(a, b) -> float`` on frame vectors. Defaults to
        :func:`frame_distance` (vectorized).

    Returns
    -------
    path : AlignmentPath
        Starts at (1, 1) and ends at (T_Z, T_Y).
    score : float
        Path-length-normalized sum of frame distances.
    """
    if dist is None:
        C = pairwise_distances(Z, Y)
    else:
        C = np.array([[dist(z, y) for y in Y.frames] for z in Z.frames], dtype=float)
    path, score, _ = warp_costs(C)
    return path, score
