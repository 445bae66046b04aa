"""Brute-force reference implementations used as test oracles.

These enumerate paths, tilings and weight grids explicitly and share no
code with the package's dynamic programs.
"""
import itertools
import math

import numpy as np

STEP_WEIGHT = {(0, 1): 1.0, (1, 0): 1.0, (1, 1): 2.0}


def monotone_paths(n_rows, n_cols, start=(0, 0), no_vertical_row=None):
    """Yield every path of (t, t') cells from ``start`` to the last cell
    using steps (0,1), (1,0), (1,1). Steps (0,1) taken while t equals
    ``no_vertical_row`` are excluded."""
    end = (n_rows - 1, n_cols - 1)

    def rec(path):
        t, tp = path[-1]
        if (t, tp) == end:
            yield list(path)
            return
        for dt, dtp in ((0, 1), (1, 0), (1, 1)):
            if dt == 0 and t == no_vertical_row:
                continue
            nt, ntp = t + dt, tp + dtp
            if nt < n_rows and ntp < n_cols:
                path.append((nt, ntp))
                yield from rec(path)
                path.pop()

    yield from rec([start])


def path_cost(C, path):
    total = C[path[0]]
    for (t0, p0), (t1, p1) in zip(path, path[1:]):
        total += STEP_WEIGHT[(t1 - t0, p1 - p0)] * C[t1, p1]
    return total


def brute_dtw(C):
    """Minimum penalty-weighted cost over all monotone paths."""
    C = np.asarray(C, dtype=float)
    return min(path_cost(C, p) for p in monotone_paths(*C.shape))


def brute_dtw_paths(C):
    C = np.asarray(C, dtype=float)
    return [(path_cost(C, p), p) for p in monotone_paths(*C.shape)]


def compositions(n):
    """All ways of writing n as an ordered sum of positive integers."""
    for cuts in itertools.product((False, True), repeat=n - 1):
        parts, run = [], 1
        for c in cuts:
            if c:
                parts.append(run)
                run = 1
            else:
                run += 1
        parts.append(run)
        yield parts


def brute_one_pass(C, lens, bounds, enforce=True):
    """Cheapest concatenation of template visits covering all test frames.

    ``C`` is the (T, sum(lens)) cost grid, ``bounds[l] = (t_min, t_max)``
    with ``t_max = math.inf`` for unbounded templates. Each visit is a
    monotone path from its first to its last template frame; entering a
    template costs the entry cell once, like the path start. No step with
    (0, 1) is allowed at the very first test frame.
    """
    C = np.asarray(C, dtype=float)
    T = C.shape[0]
    offs = np.concatenate([[0], np.cumsum(lens)[:-1]])
    cache = {}

    def visit_cost(a, b, l):
        key = (a, b, l)
        if key not in cache:
            block = C[a:b + 1, offs[l]:offs[l] + lens[l]]
            cache[key] = min(
                (path_cost(block, p)
                 for p in monotone_paths(b - a + 1, lens[l], no_vertical_row=0 if a == 0 else None)),
                default=math.inf,
            )
        return cache[key]

    best = math.inf
    for parts in compositions(T):
        starts = np.concatenate([[0], np.cumsum(parts)[:-1]])
        for labels in itertools.product(range(len(lens)), repeat=len(parts)):
            total = 0.0
            for a, n, l in zip(starts, parts, labels):
                lo, hi = bounds[l]
                if enforce and not lo <= n <= hi:
                    total = math.inf
                    break
                total += visit_cost(a, a + n - 1, l)
            best = min(best, total)
    return best


def brute_tiling(cost, T, t_min):
    """Cheapest tiling of 0..T-1 into segments of at least t_min + 1 frames.

    ``cost[b, e]`` is the cost of the segment b..e (inclusive).
    """
    best = math.inf
    for parts in compositions(T):
        if min(parts) < t_min + 1:
            continue
        starts = np.concatenate([[0], np.cumsum(parts)[:-1]])
        best = min(best, sum(cost[a, a + n - 1] for a, n in zip(starts, parts)))
    return best


def grid_search_distance(z, X, box=5.0, far=1e4, fine=1e-3, coarse=0.05):
    """Minimum of ||z - Xw/||Xw|| ||^2 over the plane sum(w) = 1.

    ``X`` holds atoms as rows; w[:-1] are free and w[-1] = 1 - sum(w[:-1]).
    The plane is sampled by a uniform grid on [-box, box] plus a
    log-radial grid out to ``far`` (the objective only depends on the
    direction of Xw, so optima may sit at large |w|), and the best coarse
    points are refined on a local grid of step ``fine``.
    """
    z = np.asarray(z, float)
    X = np.atleast_2d(np.asarray(X, float))
    m = X.shape[0]

    def evaluate(W):
        W = np.column_stack([W, 1.0 - W.sum(axis=1)])
        V = W @ X
        n = np.linalg.norm(V, axis=1)
        ok = n > 1e-12
        U = V / np.where(ok, n, 1.0)[:, None]
        return np.where(ok, np.sum((z - U) ** 2, axis=1), np.inf)

    if m == 1:
        return float(evaluate(np.zeros((1, 0)))[0])
    radii = np.logspace(np.log10(box), np.log10(far), 400)
    if m == 2:
        W = np.concatenate([np.arange(-box, box + fine / 2, fine), radii, -radii])[:, None]
        return float(evaluate(W).min())
    axis = np.arange(-box, box + coarse / 2, coarse)
    W = np.array(list(itertools.product(axis, repeat=m - 1)))
    if m == 3:
        ang = np.linspace(0, 2 * np.pi, 1440, endpoint=False)
        R, A = np.meshgrid(radii, ang)
        W = np.vstack([W, np.column_stack([(R * np.cos(A)).ravel(), (R * np.sin(A)).ravel()])])
    d = evaluate(W)
    best = d.min()
    local = np.arange(-coarse, coarse + fine / 2, fine)
    offsets = np.array(list(itertools.product(local, repeat=m - 1)))
    for w0 in W[np.argsort(d)[:8]]:
        best = min(best, evaluate(offsets + w0).min())
    return float(best)
