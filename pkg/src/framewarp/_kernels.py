"""Compiled inner loops: sparse coding, cell distances and the warping DPs.

Everything here works on plain arrays with 0-based indices. Back-pointer
codes: 0 diagonal, 1 horizontal (t advances), 2 vertical (t' advances),
3 between-template jump, 4 path start, -1 unreachable.
"""
import numpy as np
from numba import njit

INF = np.inf
DIAG, HORIZ, VERT, JUMP, START = 0, 1, 2, 3, 4
RIDGE = 1e-10

_jit = dict(nogil=True, cache=True)


@njit(**_jit)
def omp(z, X, gamma, max_support):
    """Greedy support selection for ``z ~ X.T @ w`` (rows of X are atoms).

    Returns (support, coefficients on support, residual norms per iteration
    including the initial one). At least one atom is always selected.
    """
    n_atoms, dim = X.shape
    kmax = min(max_support, n_atoms, dim)
    support = np.empty(kmax, np.int64)
    taken = np.zeros(n_atoms, np.bool_)
    history = np.empty(kmax + 1)
    history[0] = np.sqrt(np.dot(z, z))
    r = z.copy()
    coef = np.zeros(0)
    ns = 0
    for _ in range(kmax):
        best = -1
        best_c = -1.0
        for i in range(n_atoms):
            if taken[i]:
                continue
            c = abs(np.dot(X[i], r))
            if c > best_c:
                best_c = c
                best = i
        taken[best] = True
        support[ns] = best
        ns += 1
        Xs = np.empty((ns, dim))
        for a in range(ns):
            Xs[a] = X[support[a]]
        coef = np.linalg.lstsq(Xs.T, z)[0]
        r = z - Xs.T @ coef
        history[ns] = np.sqrt(np.dot(r, r))
        if history[ns] <= gamma:
            break
    return support[:ns], coef, history[: ns + 1]


@njit(**_jit)
def _projection_norm2(z, B):
    # squared norm of the projection of z onto span(rows of B)
    m = B.shape[0]
    G = B @ B.T
    for a in range(m):
        G[a, a] += RIDGE
    b = B @ z
    w = np.linalg.solve(G, b)
    return np.dot(w, b), w


@njit(**_jit)
def constrained_distance(z, Xs):
    """min over sum(w)=1 of ||z - Xs.T w / ||Xs.T w|| ||^2, clamped to [0, 2].

    The unconstrained optimum direction is P z; it is reachable with a
    positive weight sum only when the projection coefficients sum to a
    positive value. Otherwise the infimum lies on the directions with
    zero weight sum, i.e. the span of pairwise atom differences.
    """
    m = Xs.shape[0]
    if m == 1:
        nx = np.sqrt(np.dot(Xs[0], Xs[0]))
        if nx == 0.0:
            return 2.0
        d = 2.0 - 2.0 * np.dot(z, Xs[0]) / nx
    else:
        p2, w = _projection_norm2(z, Xs)
        s = w.sum()
        if s > 1e-12 * np.abs(w).sum():
            d = 2.0 - 2.0 * np.sqrt(max(p2, 0.0))
        else:
            diffs = np.empty((m - 1, Xs.shape[1]))
            for a in range(1, m):
                diffs[a - 1] = Xs[a] - Xs[0]
            q2, _ = _projection_norm2(z, diffs)
            d = 2.0 - 2.0 * np.sqrt(max(q2, 0.0))
    return min(max(d, 0.0), 2.0)


@njit(**_jit)
def metaframe_distance(z, X, gamma, max_support):
    if X.shape[0] == 0:
        return 2.0
    support, _, _ = omp(z, X, gamma, max_support)
    Xs = np.empty((support.size, X.shape[1]))
    for a in range(support.size):
        Xs[a] = X[support[a]]
    return constrained_distance(z, Xs)


@njit(**_jit)
def distance_grid(Z, z_empty, F, col_idx, col_ptr, gamma, max_support, t_lo, t_hi, out):
    """Fill ``out[t, j]`` for t in [t_lo, t_hi) with pooled metaframe distances.

    Atoms of position j are ``F[col_idx[col_ptr[j]:col_ptr[j+1]]]``.
    Returns the number of cells evaluated.
    """
    n_pos = col_ptr.size - 1
    count = 0
    for j in range(n_pos):
        lo = col_ptr[j]
        hi = col_ptr[j + 1]
        X = np.empty((hi - lo, F.shape[1]))
        for a in range(hi - lo):
            X[a] = F[col_idx[lo + a]]
        for t in range(t_lo, t_hi):
            if z_empty[t]:
                out[t, j] = 2.0
            else:
                out[t, j] = metaframe_distance(Z[t], X, gamma, max_support)
            count += 1
    return count


@njit(**_jit)
def warp(C):
    """Plain DTW forward pass on a local-cost matrix.

    Returns accumulated weighted cost D, back-pointer codes, and the
    unweighted cost sum and length of the chosen path into every cell.
    """
    TZ, TY = C.shape
    D = np.full((TZ, TY), INF)
    S = np.zeros((TZ, TY))
    L = np.zeros((TZ, TY), np.int64)
    B = np.full((TZ, TY), -1, np.int8)
    D[0, 0] = C[0, 0]
    S[0, 0] = C[0, 0]
    L[0, 0] = 1
    B[0, 0] = START
    for t in range(TZ):
        for tp in range(TY):
            if t == 0 and tp == 0:
                continue
            c = C[t, tp]
            best = INF
            code = -1
            if t > 0 and tp > 0:
                v = D[t - 1, tp - 1] + 2.0 * c
                if v < best:
                    best = v
                    code = DIAG
            if t > 0:
                v = D[t - 1, tp] + c
                if v < best:
                    best = v
                    code = HORIZ
            if tp > 0:
                v = D[t, tp - 1] + c
                if v < best:
                    best = v
                    code = VERT
            if code < 0:
                continue
            D[t, tp] = best
            B[t, tp] = code
            pt = t - 1 if code != VERT else t
            pp = tp - 1 if code != HORIZ else tp
            S[t, tp] = S[pt, pp] + c
            L[t, tp] = L[pt, pp] + 1
    return D, B, S, L


@njit(**_jit)
def subsequence_scores(C, t_min, out):
    """Normalized warping score of every sub-sequence against one template.

    ``out[tb, te]`` receives the score of aligning frames tb..te
    (inclusive, 0-based) when te - tb >= t_min. Returns the number of
    sub-sequences scored.
    """
    TZ, TY = C.shape
    n_sub = 0
    D = np.empty(TY)
    S = np.empty(TY)
    L = np.empty(TY, np.int64)
    for tb in range(TZ - t_min):
        for t in range(tb, TZ):
            c0 = C[t, 0]
            diag_d = INF
            diag_s = 0.0
            diag_l = 0
            if t == tb:
                D[0] = c0
                S[0] = c0
                L[0] = 1
            else:
                # column t-1 value at t' = 0 feeds the diagonal into t' = 1
                diag_d = D[0]
                diag_s = S[0]
                diag_l = L[0]
                # only a horizontal step reaches t' = 0
                D[0] = diag_d + c0
                S[0] = diag_s + c0
                L[0] = diag_l + 1
            prev_d = D[0]
            for tp in range(1, TY):
                c = C[t, tp]
                old_d = D[tp]
                old_s = S[tp]
                old_l = L[tp]
                best = INF
                code = -1
                if t > tb:
                    v = diag_d + 2.0 * c
                    if v < best:
                        best = v
                        code = DIAG
                    v = old_d + c
                    if v < best:
                        best = v
                        code = HORIZ
                v = prev_d + c
                if v < best:
                    best = v
                    code = VERT
                if code == DIAG:
                    D[tp] = best
                    S[tp] = diag_s + c
                    L[tp] = diag_l + 1
                elif code == HORIZ:
                    D[tp] = best
                    S[tp] = old_s + c
                    L[tp] = old_l + 1
                elif code == VERT:
                    D[tp] = best
                    S[tp] = S[tp - 1] + c
                    L[tp] = L[tp - 1] + 1
                else:
                    D[tp] = INF
                    S[tp] = 0.0
                    L[tp] = 0
                diag_d = old_d if t > tb else INF
                diag_s = old_s
                diag_l = old_l
                prev_d = D[tp]
            if t - tb >= t_min:
                out[tb, t] = S[TY - 1] / L[TY - 1] if D[TY - 1] < INF else INF
                n_sub += 1
    return n_sub


@njit(**_jit)
def _best_exit(Dprev, off, lens, n_dim, base, t_min, t_max, constrained):
    # cheapest admissible end-frame state of column t-1; ties -> lowest template, then shortest
    best = INF
    bk = -1
    bn = -1
    for k in range(lens.size):
        end = base[k] + (lens[k] - 1) * n_dim[k]
        if constrained[k]:
            for ni in range(t_min[k] - 1, t_max[k]):
                v = Dprev[end + ni]
                if v < best:
                    best = v
                    bk = k
                    bn = ni
        else:
            v = Dprev[end]
            if v < best:
                best = v
                bk = k
                bn = 0
    return best, bk, bn


@njit(**_jit)
def one_pass_exact(C, off, lens, t_min, t_max, constrained):
    """Joint segmentation DP whose state carries the frames consumed in the
    current template visit, so duration bounds are enforced exactly.

    ``C`` is the (T_Z, sum(lens)) cell-distance grid in super-template
    order. For constrained templates the state index ``n - 1`` ranges over
    ``0..t_max - 1``; unconstrained templates use a single length state.

    Returns (codes, jump_k, jump_n, Dmin, term) where ``codes[t, s]`` is the
    back-pointer of state s, ``jump_k/jump_n[t]`` the exit state feeding
    jumps into column t, ``Dmin[t, j]`` the best cost over length states and
    ``term`` the per-template admissible terminal (cost, length index).
    """
    TZ = C.shape[0]
    L = lens.size
    n_dim = np.empty(L, np.int64)
    base = np.empty(L, np.int64)
    total = 0
    for l in range(L):
        n_dim[l] = t_max[l] if constrained[l] else 1
        base[l] = total
        total += lens[l] * n_dim[l]
    codes = np.full((TZ, total), -1, np.int8)
    jump_k = np.full(TZ, -1, np.int64)
    jump_n = np.full(TZ, -1, np.int64)
    Dmin = np.full((TZ, C.shape[1]), INF)
    Dprev = np.full(total, INF)
    Dcur = np.full(total, INF)
    for l in range(L):
        Dcur[base[l]] = C[0, off[l]]
        codes[0, base[l]] = START
    for t in range(TZ):
        if t > 0:
            Dprev, Dcur = Dcur, Dprev
            exit_cost, bk, bn = _best_exit(Dprev, off, lens, n_dim, base, t_min, t_max, constrained)
            jump_k[t] = bk
            jump_n[t] = bn
            for l in range(L):
                nd = n_dim[l]
                b = base[l]
                # first template frame: stay (horizontal) or enter by a jump
                c = C[t, off[l]]
                if constrained[l]:
                    Dcur[b] = exit_cost + c if bk >= 0 else INF
                    codes[t, b] = JUMP if bk >= 0 else -1
                    for ni in range(1, nd):
                        v = Dprev[b + ni - 1]
                        if v < INF:
                            Dcur[b + ni] = v + c
                            codes[t, b + ni] = HORIZ
                        else:
                            Dcur[b + ni] = INF
                            codes[t, b + ni] = -1
                else:
                    stay = Dprev[b] + c
                    jump = exit_cost + c if bk >= 0 else INF
                    if stay <= jump and stay < INF:
                        Dcur[b] = stay
                        codes[t, b] = HORIZ
                    elif jump < INF:
                        Dcur[b] = jump
                        codes[t, b] = JUMP
                    else:
                        Dcur[b] = INF
                        codes[t, b] = -1
                # interior frames, bottom-up so vertical predecessors are final
                for tp in range(1, lens[l]):
                    c = C[t, off[l] + tp]
                    row = b + tp * nd
                    low = row - nd
                    for ni in range(nd):
                        best = INF
                        code = -1
                        if constrained[l]:
                            if ni > 0:
                                v = Dprev[low + ni - 1] + 2.0 * c
                                if v < best:
                                    best = v
                                    code = DIAG
                                v = Dprev[row + ni - 1] + c
                                if v < best:
                                    best = v
                                    code = HORIZ
                        else:
                            v = Dprev[low] + 2.0 * c
                            if v < best:
                                best = v
                                code = DIAG
                            v = Dprev[row] + c
                            if v < best:
                                best = v
                                code = HORIZ
                        v = Dcur[low + ni] + c
                        if v < best:
                            best = v
                            code = VERT
                        Dcur[row + ni] = best
                        codes[t, row + ni] = code
        for l in range(L):
            for tp in range(lens[l]):
                row = base[l] + tp * n_dim[l]
                m = INF
                for ni in range(n_dim[l]):
                    if Dcur[row + ni] < m:
                        m = Dcur[row + ni]
                Dmin[t, off[l] + tp] = m
    term = np.full((L, 2), INF)
    for l in range(L):
        end = base[l] + (lens[l] - 1) * n_dim[l]
        if constrained[l]:
            for ni in range(t_min[l] - 1, t_max[l]):
                if Dcur[end + ni] < term[l, 0]:
                    term[l, 0] = Dcur[end + ni]
                    term[l, 1] = ni
        else:
            term[l, 0] = Dcur[end]
            term[l, 1] = 0
    return codes, jump_k, jump_n, Dmin, term, n_dim, base


@njit(**_jit)
def one_pass_greedy(C, off, lens, t_min, t_max, constrained):
    """Joint segmentation DP with one accumulated length per grid cell.

    The length follows the cheapest predecessor of each cell and only
    gates jumps out of (and termination at) end frames.

    Returns (codes, jump_k, D, Tlen, term) with ``term[l] = (cost, 0)``.
    """
    TZ, J = C.shape
    L = lens.size
    codes = np.full((TZ, J), -1, np.int8)
    jump_k = np.full(TZ, -1, np.int64)
    D = np.full((TZ, J), INF)
    Tlen = np.zeros((TZ, J), np.int64)
    for l in range(L):
        D[0, off[l]] = C[0, off[l]]
        Tlen[0, off[l]] = 1
        codes[0, off[l]] = START
    for t in range(1, TZ):
        exit_cost = INF
        bk = -1
        for k in range(L):
            e = off[k] + lens[k] - 1
            n = Tlen[t - 1, e]
            if constrained[k] and (n < t_min[k] or n > t_max[k]):
                continue
            if D[t - 1, e] < exit_cost:
                exit_cost = D[t - 1, e]
                bk = k
        jump_k[t] = bk
        for l in range(L):
            j0 = off[l]
            c = C[t, j0]
            stay = D[t - 1, j0] + c
            jump = exit_cost + c if bk >= 0 else INF
            if stay <= jump and stay < INF:
                D[t, j0] = stay
                codes[t, j0] = HORIZ
                Tlen[t, j0] = Tlen[t - 1, j0] + 1
            elif jump < INF:
                D[t, j0] = jump
                codes[t, j0] = JUMP
                Tlen[t, j0] = 1
            for tp in range(1, lens[l]):
                j = j0 + tp
                c = C[t, j]
                best = INF
                code = -1
                v = D[t - 1, j - 1] + 2.0 * c
                if v < best:
                    best = v
                    code = DIAG
                v = D[t - 1, j] + c
                if v < best:
                    best = v
                    code = HORIZ
                v = D[t, j - 1] + c
                if v < best:
                    best = v
                    code = VERT
                if code < 0:
                    continue
                D[t, j] = best
                codes[t, j] = code
                if code == DIAG:
                    Tlen[t, j] = Tlen[t - 1, j - 1] + 1
                elif code == HORIZ:
                    Tlen[t, j] = Tlen[t - 1, j] + 1
                else:
                    Tlen[t, j] = Tlen[t, j - 1]
    term = np.full((L, 2), INF)
    for l in range(L):
        e = off[l] + lens[l] - 1
        n = Tlen[TZ - 1, e]
        if constrained[l] and (n < t_min[l] or n > t_max[l]):
            continue
        term[l, 0] = D[TZ - 1, e]
        term[l, 1] = 0
    return codes, jump_k, D, Tlen, term
