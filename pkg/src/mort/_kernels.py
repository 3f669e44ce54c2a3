"""Hot numeric kernels with optional numba JIT.

Set MORT_PURE_NUMPY=1 to force the pure-numpy code paths (useful for
debugging and for benchmarking the JIT speedup, see benchmarks/).
"""

import os

import numpy as np

PURE_NUMPY = os.environ.get("MORT_PURE_NUMPY", "").strip() in ("1", "true", "yes")

if not PURE_NUMPY:
    try:
        from numba import njit
    except ImportError:  # pragma: no cover - numba is a declared dependency
        PURE_NUMPY = True

if PURE_NUMPY:
    def njit(*args, **kwargs):
        if args and callable(args[0]):
            return args[0]

        def wrap(fn):
            return fn

        return wrap


@njit(cache=True)
def clip_convex(subject: np.ndarray, clip: np.ndarray) -> np.ndarray:
    """Clip convex polygon `subject` against convex polygon `clip`.

    Both are (k, 2) float64 arrays in counter-clockwise order. Returns the
    intersection vertices (possibly fewer than 3 rows when degenerate).
    Sutherland-Hodgman; exact for convex-convex input.
    """
    out = subject.copy()
    nc = clip.shape[0]
    for e in range(nc):
        if out.shape[0] == 0:
            break
        ax, ay = clip[e, 0], clip[e, 1]
        bx, by = clip[(e + 1) % nc, 0], clip[(e + 1) % nc, 1]
        ex, ey = bx - ax, by - ay
        n = out.shape[0]
        # each input edge can emit at most 2 points
        nxt = np.empty((2 * n, 2), dtype=np.float64)
        m = 0
        for i in range(n):
            px, py = out[i, 0], out[i, 1]
            qx, qy = out[(i + 1) % n, 0], out[(i + 1) % n, 1]
            dp = ex * (py - ay) - ey * (px - ax)
            dq = ex * (qy - ay) - ey * (qx - ax)
            if dp >= 0.0:
                nxt[m, 0] = px
                nxt[m, 1] = py
                m += 1
            if (dp > 0.0 and dq < 0.0) or (dp < 0.0 and dq > 0.0):
                t = dp / (dp - dq)
                nxt[m, 0] = px + t * (qx - px)
                nxt[m, 1] = py + t * (qy - py)
                m += 1
        out = nxt[:m].copy()
    return out


@njit(cache=True)
def shoelace_area(verts: np.ndarray) -> float:
    """Signed area of a polygon given as a (k, 2) array."""
    n = verts.shape[0]
    s = 0.0
    for i in range(n):
        x0, y0 = verts[i, 0], verts[i, 1]
        x1, y1 = verts[(i + 1) % n, 0], verts[(i + 1) % n, 1]
        s += x0 * y1 - x1 * y0
    return 0.5 * s


@njit(cache=True)
def simplex_phase1(A: np.ndarray, b: np.ndarray, eps: float):
    """Phase-1 simplex: decide feasibility of {A x = b, x >= 0}.

    Pricing is Dantzig's rule (most negative reduced cost, lowest index on
    ties) with a deterministic switch to Bland's rule after a stretch of
    degenerate pivots, which breaks the stalling that pure Bland pricing
    exhibits on highly redundant contact systems. Returns
    (feasible, residuals) where residuals[i] is the artificial value left in
    equality row i at the phase-1 optimum.
    """
    m, n = A.shape
    # row equilibration: scale each equality to O(1) entries; this changes
    # neither feasibility nor which rows carry residuals, but it keeps every
    # pivot well conditioned
    scale = np.empty(m, dtype=np.float64)
    for i in range(m):
        s = abs(b[i])
        for j in range(n):
            a = abs(A[i, j])
            if a > s:
                s = a
        scale[i] = 1.0 / s if s > 0.0 else 1.0

    T = np.zeros((m + 1, n + m + 1), dtype=np.float64)
    for i in range(m):
        sgn = -scale[i] if b[i] < 0.0 else scale[i]
        for j in range(n):
            T[i, j] = sgn * A[i, j]
        T[i, n + m] = sgn * b[i]
        T[i, n + i] = 1.0

    basis = np.arange(n, n + m, dtype=np.int64)

    # objective row (minimize the sum of artificials) as reduced costs under
    # the current basis: recomputed from the artificial-basic rows both at
    # start and periodically, which cancels accumulated pivot drift
    def _rebuild_objective(T, basis):
        for j in range(n + m + 1):
            T[m, j] = 0.0
        for i in range(m):
            if basis[i] >= n:
                for j in range(n + m + 1):
                    T[m, j] -= T[i, j]
        for j in range(n, n + m):
            T[m, j] += 1.0
        for i in range(m):
            T[m, basis[i]] = 0.0

    _rebuild_objective(T, basis)

    piv_tol = 1e-6
    rhs_tol = 1e-10
    rebuild_every = 64
    stall = 0
    stall_limit = 4 * (m + 1)
    max_iter = 200 * (n + m + 10)
    for it in range(max_iter):
        if it % rebuild_every == rebuild_every - 1:
            _rebuild_objective(T, basis)
        enter = -1
        if stall < stall_limit:
            best_cost = -eps
            for j in range(n + m):
                c = T[m, j]
                if c < best_cost:
                    best_cost = c
                    enter = j
        else:
            # Bland: lowest-index improving column (anti-cycling)
            for j in range(n + m):
                if T[m, j] < -eps:
                    enter = j
                    break
        if enter < 0:
            break
        # ratio test: minimal ratio, ties broken by largest pivot then by
        # lowest basis index; near-zero right-hand sides count as zero
        best_ratio = np.inf
        leave = -1
        best_piv = 0.0
        for i in range(m):
            c = T[i, enter]
            if c > piv_tol:
                r = T[i, n + m] / c
                if r < rhs_tol:
                    r = 0.0
                if r < best_ratio - 1e-12:
                    best_ratio = r
                    leave = i
                    best_piv = c
                elif r <= best_ratio + 1e-12:
                    if c > best_piv + 1e-12 or (
                        abs(c - best_piv) <= 1e-12 and basis[i] < basis[leave]
                    ):
                        leave = i
                        best_piv = c
        if leave < 0:
            # no acceptable pivot in this column: freeze it out by clearing
            # its reduced cost so pricing moves on
            T[m, enter] = 0.0
            continue
        if best_ratio <= rhs_tol:
            stall += 1
        else:
            stall = 0
        piv = T[leave, enter]
        row = T[leave] / piv
        T -= np.outer(T[:, enter], row)
        T[leave] = row
        basis[leave] = enter

    residuals = np.zeros(m, dtype=np.float64)
    obj = 0.0
    for i in range(m):
        if basis[i] >= n:
            r = T[i, n + m]
            # report residuals on the original (unscaled) equation rows
            residuals[basis[i] - n] = r / scale[basis[i] - n]
            obj += abs(r)
    return obj <= eps, residuals
