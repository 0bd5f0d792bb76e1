"""Fixed-point and demand kernels, in numba-loop and numpy forms.

Both forms work on int64 nanoseconds and must agree exactly; the public
entry points pick one according to ``JIT_ENABLED``.
"""
import numpy as np

from .._jit import JIT_ENABLED, kernel


@kernel
def wcrt_fp_loop(C, T, D):
    """Least fixed point of C_k + max lower C + sum_{i<k} ceil(t/T_i) C_i.

    Tasks are in priority order (index 0 highest). -1 marks tasks whose
    iteration passes the deadline.
    """
    n = C.shape[0]
    R = np.full(n, -1, np.int64)
    B = np.zeros(n, np.int64)
    m = 0
    for k in range(n - 1, -1, -1):
        B[k] = m
        if C[k] > m:
            m = C[k]
    for k in range(n):
        t = 0
        while True:
            rhs = C[k] + B[k]
            for i in range(k):
                rhs += ((t + T[i] - 1) // T[i]) * C[i]
            if rhs == t:
                R[k] = t
                break
            if rhs > D[k]:
                break
            t = rhs
    return R


def wcrt_fp_numpy(C, T, D):
    C = np.asarray(C, np.int64)
    T = np.asarray(T, np.int64)
    n = len(C)
    R = np.full(n, -1, np.int64)
    lower_max = np.zeros(n, np.int64)
    if n > 1:
        lower_max[:-1] = np.maximum.accumulate(C[::-1])[::-1][1:]
    for k in range(n):
        base = int(C[k] + lower_max[k])
        hp_c, hp_t = C[:k], T[:k]
        t = 0
        while True:
            rhs = base + int(np.dot(-(-t // hp_t), hp_c)) if k else base
            if rhs == t:
                R[k] = t
                break
            if rhs > D[k]:
                break
            t = rhs
    return R


@kernel
def _np_edf_lhs(C, T, D, t):
    block = 0
    demand = 0
    for i in range(C.shape[0]):
        if D[i] > t and C[i] > block:
            block = C[i]
        if t >= D[i]:
            demand += ((t - D[i]) // T[i] + 1) * C[i]
    return block + demand


@kernel
def edf_test_loop(C, T, D, L):
    for i in range(C.shape[0]):
        d = D[i]
        while d <= L:
            if _np_edf_lhs(C, T, D, d) > d:
                return False
            d += T[i]
    return True


def edf_test_numpy(C, T, D, L, chunk=4096):
    C = np.asarray(C, np.int64)
    T = np.asarray(T, np.int64)
    D = np.asarray(D, np.int64)
    pts = [np.arange(d, L + 1, p, dtype=np.int64) for d, p in zip(D, T) if d <= L]
    if not pts:
        return True
    pts = np.unique(np.concatenate(pts))
    order = np.argsort(D)
    d_sorted = D[order]
    # max C over tasks with D > t: suffix max over deadline-sorted tasks
    suffix = np.append(np.maximum.accumulate(C[order][::-1])[::-1], 0)
    for lo in range(0, len(pts), chunk):
        t = pts[lo:lo + chunk]
        jobs = np.where(t[:, None] >= D, (t[:, None] - D) // T + 1, 0)
        demand = jobs @ C
        block = suffix[np.searchsorted(d_sorted, t, side="right")]
        if np.any(block + demand > t):
            return False
    return True


def wcrt_fp(C, T, D):
    if JIT_ENABLED:
        return wcrt_fp_loop(np.asarray(C, np.int64), np.asarray(T, np.int64), np.asarray(D, np.int64))
    return wcrt_fp_numpy(C, T, D)


def edf_test(C, T, D, L):
    if JIT_ENABLED:
        return bool(edf_test_loop(np.asarray(C, np.int64), np.asarray(T, np.int64),
                                  np.asarray(D, np.int64), np.int64(L)))
    return edf_test_numpy(C, T, D, L)
