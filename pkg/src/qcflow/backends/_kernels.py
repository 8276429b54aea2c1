"""State-vector kernels.

Each kernel has a numba version and a vectorized numpy version with the same
signature. Setting ``QCFLOW_DISABLE_NUMBA=1`` (or a missing numba install)
selects the numpy path. All kernels work in place on a complex128 vector.
"""
import os

import numpy as np

_DISABLED = os.environ.get("QCFLOW_DISABLE_NUMBA", "").strip().lower() in ("1", "true", "yes", "on")

try:
    if _DISABLED:
        raise ImportError
    from numba import njit
    HAVE_NUMBA = True
except ImportError:
    HAVE_NUMBA = False


# -- numpy -----------------------------------------------------------------

def _ctrl_select(dim, t, cmask):
    idx = np.arange(dim, dtype=np.int64).reshape(-1, 2, 1 << t)[:, 0, :]
    return (idx & cmask) == cmask


def apply_1q_np(state, t, m00, m01, m10, m11, cmask):
    s = state.reshape(-1, 2, 1 << t)
    a0 = s[:, 0, :].copy()
    a1 = s[:, 1, :].copy()
    n0 = m00 * a0 + m01 * a1
    n1 = m10 * a0 + m11 * a1
    if cmask:
        sel = _ctrl_select(state.shape[0], t, cmask)
        n0 = np.where(sel, n0, a0)
        n1 = np.where(sel, n1, a1)
    s[:, 0, :] = n0
    s[:, 1, :] = n1


def apply_swap_np(state, a, b, cmask):
    if a == b:
        return
    idx = np.arange(state.shape[0], dtype=np.int64)
    ba, bb = 1 << a, 1 << b
    src = idx[((idx & ba) != 0) & ((idx & bb) == 0) & ((idx & cmask) == cmask)]
    dst = src ^ ba ^ bb
    tmp = state[src].copy()
    state[src] = state[dst]
    state[dst] = tmp


def prob_one_np(state, t):
    s = state.reshape(-1, 2, 1 << t)
    return float(np.sum(np.abs(s[:, 1, :]) ** 2))


def collapse_np(state, t, outcome, norm):
    s = state.reshape(-1, 2, 1 << t)
    s[:, 1 - outcome, :] = 0
    s[:, outcome, :] /= norm


# -- numba -----------------------------------------------------------------

if HAVE_NUMBA:

    @njit(cache=True)
    def apply_1q_nb(state, t, m00, m01, m10, m11, cmask):
        step = 1 << t
        for i in range(state.shape[0]):
            if i & step or (i & cmask) != cmask:
                continue
            j = i | step
            a = state[i]
            b = state[j]
            state[i] = m00 * a + m01 * b
            state[j] = m10 * a + m11 * b

    @njit(cache=True)
    def apply_swap_nb(state, a, b, cmask):
        ba = 1 << a
        bb = 1 << b
        for i in range(state.shape[0]):
            if (i & ba) and not (i & bb) and (i & cmask) == cmask:
                j = i ^ ba ^ bb
                tmp = state[i]
                state[i] = state[j]
                state[j] = tmp

    @njit(cache=True)
    def prob_one_nb(state, t):
        step = 1 << t
        p = 0.0
        for i in range(state.shape[0]):
            if i & step:
                v = state[i]
                p += v.real * v.real + v.imag * v.imag
        return p

    @njit(cache=True)
    def collapse_nb(state, t, outcome, norm):
        step = 1 << t
        for i in range(state.shape[0]):
            if ((i & step) != 0) == (outcome == 1):
                state[i] /= norm
            else:
                state[i] = 0

    apply_1q, apply_swap, prob_one, collapse = apply_1q_nb, apply_swap_nb, prob_one_nb, collapse_nb
else:
    apply_1q, apply_swap, prob_one, collapse = apply_1q_np, apply_swap_np, prob_one_np, collapse_np

BACKEND = "numba" if HAVE_NUMBA else "numpy"
