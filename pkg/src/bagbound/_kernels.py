"""Hot kernels: batched SAA solves of resamples and count accumulation.

Each kernel maps a data array plus an (m, k) index matrix (one resample
per row) to the m resampled SAA optimal values.  The numba path loops per
resample; the numpy path vectorizes across the batch.  Both orders of
summation are fixed, so each backend is bit-reproducible on its own and
the two agree to float64 roundoff (covered by differential tests).

``*_np`` variants are always importable for benchmarking and testing; the
unprefixed names dispatch to the active backend.
"""

from __future__ import annotations

import numpy as np

from ._backend import NUMBA_ENABLED, njit
from .lp import _simplex_core

__all__ = [
    "cvar_values",
    "toylp_values",
    "ip_values",
    "colmin_values",
    "portfolio_values",
    "accumulate_counts",
]


# ----------------------------------------------------------------------
# vectorized numpy implementations
# ----------------------------------------------------------------------

def cvar_values_np(data, idx, alpha):
    """Resampled CVaR SAA values; the optimum sits at a sample breakpoint."""
    v = np.sort(data[idx], axis=1)
    k = v.shape[1]
    csum = np.cumsum(v, axis=1)
    tail = csum[:, -1:] - csum  # sum of entries strictly above each breakpoint
    cnt = k - 1 - np.arange(k)
    f = v + (tail - cnt * v) / (alpha * k)
    return f.min(axis=1)


def toylp_values_np(data, idx):
    xb = data[idx].mean(axis=1)
    return np.minimum(-0.05 + xb, 0.05 + 5.0 * xb)


def ip_values_np(data, idx, cands):
    xb = data[idx].mean(axis=1)
    return (xb @ cands.T).min(axis=1)


def colmin_values_np(data, idx):
    return data[idx].mean(axis=1).min(axis=1)


def accumulate_counts_np(idx, z, sum_n, sum_nz):
    flat = idx.ravel()
    k = idx.shape[1]
    sum_n += np.bincount(flat, minlength=sum_n.size)
    sum_nz += np.bincount(flat, weights=np.repeat(z, k), minlength=sum_nz.size)


def _portfolio_values_impl(data, idx, mu, alpha, b, maxit):
    """Resampled portfolio-CVaR SAA values via the simplex core.

    Variables [c+, c-, x(d), u(k), s(k), t]; rows are the k hinge
    equalities, the return target, and the budget.  A failed solve writes
    NaN for the caller to report.
    """
    m, k = idx.shape
    d = mu.shape[0]
    n_cols = 2 + d + 2 * k + 1
    n_rows = k + 2
    out = np.empty(m)
    bvec = np.zeros(n_rows)
    cvec = np.zeros(n_cols)
    cvec[0] = 1.0
    cvec[1] = -1.0
    for j in range(k):
        cvec[2 + d + j] = 1.0 / (alpha * k)
    for r in range(m):
        A = np.zeros((n_rows, n_cols))
        for i in range(k):
            A[i, 0] = -1.0
            A[i, 1] = 1.0
            for j in range(d):
                A[i, 2 + j] = -data[idx[r, i], j]
            A[i, 2 + d + i] = -1.0  # u_i
            A[i, 2 + d + k + i] = 1.0  # slack
            bvec[i] = 0.0
        for j in range(d):
            A[k, 2 + j] = mu[j]
            A[k + 1, 2 + j] = 1.0
        A[k, n_cols - 1] = -1.0  # surplus on the return row
        bvec[k] = b
        bvec[k + 1] = 1.0
        status, val, x, y, it = _simplex_core(A, bvec, cvec, maxit)
        out[r] = val if status == 0 else np.nan
    return out


# ----------------------------------------------------------------------
# numba loop implementations
# ----------------------------------------------------------------------

def _cvar_values_loop(data, idx, alpha):
    m, k = idx.shape
    out = np.empty(m)
    buf = np.empty(k)
    for r in range(m):
        for j in range(k):
            buf[j] = data[idx[r, j]]
        buf.sort()
        tail = 0.0
        best = np.inf
        for j in range(k - 1, -1, -1):
            f = buf[j] + (tail - (k - 1 - j) * buf[j]) / (alpha * k)
            if f < best:
                best = f
            tail += buf[j]
        out[r] = best
    return out


def _toylp_values_loop(data, idx):
    m, k = idx.shape
    out = np.empty(m)
    for r in range(m):
        s = 0.0
        for j in range(k):
            s += data[idx[r, j]]
        xb = s / k
        lo = -0.05 + xb
        hi = 0.05 + 5.0 * xb
        out[r] = lo if lo < hi else hi
    return out


def _ip_values_loop(data, idx, cands):
    m, k = idx.shape
    d = data.shape[1]
    nc = cands.shape[0]
    out = np.empty(m)
    xb = np.empty(d)
    for r in range(m):
        for c in range(d):
            s = 0.0
            for j in range(k):
                s += data[idx[r, j], c]
            xb[c] = s / k
        best = np.inf
        for t in range(nc):
            v = 0.0
            for c in range(d):
                v += cands[t, c] * xb[c]
            if v < best:
                best = v
        out[r] = best
    return out


def _colmin_values_loop(data, idx):
    m, k = idx.shape
    d = data.shape[1]
    out = np.empty(m)
    for r in range(m):
        best = np.inf
        for c in range(d):
            s = 0.0
            for j in range(k):
                s += data[idx[r, j], c]
            v = s / k
            if v < best:
                best = v
        out[r] = best
    return out


def _accumulate_counts_loop(idx, z, sum_n, sum_nz):
    m, k = idx.shape
    for r in range(m):
        zr = z[r]
        for j in range(k):
            i = idx[r, j]
            sum_n[i] += 1.0
            sum_nz[i] += zr
    return None


portfolio_values_np = _portfolio_values_impl

if NUMBA_ENABLED:
    _jit = njit(cache=True, nogil=True)
    cvar_values = _jit(_cvar_values_loop)
    toylp_values = _jit(_toylp_values_loop)
    ip_values = _jit(_ip_values_loop)
    colmin_values = _jit(_colmin_values_loop)
    accumulate_counts = _jit(_accumulate_counts_loop)
    portfolio_values = _jit(_portfolio_values_impl)
else:
    cvar_values = cvar_values_np
    toylp_values = toylp_values_np
    ip_values = ip_values_np
    colmin_values = colmin_values_np
    accumulate_counts = accumulate_counts_np
    portfolio_values = _portfolio_values_impl
