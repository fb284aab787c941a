"""Minimal dense linear programming: two-phase simplex with Bland's rule.

Sized for the small LPs that arise as resampled subproblems (a few hundred
rows at most), so a dense tableau is the right representation and Bland's
anti-cycling rule costs nothing noticeable.  ``_simplex_core`` is the
backend-jitted inner loop on the standard-form tableau; ``simplex_solve``
is the public front-end on a ``LinearProgram``; ``enumerate_vertices`` is
an exact brute-force oracle for small instances, used by the test suite.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._backend import njit

__all__ = [
    "LinearProgram",
    "LpSolution",
    "SimplexStalledError",
    "simplex_solve",
    "enumerate_vertices",
]

FEAS_TOL = 1e-7
PIVOT_TOL = 1e-9


class SimplexStalledError(RuntimeError):
    """Iteration cap exceeded without reaching a conclusive status."""


@dataclass(frozen=True)
class LinearProgram:
    """min c@x subject to a_eq@x = b_eq, a_ub@x <= b_ub, lo <= x <= hi.

    ``bounds`` is a sequence of (lo, hi) pairs per variable; use None or
    +-inf for an absent side.  Omitted entirely, every variable gets the
    conventional (0, +inf).
    """

    c: np.ndarray
    a_ub: np.ndarray | None = None
    b_ub: np.ndarray | None = None
    a_eq: np.ndarray | None = None
    b_eq: np.ndarray | None = None
    bounds: tuple | None = None

    def __post_init__(self):
        c = np.atleast_1d(np.asarray(self.c, dtype=np.float64))
        object.__setattr__(self, "c", c)
        nvar = c.size
        for name in ("a_ub", "a_eq"):
            a = getattr(self, name)
            if a is not None:
                a = np.asarray(a, dtype=np.float64).reshape(-1, nvar)
                object.__setattr__(self, name, a)
        for aname, bname in (("a_ub", "b_ub"), ("a_eq", "b_eq")):
            a, b = getattr(self, aname), getattr(self, bname)
            if (a is None) != (b is None):
                raise ValueError(f"{aname} and {bname} must be given together")
            if b is not None:
                b = np.atleast_1d(np.asarray(b, dtype=np.float64))
                if b.size != a.shape[0]:
                    raise ValueError(f"{bname} length does not match {aname} rows")
                object.__setattr__(self, bname, b)
        bounds = self.bounds
        if bounds is None:
            bounds = ((0.0, np.inf),) * nvar
        norm = []
        for lo, hi in bounds:
            lo = -np.inf if lo is None else float(lo)
            hi = np.inf if hi is None else float(hi)
            if lo > hi:
                raise ValueError(f"empty variable bound [{lo}, {hi}]")
            norm.append((lo, hi))
        if len(norm) != nvar:
            raise ValueError("bounds length does not match number of variables")
        object.__setattr__(self, "bounds", tuple(norm))

    @property
    def nvar(self) -> int:
        return self.c.size


@dataclass(frozen=True)
class LpSolution:
    status: str  # "optimal" | "infeasible" | "unbounded"
    value: float
    point: np.ndarray | None
    duals: np.ndarray | None = None  # one per standard-form row, optimal only


@njit(cache=True, nogil=True)
def _pivot(T, basis, leave, enter):
    piv = T[leave, enter]
    T[leave, :] /= piv
    for i in range(T.shape[0]):
        if i != leave:
            f = T[i, enter]
            if f != 0.0:
                T[i, :] -= f * T[leave, :]
    basis[leave] = enter


@njit(cache=True, nogil=True)
def _pivot_loop(T, basis, n_price, maxit, iters):
    """Run Bland-rule pivots until optimal (0), unbounded (2), or cap (3)."""
    m = T.shape[0] - 1
    while True:
        enter = -1
        for j in range(n_price):
            if T[m, j] < -PIVOT_TOL:
                enter = j
                break
        if enter < 0:
            return 0, iters
        best = np.inf
        for i in range(m):
            a = T[i, enter]
            if a > PIVOT_TOL:
                r = T[i, -1] / a
                if r < best:
                    best = r
        if best == np.inf:
            return 2, iters
        leave = -1
        for i in range(m):
            a = T[i, enter]
            if a > PIVOT_TOL and T[i, -1] / a <= best + 1e-12:
                if leave < 0 or basis[i] < basis[leave]:
                    leave = i
        _pivot(T, basis, leave, enter)
        iters += 1
        if iters >= maxit:
            return 3, iters


@njit(cache=True, nogil=True)
def _simplex_core(A, b, c, maxit):
    """Two-phase simplex on min c@x s.t. A@x = b (b >= 0), x >= 0.

    Returns (status, value, x, duals, iters) with status 0 optimal,
    1 infeasible, 2 unbounded, 3 iteration cap reached.
    """
    m, n = A.shape
    T = np.zeros((m + 1, n + m + 1))
    T[:m, :n] = A
    basis = np.empty(m, dtype=np.int64)
    for i in range(m):
        T[i, n + i] = 1.0
        T[i, n + m] = b[i]
        basis[i] = n + i
    # phase 1: minimize the artificial sum; reduced costs are column sums
    # negated (artificials are basic, so only structural columns price)
    for j in range(n + m + 1):
        s = 0.0
        for i in range(m):
            s += T[i, j]
        T[m, j] = -s
    for i in range(m):
        T[m, n + i] = 0.0

    status, iters = _pivot_loop(T, basis, n, maxit, 0)
    x = np.zeros(n)
    y = np.zeros(m)
    if status == 3:
        return 3, 0.0, x, y, iters
    if -T[m, n + m] > FEAS_TOL:
        return 1, 0.0, x, y, iters
    # drive leftover artificials out of the basis; rows that are zero on
    # every structural column are redundant and stay inert
    for i in range(m):
        if basis[i] >= n:
            for j in range(n):
                if abs(T[i, j]) > PIVOT_TOL:
                    _pivot(T, basis, i, j)
                    break
    # phase 2: rebuild the cost row for the real objective
    for j in range(n + m + 1):
        T[m, j] = 0.0
    for j in range(n):
        T[m, j] = c[j]
    for i in range(m):
        if basis[i] < n:
            cb = c[basis[i]]
            if cb != 0.0:
                T[m, :] -= cb * T[i, :]
    status, iters = _pivot_loop(T, basis, n, maxit, iters)
    if status != 0:
        return status, 0.0, x, y, iters
    for i in range(m):
        if basis[i] < n:
            x[basis[i]] = T[i, n + m]
    for i in range(m):
        y[i] = -T[m, n + i]
    return 0, -T[m, n + m], x, y, iters


def _to_standard_form(lp: LinearProgram):
    """Rewrite onto nonnegative variables and equality rows with b >= 0.

    Returns (A, b, c, const, recover) where ``recover`` maps a standard
    solution vector back to the original variables.
    """
    nvar = lp.nvar
    cols = []  # (orig_index, sign, shift) per standard column
    extra_ub = []  # rows for finite upper bounds of shifted variables
    for j, (lo, hi) in enumerate(lp.bounds):
        if np.isfinite(lo):
            cols.append((j, 1.0, lo))
            if np.isfinite(hi):
                extra_ub.append((len(cols) - 1, hi - lo))
        elif np.isfinite(hi):
            cols.append((j, -1.0, hi))
        else:
            cols.append((j, 1.0, 0.0))
            cols.append((j, -1.0, 0.0))

    ncols = len(cols)

    def expand(a_rows, b_rows):
        """Map original-variable rows onto standard columns, adjusting b."""
        if a_rows is None:
            return np.zeros((0, ncols)), np.zeros(0)
        out = np.zeros((a_rows.shape[0], ncols))
        bb = b_rows.astype(np.float64).copy()
        for s, (j, sign, shift) in enumerate(cols):
            out[:, s] = sign * a_rows[:, j]
            bb -= a_rows[:, j] * shift
        return out, bb

    a_ub, b_ub = expand(lp.a_ub, lp.b_ub)
    a_eq, b_eq = expand(lp.a_eq, lp.b_eq)
    if extra_ub:
        rows = np.zeros((len(extra_ub), ncols))
        rhs = np.zeros(len(extra_ub))
        for r, (s, ub) in enumerate(extra_ub):
            rows[r, s] = 1.0
            rhs[r] = ub
        a_ub = np.vstack([a_ub, rows])
        b_ub = np.concatenate([b_ub, rhs])

    n_ub = a_ub.shape[0]
    A = np.zeros((n_ub + a_eq.shape[0], ncols + n_ub))
    A[:n_ub, :ncols] = a_ub
    A[:n_ub, ncols:] = np.eye(n_ub)
    A[n_ub:, :ncols] = a_eq
    b = np.concatenate([b_ub, b_eq])
    neg = b < 0
    A[neg] *= -1.0
    b[neg] *= -1.0

    c_std = np.zeros(ncols + n_ub)
    const = 0.0
    for s, (j, sign, shift) in enumerate(cols):
        c_std[s] = sign * lp.c[j]
        const += lp.c[j] * shift

    # shifts: x_j = lo + y (sign +1), x_j = hi - y (sign -1), or a
    # free-variable split x_j = y+ - y- (two columns, shift 0)
    def recover(x_std):
        x = np.zeros(nvar)
        seen = set()
        for s, (j, sign, shift) in enumerate(cols):
            if j in seen:
                x[j] += sign * x_std[s]
            else:
                x[j] = shift + sign * x_std[s]
            seen.add(j)
        return x

    return A, b, c_std, const, recover


def simplex_solve(lp: LinearProgram, maxiter: int | None = None) -> LpSolution:
    """Solve a LinearProgram; raises SimplexStalledError at the pivot cap.

    The default cap is 50 * (rows + columns) of the standard-form tableau,
    which Bland's rule never approaches on well-posed inputs.
    """
    A, b, c, const, recover = _to_standard_form(lp)
    if maxiter is None:
        maxiter = 50 * (A.shape[0] + A.shape[1])
    status, value, x_std, duals, _ = _simplex_core(A, b, c, np.int64(maxiter))
    if status == 3:
        raise SimplexStalledError("simplex stalled: iteration cap exceeded")
    if status == 1:
        return LpSolution("infeasible", np.nan, None)
    if status == 2:
        return LpSolution("unbounded", -np.inf, None)
    return LpSolution("optimal", value + const, recover(x_std), duals)


def _collect_rows(lp: LinearProgram):
    """All constraints as (G, h) inequalities G@x <= h plus equalities."""
    nvar = lp.nvar
    G, h = [], []
    if lp.a_ub is not None:
        for row, rhs in zip(lp.a_ub, lp.b_ub):
            G.append(row)
            h.append(rhs)
    for j, (lo, hi) in enumerate(lp.bounds):
        if np.isfinite(lo):
            e = np.zeros(nvar)
            e[j] = -1.0
            G.append(e)
            h.append(-lo)
        if np.isfinite(hi):
            e = np.zeros(nvar)
            e[j] = 1.0
            G.append(e)
            h.append(hi)
    E, f = [], []
    if lp.a_eq is not None:
        for row, rhs in zip(lp.a_eq, lp.b_eq):
            E.append(row)
            f.append(rhs)
    return np.array(G), np.array(h), np.array(E), np.array(f)


def enumerate_vertices(lp: LinearProgram, tol: float = FEAS_TOL) -> LpSolution:
    """Exact optimum of a bounded LP by enumerating candidate vertices.

    Tries every square subsystem of active constraints; test oracle only,
    so the variable count is capped at 8.
    """
    from itertools import combinations

    nvar = lp.nvar
    if nvar > 8:
        raise ValueError("oracle scale exceeded")
    G, h, E, f = _collect_rows(lp)
    rows = [r for r in E] + [r for r in G]
    rhs = list(f) + list(h)
    best_val = np.inf
    best_x = None
    for subset in combinations(range(len(rows)), nvar):
        M = np.array([rows[i] for i in subset])
        v = np.array([rhs[i] for i in subset])
        if abs(np.linalg.det(M)) < 1e-12:
            continue
        x = np.linalg.solve(M, v)
        if G.size and np.any(G @ x - h > tol):
            continue
        if E.size and np.any(np.abs(E @ x - f) > tol):
            continue
        val = float(lp.c @ x)
        if val < best_val - 1e-15:
            best_val = val
            best_x = x
    if best_x is None:
        return LpSolution("infeasible", np.nan, None)
    return LpSolution("optimal", best_val, best_x)
