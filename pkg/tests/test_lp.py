import numpy as np
import pytest

from bagbound.core import RngStream
from bagbound.lp import (
    LinearProgram,
    SimplexStalledError,
    enumerate_vertices,
    simplex_solve,
)


def test_single_variable_lower_bound():
    s = simplex_solve(LinearProgram(c=[1.0], bounds=[(1.0, None)]))
    assert s.status == "optimal"
    assert s.value == pytest.approx(1.0, abs=1e-9)
    assert s.point[0] == pytest.approx(1.0, abs=1e-9)


def test_box_corner():
    lp = LinearProgram(c=[-1.0, -1.0], a_ub=[[1.0, 1.0]], b_ub=[1.0])
    s = simplex_solve(lp)
    assert s.status == "optimal"
    assert s.value == pytest.approx(-1.0, abs=1e-9)


def test_infeasible_and_unbounded():
    infeas = LinearProgram(c=[1.0], a_ub=[[1.0]], b_ub=[0.0], bounds=[(1.0, None)])
    assert simplex_solve(infeas).status == "infeasible"
    assert enumerate_vertices(infeas).status == "infeasible"
    unb = LinearProgram(c=[-1.0])
    assert simplex_solve(unb).status == "unbounded"


def test_iteration_cap_raises():
    lp = LinearProgram(c=[-1.0, -1.0], a_ub=[[1.0, 1.0]], b_ub=[1.0])
    with pytest.raises(SimplexStalledError):
        simplex_solve(lp, maxiter=1)


def _random_lp(g):
    nvar = int(g.integers(1, 5))
    nrow = int(g.integers(0, 7))
    c = g.standard_normal(nvar)
    a_ub = g.standard_normal((nrow, nvar)) if nrow else None
    b_ub = g.standard_normal(nrow) + 1.0 if nrow else None
    lo = g.uniform(-3.0, 0.0, nvar)
    hi = lo + g.uniform(0.5, 4.0, nvar)
    return LinearProgram(c=c, a_ub=a_ub, b_ub=b_ub, bounds=list(zip(lo, hi)))


def test_random_lps_match_vertex_enumeration():
    g = RngStream(2024, (0,)).generator()
    checked = 0
    for _ in range(200):
        lp = _random_lp(g)
        s = simplex_solve(lp)
        o = enumerate_vertices(lp)
        assert s.status == o.status
        if s.status == "optimal":
            assert s.value == pytest.approx(o.value, abs=1e-7)
            checked += 1
    assert checked > 100  # bounded boxes: most random instances are feasible


def test_optimal_points_are_feasible():
    g = RngStream(2025, (0,)).generator()
    for _ in range(100):
        lp = _random_lp(g)
        s = simplex_solve(lp)
        if s.status != "optimal":
            continue
        x = s.point
        if lp.a_ub is not None:
            assert np.all(lp.a_ub @ x - lp.b_ub <= 1e-7)
        for xj, (lo, hi) in zip(x, lp.bounds):
            assert lo - 1e-7 <= xj <= hi + 1e-7
        assert s.value == pytest.approx(float(lp.c @ x), rel=1e-9, abs=1e-9)


def test_strong_duality_on_random_instances():
    # dual objective from the final basis must meet the primal value
    g = RngStream(2026, (0,)).generator()
    hits = 0
    for _ in range(100):
        nvar = int(g.integers(1, 5))
        nrow = int(g.integers(1, 7))
        lp = LinearProgram(
            c=g.standard_normal(nvar),
            a_ub=g.standard_normal((nrow, nvar)),
            b_ub=np.abs(g.standard_normal(nrow)) + 0.5,
            bounds=[(0.0, 5.0)] * nvar,
        )
        s = simplex_solve(lp)
        if s.status != "optimal":
            continue
        # standard form appends upper-bound rows after the a_ub block and
        # shifts nothing (lo = 0), so the dual objective is y @ [b_ub, hi]
        rhs = np.concatenate([lp.b_ub, [5.0] * nvar])
        assert s.value == pytest.approx(float(s.duals @ rhs), abs=1e-7)
        hits += 1
    assert hits > 50


def test_objective_scaling_keeps_solution():
    g = RngStream(2027, (0,)).generator()
    for _ in range(50):
        lp = _random_lp(g)
        s1 = simplex_solve(lp)
        lam = float(g.uniform(0.5, 4.0))
        lp2 = LinearProgram(c=lam * lp.c, a_ub=lp.a_ub, b_ub=lp.b_ub, bounds=lp.bounds)
        s2 = simplex_solve(lp2)
        assert s1.status == s2.status
        if s1.status == "optimal":
            assert s2.value == pytest.approx(lam * s1.value, rel=1e-9, abs=1e-9)
            assert np.allclose(s1.point, s2.point, atol=1e-8)


def test_degenerate_redundant_equalities():
    g = RngStream(2028, (0,)).generator()
    for _ in range(50):
        nvar = int(g.integers(2, 5))
        a = g.standard_normal((2, nvar))
        x0 = g.uniform(0.2, 1.0, nvar)  # keep the system feasible
        b = a @ x0
        a_eq = np.vstack([a, 2.0 * a[0], a[0] + a[1]])
        b_eq = np.concatenate([b, [2.0 * b[0], b[0] + b[1]]])
        lp = LinearProgram(
            c=g.standard_normal(nvar), a_eq=a_eq, b_eq=b_eq,
            bounds=[(0.0, 3.0)] * nvar,
        )
        s = simplex_solve(lp)
        o = enumerate_vertices(lp)
        assert s.status == o.status == "optimal"
        assert s.value == pytest.approx(o.value, abs=1e-7)


def test_vertex_oracle_scale_guard():
    with pytest.raises(ValueError, match="oracle scale exceeded"):
        enumerate_vertices(LinearProgram(c=np.ones(9), bounds=[(0, 1)] * 9))
