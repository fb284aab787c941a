"""The stochastic-program interface and the four benchmark problems.

Each program couples a scenario cost with an exact solver for the
empirical (sample-average) problem on any finite sample, plus a sampler
for its scenario distribution.  The solvers are exact by construction:
the scalar CVaR objective is piecewise linear with breakpoints at the
sample points, the portfolio problem is the standard hinge-variable LP,
the item-selection program is enumerated over its 703 feasible supports,
and the interval LP only needs its two endpoints.
"""

from __future__ import annotations

import math
from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import _kernels, constants
from .core import Dataset, RngStream, cholesky
from .lp import LinearProgram, simplex_solve

__all__ = [
    "StochasticProgram",
    "SaaSolution",
    "GapProgram",
    "cvar1d",
    "portfolio_cvar",
    "item_selection_ip",
    "toy_lp",
    "gap_program",
    "get_program",
    "PROGRAMS",
]


@dataclass(frozen=True)
class SaaSolution:
    value: float
    solution: object  # scalar, vector, or binary vector depending on problem


def _as_obs(sample) -> np.ndarray:
    if isinstance(sample, Dataset):
        return sample.observations
    obs = np.asarray(sample, dtype=np.float64)
    if obs.ndim == 1:
        obs = obs.reshape(-1, 1)
    if obs.shape[0] == 0:
        raise ValueError("empty sample")
    return obs


def _norm_cdf(x: float) -> float:
    return 0.5 * math.erfc(-x / math.sqrt(2.0))


def _norm_pdf(x: float) -> float:
    return math.exp(-x * x / 2.0) / math.sqrt(2.0 * math.pi)


class StochasticProgram(ABC):
    """A minimization of an expected scenario cost over a decision set."""

    key: str = ""
    dim: int
    true_optimum: Optional[float] = None
    true_solution = None

    @abstractmethod
    def cost(self, x, xi) -> float:
        """Scenario cost of decision x under one observation xi."""

    @abstractmethod
    def cost_many(self, x, xis: np.ndarray) -> np.ndarray:
        """Vector of scenario costs of x under each row of xis."""

    @abstractmethod
    def solve_saa(self, sample) -> SaaSolution:
        """Exact optimum of the sample-average problem on the sample."""

    @abstractmethod
    def sample(self, rng, size: int | None = None) -> np.ndarray:
        """Draw observations from the underlying distribution."""

    def saa_values(self, data: np.ndarray, idx: np.ndarray) -> np.ndarray:
        """SAA optimal values of the resamples data[idx[r]] for each row r."""
        return np.array([self.solve_saa(data[row]).value for row in idx])

    def true_value(self, x) -> Optional[float]:
        """Exact expected cost of decision x, where a closed form exists."""
        return None

    def check_feasible(self, x) -> None:
        """Raise ValueError if x is not a feasible decision."""

    def _generator(self, rng) -> np.random.Generator:
        return rng.generator() if isinstance(rng, RngStream) else rng


class Cvar1d(StochasticProgram):
    """Tail-average risk of a standard normal scalar.

    min over real x of  x + E[(xi - x)_+] / alpha1.  The empirical
    objective is convex piecewise linear with breakpoints at the sample
    values, so the solver scans breakpoints after a sort; exact ties
    resolve to the largest breakpoint.
    """

    key = "cvar"
    dim = 1

    def __init__(self, alpha1: float = constants.CVAR_ALPHA1):
        if not 0.0 < alpha1 < 1.0:
            raise ValueError("alpha1 must lie in (0, 1)")
        self.alpha1 = float(alpha1)
        if alpha1 == constants.CVAR_ALPHA1:
            self.true_optimum = constants.CVAR_TRUE_OPTIMUM
            self.true_solution = 1.2815515655446005  # 90% point of N(0,1)

    def cost(self, x, xi) -> float:
        v = float(np.asarray(xi).ravel()[0])
        return x + max(v - x, 0.0) / self.alpha1

    def cost_many(self, x, xis) -> np.ndarray:
        v = np.asarray(xis, dtype=np.float64).reshape(-1)
        return x + np.maximum(v - x, 0.0) / self.alpha1

    def solve_saa(self, sample) -> SaaSolution:
        v = np.sort(_as_obs(sample)[:, 0])
        k = v.size
        csum = np.cumsum(v)
        tail = csum[-1] - csum
        cnt = k - 1 - np.arange(k)
        f = v + (tail - cnt * v) / (self.alpha1 * k)
        j = k - 1 - int(np.argmin(f[::-1]))  # ties -> largest breakpoint
        return SaaSolution(value=float(f[j]), solution=float(v[j]))

    def saa_values(self, data, idx) -> np.ndarray:
        return _kernels.cvar_values(data[:, 0], idx, self.alpha1)

    def sample(self, rng, size=None) -> np.ndarray:
        g = self._generator(rng)
        return g.standard_normal((size or 1, 1)) if size is not None else g.standard_normal(1)

    def true_value(self, x) -> float:
        x = float(x)
        return x + (_norm_pdf(x) - x * (1.0 - _norm_cdf(x))) / self.alpha1


class PortfolioCvar(StochasticProgram):
    """Tail-risk-minimal long-only portfolio with a return target.

    The decision is (c, x) with hinge variables eliminating the positive
    part; each empirical problem is the LP
        min c + sum(u)/ (alpha2 k)
        s.t. u_i >= -xi_i@x - c, u_i >= 0, mu@x >= b, sum(x) = 1, x >= 0.
    """

    key = "portfolio"
    dim = 5

    def __init__(self, alpha2: float = constants.PORTFOLIO_ALPHA2,
                 mu=None, sigma=None, b: float = constants.PORTFOLIO_B):
        if not 0.0 < alpha2 <= 1.0:
            raise ValueError("alpha2 must lie in (0, 1]")
        self.alpha2 = float(alpha2)
        self.mu = np.asarray(constants.PORTFOLIO_MU if mu is None else mu, dtype=np.float64)
        self.sigma = np.asarray(constants.PORTFOLIO_SIGMA if sigma is None else sigma,
                                dtype=np.float64)
        self.b = float(b)
        self.dim = self.mu.size
        if self.b > float(np.max(self.mu)):
            raise ValueError("target return infeasible")
        self._chol = cholesky(self.sigma)
        default = (mu is None and sigma is None
                   and alpha2 == constants.PORTFOLIO_ALPHA2 and b == constants.PORTFOLIO_B)
        if default:
            self.true_optimum = constants.PORTFOLIO_TRUE_OPTIMUM
            self.true_solution = constants.PORTFOLIO_TRUE_SOLUTION

    def cost(self, x, xi) -> float:
        c, w = float(x[0]), np.asarray(x[1:], dtype=np.float64)
        loss = -float(np.asarray(xi, dtype=np.float64) @ w)
        return c + max(loss - c, 0.0) / self.alpha2

    def cost_many(self, x, xis) -> np.ndarray:
        c, w = float(x[0]), np.asarray(x[1:], dtype=np.float64)
        losses = -np.asarray(xis, dtype=np.float64) @ w
        return c + np.maximum(losses - c, 0.0) / self.alpha2

    def solve_saa(self, sample) -> SaaSolution:
        obs = _as_obs(sample)
        k, d = obs.shape
        # variables [c, x(d), u(k)]
        nv = 1 + d + k
        c_obj = np.zeros(nv)
        c_obj[0] = 1.0
        c_obj[1 + d:] = 1.0 / (self.alpha2 * k)
        a_ub = np.zeros((k + 1, nv))
        b_ub = np.zeros(k + 1)
        a_ub[:k, 0] = -1.0
        a_ub[:k, 1:1 + d] = -obs
        a_ub[np.arange(k), 1 + d + np.arange(k)] = -1.0  # -c - xi@x - u <= 0
        a_ub[k, 1:1 + d] = -self.mu
        b_ub[k] = -self.b
        a_eq = np.zeros((1, nv))
        a_eq[0, 1:1 + d] = 1.0
        bounds = [(None, None)] + [(0.0, None)] * (d + k)
        sol = simplex_solve(LinearProgram(
            c=c_obj, a_ub=a_ub, b_ub=b_ub, a_eq=a_eq, b_eq=[1.0], bounds=bounds))
        if sol.status != "optimal":
            raise RuntimeError(f"portfolio subproblem came back {sol.status}")
        return SaaSolution(value=sol.value, solution=sol.point[:1 + d].copy())

    def saa_values(self, data, idx) -> np.ndarray:
        maxit = 50 * ((idx.shape[1] + 2) + (2 * idx.shape[1] + self.dim + 3 + idx.shape[1] + 2))
        return _kernels.portfolio_values(data, idx, self.mu, self.alpha2, self.b, maxit)

    def sample(self, rng, size=None) -> np.ndarray:
        g = self._generator(rng)
        m = size or 1
        draws = self.mu + g.standard_normal((m, self.dim)) @ self._chol.T
        return draws if size is not None else draws[0]

    def true_value(self, x) -> float:
        c, w = float(x[0]), np.asarray(x[1:], dtype=np.float64)
        m = -float(self.mu @ w)
        s = math.sqrt(float(w @ self.sigma @ w))
        if s == 0.0:
            return c + max(m - c, 0.0) / self.alpha2
        t = (c - m) / s
        expected_excess = s * _norm_pdf(t) + (m - c) * (1.0 - _norm_cdf(t))
        return c + expected_excess / self.alpha2

    def check_feasible(self, x) -> None:
        w = np.asarray(x[1:], dtype=np.float64)
        if (abs(w.sum() - 1.0) > 1e-6 or np.any(w < -1e-9)
                or self.mu @ w < self.b - 1e-6):
            raise ValueError("infeasible portfolio decision")


def _ip_candidates() -> np.ndarray:
    """All 0/1 supports with at least one pick and at most two of the last four."""
    cands = []
    for code in range(1, 1 << 10):
        x = [(code >> j) & 1 for j in range(10)]
        if sum(x[6:]) <= 2:
            cands.append(x)
    return np.asarray(cands, dtype=np.float64)


class ItemSelectionIp(StochasticProgram):
    """Pick-at-least-one item selection with random losses, solved exactly
    by enumerating the feasible supports (703 of them)."""

    key = "ip"
    dim = 10

    def __init__(self, mu=None, sigma=None):
        self.mu = np.asarray(constants.IP_MU if mu is None else mu, dtype=np.float64)
        self.sigma = np.asarray(constants.IP_SIGMA if sigma is None else sigma, dtype=np.float64)
        self.a_mat = constants.IP_A
        self.b_vec = constants.IP_B
        self._chol = cholesky(self.sigma)
        self.candidates = _ip_candidates()
        if mu is None and sigma is None:
            self.true_optimum = constants.IP_TRUE_OPTIMUM
            self.true_solution = constants.IP_TRUE_SOLUTION

    def cost(self, x, xi) -> float:
        return float(np.asarray(xi, dtype=np.float64) @ np.asarray(x, dtype=np.float64))

    def cost_many(self, x, xis) -> np.ndarray:
        return np.asarray(xis, dtype=np.float64) @ np.asarray(x, dtype=np.float64)

    def solve_saa(self, sample) -> SaaSolution:
        xb = _as_obs(sample).mean(axis=0)
        vals = self.candidates @ xb
        j = int(np.argmin(vals))
        return SaaSolution(value=float(vals[j]), solution=self.candidates[j].copy())

    def saa_values(self, data, idx) -> np.ndarray:
        return _kernels.ip_values(data, idx, self.candidates)

    def sample(self, rng, size=None) -> np.ndarray:
        g = self._generator(rng)
        m = size or 1
        draws = self.mu + g.standard_normal((m, self.dim)) @ self._chol.T
        return draws if size is not None else draws[0]

    def true_value(self, x) -> float:
        return float(self.mu @ np.asarray(x, dtype=np.float64))

    def check_feasible(self, x) -> None:
        x = np.asarray(x, dtype=np.float64)
        binary = np.all((x == 0) | (x == 1))
        if not binary or not np.all(self.a_mat @ x <= self.b_vec + 1e-9):
            raise ValueError("infeasible item selection")


class ToyLp(StochasticProgram):
    """Scalar linear program on [-1, 1] with a noise-scaled slope.

    min E[-0.05 x + (3 - 2x) xi], xi standard normal; the empirical
    objective is linear in x, so the optimum is at an endpoint, and exact
    ties resolve to x = +1.
    """

    key = "toylp"
    dim = 1
    true_optimum = constants.TOYLP_TRUE_OPTIMUM
    true_solution = constants.TOYLP_TRUE_SOLUTION

    def cost(self, x, xi) -> float:
        v = float(np.asarray(xi).ravel()[0])
        return -0.05 * x + (3.0 - 2.0 * x) * v

    def cost_many(self, x, xis) -> np.ndarray:
        v = np.asarray(xis, dtype=np.float64).reshape(-1)
        return -0.05 * x + (3.0 - 2.0 * x) * v

    def solve_saa(self, sample) -> SaaSolution:
        xb = float(_as_obs(sample)[:, 0].mean())
        at_plus = -0.05 + xb
        at_minus = 0.05 + 5.0 * xb
        if at_plus <= at_minus:  # ties -> largest endpoint
            return SaaSolution(value=at_plus, solution=1.0)
        return SaaSolution(value=at_minus, solution=-1.0)

    def saa_values(self, data, idx) -> np.ndarray:
        return _kernels.toylp_values(data[:, 0], idx)

    def sample(self, rng, size=None) -> np.ndarray:
        g = self._generator(rng)
        return g.standard_normal((size or 1, 1)) if size is not None else g.standard_normal(1)

    def true_value(self, x) -> float:
        return -0.05 * float(x)

    def check_feasible(self, x) -> None:
        if not -1.0 - 1e-9 <= float(x) <= 1.0 + 1e-9:
            raise ValueError("decision outside [-1, 1]")


class GapProgram(StochasticProgram):
    """Shifted program whose cost is h(x, xi) - h(x_hat, xi).

    Its true optimum is the negated optimality gap of x_hat.  Because the
    shift is decision-independent per scenario, the empirical optimum is
    the base optimum minus the sample-average shift, with the same argmin.
    """

    key = "gap"

    def __init__(self, base: StochasticProgram, x_hat):
        base.check_feasible(x_hat)
        self.base = base
        self.x_hat = x_hat
        self.dim = base.dim
        if base.true_optimum is not None and base.true_value(x_hat) is not None:
            self.true_optimum = -(base.true_value(x_hat) - base.true_optimum)
            self.true_solution = base.true_solution

    def cost(self, x, xi) -> float:
        return self.base.cost(x, xi) - self.base.cost(self.x_hat, xi)

    def cost_many(self, x, xis) -> np.ndarray:
        return self.base.cost_many(x, xis) - self.base.cost_many(self.x_hat, xis)

    def solve_saa(self, sample) -> SaaSolution:
        obs = _as_obs(sample)
        sol = self.base.solve_saa(obs)
        shift = float(np.mean(self.base.cost_many(self.x_hat, obs)))
        return SaaSolution(value=sol.value - shift, solution=sol.solution)

    def saa_values(self, data, idx) -> np.ndarray:
        shift = np.asarray(self.base.cost_many(self.x_hat, data), dtype=np.float64)
        return self.base.saa_values(data, idx) - shift[idx].mean(axis=1)

    def sample(self, rng, size=None) -> np.ndarray:
        return self.base.sample(rng, size)

    def true_value(self, x) -> Optional[float]:
        zx = self.base.true_value(x)
        zh = self.base.true_value(self.x_hat)
        if zx is None or zh is None:
            return None
        return zx - zh

    def check_feasible(self, x) -> None:
        self.base.check_feasible(x)


def cvar1d(alpha1: float = constants.CVAR_ALPHA1) -> Cvar1d:
    return Cvar1d(alpha1)


def portfolio_cvar(alpha2: float = constants.PORTFOLIO_ALPHA2, mu=None,
                   sigma=None, b: float = constants.PORTFOLIO_B) -> PortfolioCvar:
    return PortfolioCvar(alpha2, mu, sigma, b)


def item_selection_ip(mu=None, sigma=None) -> ItemSelectionIp:
    return ItemSelectionIp(mu, sigma)


def toy_lp() -> ToyLp:
    return ToyLp()


def gap_program(base: StochasticProgram, x_hat) -> GapProgram:
    return GapProgram(base, x_hat)


PROGRAMS = {
    "cvar": cvar1d,
    "portfolio": portfolio_cvar,
    "ip": item_selection_ip,
    "toylp": toy_lp,
}


def get_program(key: str) -> StochasticProgram:
    try:
        return PROGRAMS[key]()
    except KeyError:
        raise ValueError(f"unknown problem {key!r}; choose from {sorted(PROGRAMS)}") from None
