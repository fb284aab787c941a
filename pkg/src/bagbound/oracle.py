"""Reference estimators for differential testing.

Complete (exhaustive) U- and V-statistics of the SAA kernel, fresh-sample
Monte Carlo for the expected SAA value, and a nested Monte Carlo
estimator of the variance of the conditional expected SAA value given one
fixed observation.  These are slower but independent routes to the
quantities the resampling bounds estimate, plus a piecewise-linear
benchmark program whose asymptotic conditional variance is known exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations, product

import numpy as np

from . import _kernels
from .core import Dataset, RngStream
from .programs import SaaSolution, StochasticProgram

__all__ = [
    "OracleEstimate",
    "complete_u_statistic",
    "complete_v_statistic",
    "estimate_wk",
    "estimate_gk_variance",
    "example1_program",
]

_MAX_EVALS = 10**6
_BLOCK = 4096


@dataclass(frozen=True)
class OracleEstimate:
    value: float
    mc_stderr: float  # 0 for exact enumerations
    evaluations: int
    exact: bool = False


def _obs(data) -> np.ndarray:
    return data.observations if isinstance(data, Dataset) else np.asarray(data, dtype=np.float64)


def _enumerated_mean(obs: np.ndarray, k: int, program: StochasticProgram,
                     index_iter, count: int) -> float:
    total = 0.0
    comp = 0.0
    buf = np.empty((_BLOCK, k), dtype=np.int64)
    fill = 0
    for tup in index_iter:
        buf[fill] = tup
        fill += 1
        if fill == _BLOCK:
            vals = program.saa_values(obs, buf)
            y = float(np.sum(vals)) - comp
            t = total + y
            comp = (t - total) - y
            total = t
            fill = 0
    if fill:
        vals = program.saa_values(obs, buf[:fill])
        total += float(np.sum(vals))
    return total / count


def complete_u_statistic(data, k: int, program: StochasticProgram) -> OracleEstimate:
    """Exact average of the SAA kernel over all k-subsets, in lex order."""
    obs = _obs(data)
    n = obs.shape[0]
    if not 1 <= k <= n:
        raise ValueError("need 1 <= k <= n")
    count = math.comb(n, k)
    if count > _MAX_EVALS:
        raise ValueError("oracle scale exceeded")
    mean = _enumerated_mean(obs, k, program, combinations(range(n), k), count)
    return OracleEstimate(value=mean, mc_stderr=0.0, evaluations=count, exact=True)


def complete_v_statistic(data, k: int, program: StochasticProgram) -> OracleEstimate:
    """Exact average over all n**k ordered tuples with repetition."""
    obs = _obs(data)
    n = obs.shape[0]
    if k < 1:
        raise ValueError("need k >= 1")
    count = n**k
    if count > _MAX_EVALS:
        raise ValueError("oracle scale exceeded")
    mean = _enumerated_mean(obs, k, program, product(range(n), repeat=k), count)
    return OracleEstimate(value=mean, mc_stderr=0.0, evaluations=count, exact=True)


def estimate_wk(program: StochasticProgram, k: int, reps: int,
                rng: RngStream) -> OracleEstimate:
    """Monte Carlo estimate of the expected SAA value at sample size k,
    from ``reps`` fresh i.i.d. samples."""
    if reps < 100:
        raise ValueError("need reps >= 100")
    gen = rng.generator() if isinstance(rng, RngStream) else rng
    total = 0.0
    total2 = 0.0
    done = 0
    while done < reps:
        rows = min(_BLOCK, reps - done)
        block = program.sample(gen, rows * k).reshape(rows * k, -1)
        idx = np.arange(rows * k, dtype=np.int64).reshape(rows, k)
        vals = program.saa_values(block, idx)
        total += float(np.sum(vals))
        total2 += float(np.sum(vals * vals))
        done += rows
    mean = total / reps
    var = max(total2 / reps - mean * mean, 0.0) * reps / (reps - 1)
    return OracleEstimate(value=mean, mc_stderr=math.sqrt(var / reps), evaluations=reps)


def estimate_gk_variance(program: StochasticProgram, k: int, outer: int,
                         inner: int, rng: RngStream) -> OracleEstimate:
    """Nested Monte Carlo estimate of Var over xi of E[SAA value | first
    observation = xi].

    For each of ``outer`` draws of the conditioning observation, ``inner``
    fresh samples of the remaining k-1 observations estimate the
    conditional mean.  The between-group sample variance is debiased by
    the averaged within-group variance over ``inner`` (one-way ANOVA);
    the standard error is a leave-one-group-out jackknife.
    """
    if outer < 100 or inner < 100:
        raise ValueError("need outer >= 100 and inner >= 100")
    gen = rng.generator() if isinstance(rng, RngStream) else rng
    group_mean = np.empty(outer)
    group_var = np.empty(outer)
    idx = np.arange(inner * k, dtype=np.int64).reshape(inner, k)
    for o in range(outer):
        xi0 = program.sample(gen, 1)
        rest = program.sample(gen, inner * (k - 1))
        block = np.empty((inner, k, xi0.shape[1]))
        block[:, 0, :] = xi0[0]
        block[:, 1:, :] = rest.reshape(inner, k - 1, -1)
        vals = program.saa_values(block.reshape(inner * k, -1), idx)
        group_mean[o] = np.mean(vals)
        group_var[o] = np.var(vals, ddof=1)

    def debiased(means, wvars):
        return float(np.var(means, ddof=1) - np.mean(wvars) / inner)

    est = debiased(group_mean, group_var)
    # leave-one-group-out jackknife from running sums
    s1 = float(np.sum(group_mean))
    s2 = float(np.sum(group_mean**2))
    sw = float(np.sum(group_var))
    o = outer
    loo = np.empty(o)
    for i in range(o):
        m1 = (s1 - group_mean[i]) / (o - 1)
        m2 = (s2 - group_mean[i] ** 2) / (o - 1)
        var_loo = (m2 - m1 * m1) * (o - 1) / (o - 2)
        loo[i] = var_loo - (sw - group_var[i]) / ((o - 1) * inner)
    se = math.sqrt((o - 1) / o * float(np.sum((loo - np.mean(loo)) ** 2)))
    return OracleEstimate(value=est, mc_stderr=se, evaluations=outer * inner)


class Example1Program(StochasticProgram):
    """Piecewise-linear interpolation cost over x in [1, d] with
    independent standard normal components: at integer x = j the cost is
    component j, elsewhere the linear interpolation of the two neighbors.
    Every x is optimal for the true problem (the objective is 0), and the
    SAA optimum is the smallest component sample mean.
    """

    key = "example1"
    true_optimum = 0.0
    true_solution = None

    def __init__(self, d: int):
        if d < 2:
            raise ValueError("need d >= 2")
        self.dim = int(d)

    def cost(self, x, xi) -> float:
        xi = np.asarray(xi, dtype=np.float64).ravel()
        x = float(x)
        if not 1.0 <= x <= self.dim:
            raise ValueError(f"decision outside [1, {self.dim}]")
        j = int(math.floor(x))
        if j == x or j == self.dim:
            return float(xi[min(j, self.dim) - 1])
        frac = x - j
        return float((1.0 - frac) * xi[j - 1] + frac * xi[j])

    def cost_many(self, x, xis) -> np.ndarray:
        xis = np.asarray(xis, dtype=np.float64)
        x = float(x)
        j = int(math.floor(x))
        if j == x or j == self.dim:
            return xis[:, min(j, self.dim) - 1].copy()
        frac = x - j
        return (1.0 - frac) * xis[:, j - 1] + frac * xis[:, j]

    def solve_saa(self, sample) -> SaaSolution:
        obs = _obs(sample)
        means = obs.mean(axis=0)
        j = int(np.argmin(means))
        return SaaSolution(value=float(means[j]), solution=float(j + 1))

    def saa_values(self, data, idx) -> np.ndarray:
        return _kernels.colmin_values(data, idx)

    def sample(self, rng, size=None) -> np.ndarray:
        g = self._generator(rng)
        m = size or 1
        draws = g.standard_normal((m, self.dim))
        return draws if size is not None else draws[0]

    def true_value(self, x) -> float:
        return 0.0

    def check_feasible(self, x) -> None:
        if not 1.0 <= float(x) <= self.dim:
            raise ValueError(f"decision outside [1, {self.dim}]")


def example1_program(d: int) -> Example1Program:
    return Example1Program(d)
