"""Upper confidence bounds on the optimality gap of a candidate decision.

Two assemblies on top of the lower-bound procedures:

* Bonferroni correction — an upper confidence bound on the candidate's
  expected cost from held-out data, minus a lower confidence bound on the
  optimal value from all data, each side at half the error budget.
* Common random numbers — a lower confidence bound on the optimal value
  of the shifted program h(x, xi) - h(x_hat, xi) (whose optimum is the
  negated gap) computed on the held-out data only, then negated.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .bounds import BoundReport, LowerBoundMethod, compute_lower_bound
from .core import Dataset, RngStream, mean_var, normal_quantile
from .programs import StochasticProgram, gap_program

__all__ = ["GapSetup", "GapBound", "make_gap_setup", "gap_bound_bc", "gap_bound_crn"]


@dataclass(frozen=True)
class GapSetup:
    """Training data produced x_hat; evaluation data is held out of that fit."""

    train: np.ndarray
    evaluation: np.ndarray
    x_hat: object
    alpha: float = 0.05

    def __post_init__(self):
        train = np.asarray(self.train, dtype=np.float64)
        evaluation = np.asarray(self.evaluation, dtype=np.float64)
        if evaluation.shape[0] < 2:
            raise ValueError("need n2 >= 2 evaluation observations")
        if not 0.0 < self.alpha < 1.0:
            raise ValueError("alpha must lie in (0, 1)")
        object.__setattr__(self, "train", train)
        object.__setattr__(self, "evaluation", evaluation)

    @property
    def n1(self) -> int:
        return self.train.shape[0]

    @property
    def n2(self) -> int:
        return self.evaluation.shape[0]


@dataclass(frozen=True)
class GapBound:
    bound: float  # upper confidence bound on the optimality gap
    approach: str  # "bc" | "crn"
    upper_component: Optional[float]  # BC: the bound on Z(x_hat)
    lower_component: Optional[BoundReport]  # the lower-bound sub-call
    x_hat: object
    alpha: float


def make_gap_setup(program: StochasticProgram, n1: int, n2: int,
                   rng: RngStream, alpha: float = 0.05) -> GapSetup:
    """Draw disjoint training and evaluation samples (independent
    substreams) and fit the candidate decision on the training part."""
    train = program.sample(rng.substream(0), n1)
    evaluation = program.sample(rng.substream(1), n2)
    x_hat = program.solve_saa(train).solution
    return GapSetup(train=train, evaluation=evaluation, x_hat=x_hat, alpha=alpha)


def gap_bound_bc(setup: GapSetup, program: StochasticProgram,
                 method: LowerBoundMethod,
                 rng: Optional[RngStream] = None) -> GapBound:
    """Bonferroni gap bound U - L with each side at level 1 - alpha/2.

    U comes from the evaluation costs at x_hat; L is the chosen lower
    bound on the optimal value computed on all n1 + n2 observations
    (training block first, preserving dataset order for batching).
    """
    half = setup.alpha / 2.0
    he = np.asarray(program.cost_many(setup.x_hat, setup.evaluation), dtype=np.float64)
    stats = mean_var(he)
    upper = stats.mean + normal_quantile(1.0 - half) * math.sqrt(stats.variance / setup.n2)
    pooled = Dataset(np.vstack([setup.train, setup.evaluation]))
    lower = compute_lower_bound(pooled, program, method, alpha=half, rng=rng)
    return GapBound(
        bound=upper - lower.bound,
        approach="bc",
        upper_component=upper,
        lower_component=lower,
        x_hat=setup.x_hat,
        alpha=setup.alpha,
    )


def gap_bound_crn(setup: GapSetup, program: StochasticProgram,
                  method: LowerBoundMethod,
                  rng: Optional[RngStream] = None) -> GapBound:
    """Common-random-numbers gap bound from the shifted program.

    The shifted cost h(x, xi) - h(x_hat, xi) has optimal value equal to
    the negated gap, so a level 1 - alpha lower bound for it on the
    evaluation data negates into the gap bound.
    """
    shifted = gap_program(program, setup.x_hat)
    lower = compute_lower_bound(Dataset(setup.evaluation), shifted, method,
                                alpha=setup.alpha, rng=rng)
    return GapBound(
        bound=-lower.bound,
        approach="crn",
        upper_component=None,
        lower_component=lower,
        x_hat=setup.x_hat,
        alpha=setup.alpha,
    )
