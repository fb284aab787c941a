"""Lower confidence bounds on the true optimal value.

Three procedures over a fixed dataset:

* ``bag_bound`` — average B resampled SAA values (an incomplete U- or
  V-statistic depending on the resampling scheme) and pair the point with
  an infinitesimal-jackknife standard error built from covariances
  between resample inclusion counts and resampled values.
* ``batching_bound`` — split the data into disjoint batches, solve each,
  and use the classic mean +- quantile * stderr of the batch values.
* ``single_replication_bound`` — one full-sample solve with a plug-in
  (or paired-difference, for gap bounds) variance estimate.
"""

from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np

from . import _kernels
from .core import Dataset, RngStream, mean_var, normal_quantile, t_quantile
from .programs import StochasticProgram

__all__ = [
    "ResampleScheme",
    "BagOutput",
    "BoundReport",
    "BoundComputationError",
    "BaggingMethod",
    "BatchingMethod",
    "SingleReplicationMethod",
    "resample_counts",
    "bag_bound",
    "batching_bound",
    "single_replication_bound",
    "compute_lower_bound",
]

_BLOCK = 4096  # resamples solved per batch; fixed so streams never shift


class ResampleScheme(enum.Enum):
    WITH_REPLACEMENT = "with"
    WITHOUT_REPLACEMENT = "without"


class BoundComputationError(RuntimeError):
    """A resampled subproblem failed; carries the resample index."""


@dataclass(frozen=True)
class BagOutput:
    """Result of the bagging procedure on one dataset."""

    z_bag: float
    sigma_ij: float
    lower_bound: float
    k: int
    B: int
    n: int
    scheme: ResampleScheme
    alpha: float
    per_datum_cov: np.ndarray
    resample_std: float  # sample std of the B resampled values

    def to_dict(self) -> dict:
        return {
            "z_bag": self.z_bag,
            "sigma_ij": self.sigma_ij,
            "lower_bound": self.lower_bound,
            "k": self.k,
            "B": self.B,
            "n": self.n,
            "scheme": self.scheme.value,
            "alpha": self.alpha,
            "per_datum_cov": self.per_datum_cov.tolist(),
            "resample_std": self.resample_std,
        }


@dataclass(frozen=True)
class BoundReport:
    method: str  # "bagging" | "batching" | "single"
    bound: float
    point: float
    stderr: float
    quantile: float
    kind: str  # "lower" | "upper"
    params: dict = field(default_factory=dict)


def _check_scheme(n: int, k: int, scheme: ResampleScheme, for_ij: bool) -> None:
    if k < 1:
        raise ValueError("resample size k must be >= 1")
    if scheme is ResampleScheme.WITHOUT_REPLACEMENT:
        limit = n - 1 if for_ij else n
        if k > limit:
            what = "n - 1 (the finite-sample correction needs k < n)" if for_ij else "n"
            raise ValueError(f"k must be <= {what} when resampling without replacement")


def _index_block(gen: np.random.Generator, rows: int, n: int, k: int,
                 scheme: ResampleScheme) -> np.ndarray:
    if scheme is ResampleScheme.WITH_REPLACEMENT:
        return gen.integers(0, n, size=(rows, k), dtype=np.int64)
    if k == n:
        return np.tile(np.arange(n, dtype=np.int64), (rows, 1))
    # k smallest of n i.i.d. uniform keys is a uniform random k-subset
    keys = gen.random((rows, n))
    part = np.argpartition(keys, k, axis=1)[:, :k]
    return np.ascontiguousarray(part.astype(np.int64))


def resample_counts(rng: RngStream, n: int, k: int,
                    scheme: ResampleScheme) -> tuple[np.ndarray, np.ndarray]:
    """One resample: (index multiset of size k, inclusion-count vector)."""
    if n < 1:
        raise ValueError("need n >= 1")
    _check_scheme(n, k, scheme, for_ij=False)
    gen = rng.generator() if isinstance(rng, RngStream) else rng
    idx = _index_block(gen, 1, n, k, scheme)[0]
    counts = np.bincount(idx, minlength=n)
    return idx, counts


def _kahan_add(total: float, comp: float, x: float) -> tuple[float, float]:
    y = x - comp
    t = total + y
    return t, (t - total) - y


def bag_bound(data: Dataset, program: StochasticProgram, k: int, B: int,
              alpha: float, scheme: ResampleScheme, rng: RngStream) -> BagOutput:
    """Bagging lower bound: resample B times, solve, average, and subtract
    the normal quantile times the infinitesimal-jackknife standard error.

    Streams in fixed-size blocks with O(n) accumulator memory; the
    covariance uses the identity mean(N_i z) - mean(N_i) mean(z), whose
    centered k/n cross-terms cancel exactly.
    """
    obs = data.observations if isinstance(data, Dataset) else np.asarray(data)
    n = obs.shape[0]
    if n < 2:
        raise ValueError("need n >= 2")
    if B < 2:
        raise ValueError("need B >= 2")
    if not 0.0 < alpha < 1.0:
        raise ValueError("alpha must lie in (0, 1)")
    _check_scheme(n, k, scheme, for_ij=True)
    if B < 5 * n * k:
        warnings.warn(
            f"B={B} is below the recommended 5*n*k={5 * n * k}; the "
            "infinitesimal-jackknife variance may carry visible resampling noise",
            stacklevel=2,
        )

    gen = rng.generator() if isinstance(rng, RngStream) else rng
    sum_n = np.zeros(n)
    sum_nz = np.zeros(n)
    s_z = c_z = 0.0
    s_z2 = c_z2 = 0.0
    done = 0
    while done < B:
        rows = min(_BLOCK, B - done)
        idx = _index_block(gen, rows, n, k, scheme)
        z = program.saa_values(obs, idx)
        bad = np.flatnonzero(np.isnan(z))
        if bad.size:
            raise BoundComputationError(
                f"resampled subproblem {done + int(bad[0])} failed to solve")
        _kernels.accumulate_counts(idx, z, sum_n, sum_nz)
        s_z, c_z = _kahan_add(s_z, c_z, float(np.sum(z)))
        s_z2, c_z2 = _kahan_add(s_z2, c_z2, float(np.sum(z * z)))
        done += rows

    z_bag = s_z / B
    cov = sum_nz / B - (sum_n / B) * z_bag
    factor = 1.0
    if scheme is ResampleScheme.WITHOUT_REPLACEMENT:
        factor = (n / (n - k)) ** 2
    sigma_ij = math.sqrt(factor * float(np.dot(cov, cov)))
    resample_var = max(s_z2 / B - z_bag * z_bag, 0.0) * B / (B - 1)
    zq = normal_quantile(1.0 - alpha)
    return BagOutput(
        z_bag=z_bag,
        sigma_ij=sigma_ij,
        lower_bound=z_bag - zq * sigma_ij,
        k=k, B=B, n=n, scheme=scheme, alpha=alpha,
        per_datum_cov=cov,
        resample_std=math.sqrt(resample_var),
    )


def batching_bound(data: Dataset, program: StochasticProgram, k: int,
                   alpha: float) -> BoundReport:
    """Disjoint-batch lower bound; t quantile below 30 batches.

    Batches are consecutive blocks of k in dataset order; the n - m*k
    remainder observations are unused.
    """
    obs = data.observations if isinstance(data, Dataset) else np.asarray(data)
    n = obs.shape[0]
    m = n // k
    if m < 2:
        raise ValueError("need at least two batches")
    vals = [program.solve_saa(obs[j * k:(j + 1) * k]).value for j in range(m)]
    stats = mean_var(vals)
    stderr = math.sqrt(stats.variance / m)
    q = t_quantile(1.0 - alpha, m - 1) if m < 30 else normal_quantile(1.0 - alpha)
    return BoundReport(
        method="batching",
        bound=stats.mean - q * stderr,
        point=stats.mean,
        stderr=stderr,
        quantile=q,
        kind="lower",
        params={"n": n, "k": k, "m": m, "alpha": alpha},
    )


def single_replication_bound(data: Dataset, program: StochasticProgram,
                             alpha: float, x_hat=None) -> BoundReport:
    """One full-sample solve.

    Without ``x_hat``: lower bound on the optimal value, standard error
    from the costs at the estimated solution.  With ``x_hat``: upper bound
    on its optimality gap, standard error from the paired cost
    differences h(x_hat, xi) - h(x_n*, xi).
    """
    obs = data.observations if isinstance(data, Dataset) else np.asarray(data)
    n = obs.shape[0]
    if n < 2:
        raise ValueError("need n >= 2")
    zq = normal_quantile(1.0 - alpha)
    sol = program.solve_saa(obs)
    if x_hat is None:
        h = program.cost_many(sol.solution, obs)
        stderr = math.sqrt(mean_var(h).variance / n)
        return BoundReport(
            method="single",
            bound=sol.value - zq * stderr,
            point=sol.value,
            stderr=stderr,
            quantile=zq,
            kind="lower",
            params={"n": n, "alpha": alpha},
        )
    diff = np.asarray(program.cost_many(x_hat, obs)) - np.asarray(
        program.cost_many(sol.solution, obs))
    stderr = math.sqrt(mean_var(diff).variance / n)
    point = float(np.mean(np.asarray(program.cost_many(x_hat, obs)))) - sol.value
    return BoundReport(
        method="single",
        bound=point + zq * stderr,
        point=point,
        stderr=stderr,
        quantile=zq,
        kind="upper",
        params={"n": n, "alpha": alpha},
    )


@dataclass(frozen=True)
class BaggingMethod:
    k: int
    B: Optional[int] = None  # None -> the 5*n*k default
    scheme: ResampleScheme = ResampleScheme.WITHOUT_REPLACEMENT

    def resolve_b(self, n: int) -> int:
        return 5 * n * self.k if self.B is None else self.B


@dataclass(frozen=True)
class BatchingMethod:
    k: int


@dataclass(frozen=True)
class SingleReplicationMethod:
    pass


LowerBoundMethod = Union[BaggingMethod, BatchingMethod, SingleReplicationMethod]


def compute_lower_bound(data: Dataset, program: StochasticProgram,
                        method: LowerBoundMethod, alpha: float,
                        rng: Optional[RngStream] = None) -> BoundReport:
    """Uniform front-end over the three lower-bound procedures."""
    if isinstance(method, BaggingMethod):
        if rng is None:
            raise ValueError("bagging needs an RngStream")
        n = len(data)
        B = method.resolve_b(n)
        out = bag_bound(data, program, method.k, B, alpha, method.scheme, rng)
        return BoundReport(
            method="bagging",
            bound=out.lower_bound,
            point=out.z_bag,
            stderr=out.sigma_ij,
            quantile=normal_quantile(1.0 - alpha),
            kind="lower",
            params={"n": n, "k": method.k, "B": B, "alpha": alpha,
                    "scheme": method.scheme.value,
                    "seed": rng.seed if isinstance(rng, RngStream) else None},
        )
    if isinstance(method, BatchingMethod):
        return batching_bound(data, program, method.k, alpha)
    if isinstance(method, SingleReplicationMethod):
        return single_replication_bound(data, program, alpha)
    raise TypeError(f"unknown lower-bound method {method!r}")
