"""Coverage experiments: many independent datasets, one bound each.

``run_experiment`` draws ``replications`` fresh datasets from the chosen
problem, computes the configured bound on each, and reports per-k rows of
coverage (fraction of replications whose bound brackets the truth), mean
bound, and standard deviation.  Replications run on a thread pool, but
each owns an independent substream keyed by its index and rows assemble
in replication order, so output is byte-identical for any thread count.
"""

from __future__ import annotations

import csv
import io
import json
import os
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np

from .bounds import (
    BaggingMethod,
    BatchingMethod,
    ResampleScheme,
    SingleReplicationMethod,
    compute_lower_bound,
)
from .core import Dataset, RngStream
from .gap import gap_bound_bc, gap_bound_crn, make_gap_setup
from .programs import get_program

__all__ = [
    "ExperimentConfig",
    "ExperimentRow",
    "run_experiment",
    "emit",
    "THREADS_ENV",
    "CSV_HEADER",
]

THREADS_ENV = "BAGBOUND_THREADS"
CSV_HEADER = ["problem", "method", "n", "k", "coverage", "mean", "std",
              "reps", "truth", "truth_tag", "seed"]

MODES = ("lower", "gap-bc", "gap-crn")
METHODS = ("bagging-u", "bagging-v", "batching", "single")


def default_threads() -> int:
    env = os.environ.get(THREADS_ENV)
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


@dataclass(frozen=True)
class ExperimentConfig:
    problem: str
    mode: str = "lower"
    method: str = "bagging-u"
    n: int = 50
    n1: Optional[int] = None  # gap modes only
    n2: Optional[int] = None
    k: tuple = (10,)
    B: object = "auto"  # "auto" -> 5 * n * k
    alpha: float = 0.05
    replications: int = 500
    seed: int = 0
    output: Optional[str] = None
    format: str = "csv"
    threads: Optional[int] = None

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}")
        if self.method not in METHODS:
            raise ValueError(f"method must be one of {METHODS}")
        if self.format not in ("csv", "json"):
            raise ValueError("format must be csv or json")
        if not 0.0 < self.alpha < 1.0:
            raise ValueError("alpha must lie in (0, 1)")
        if self.replications < 1:
            raise ValueError("replications must be >= 1")
        ks = tuple(int(v) for v in (self.k if hasattr(self.k, "__iter__") else (self.k,)))
        if self.method == "single":
            ks = ks or (0,)
        if any(v < 1 for v in ks) and self.method != "single":
            raise ValueError("k entries must be positive")
        object.__setattr__(self, "k", ks)
        if self.mode.startswith("gap"):
            if self.n1 is None or self.n2 is None:
                raise ValueError("gap modes need n1 and n2")
            if self.n1 < 1 or self.n2 < 2:
                raise ValueError("need n1 >= 1 and n2 >= 2")
            object.__setattr__(self, "n", int(self.n1) + int(self.n2))
        if self.n < 2:
            raise ValueError("need n >= 2")
        if self.B != "auto":
            b = int(self.B)
            if b < 2:
                raise ValueError("B must be >= 2 (or 'auto')")
            object.__setattr__(self, "B", b)

    @classmethod
    def from_dict(cls, payload: dict) -> "ExperimentConfig":
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(payload) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        return cls(**payload)


@dataclass(frozen=True)
class ExperimentRow:
    problem: str
    method: str
    n: int
    k: int
    coverage: float
    mean: float
    std: float
    reps: int
    truth: float
    truth_tag: str
    seed: int
    mode: str = "lower"
    b: Optional[int] = None  # resolved resample count, bagging only
    std_degenerate: bool = False  # single replication: std reported as 0


def _make_method(name: str, k: int, b):
    if name == "bagging-u":
        return BaggingMethod(k=k, B=None if b == "auto" else int(b),
                             scheme=ResampleScheme.WITHOUT_REPLACEMENT)
    if name == "bagging-v":
        return BaggingMethod(k=k, B=None if b == "auto" else int(b),
                             scheme=ResampleScheme.WITH_REPLACEMENT)
    if name == "batching":
        return BatchingMethod(k=k)
    return SingleReplicationMethod()


def _truth_tag(program) -> str:
    if program.key == "portfolio":
        return "derived"
    return "paper"


def _run_lower(config: ExperimentConfig, program) -> list[ExperimentRow]:
    truth = program.true_optimum
    if truth is None:
        raise ValueError(f"no ground truth available for {config.problem}")
    ks = config.k if config.method != "single" else (config.n,)

    def one_rep(r: int):
        try:
            stream = RngStream(config.seed, (r,))
            data = Dataset(program.sample(stream.substream(0), config.n))
            out = []
            for pos, k in enumerate(ks):
                method = _make_method(config.method, k, config.B)
                rep = compute_lower_bound(data, program, method, config.alpha,
                                          rng=stream.substream(1, pos))
                out.append((rep.bound, rep.params.get("B")))
            return out
        except Exception as exc:
            raise RuntimeError(f"replication {r}: {exc}") from exc

    per_rep = _pool_map(one_rep, config)
    rows = []
    for pos, k in enumerate(ks):
        bounds = np.array([per_rep[r][pos][0] for r in range(config.replications)])
        resolved_b = per_rep[0][pos][1]
        rows.append(_summarize(config, k, bounds,
                               covered=bounds <= truth, truth=truth,
                               truth_tag=_truth_tag(program), b=resolved_b))
    return rows


def _run_gap(config: ExperimentConfig, program) -> list[ExperimentRow]:
    if program.true_optimum is None:
        raise ValueError(f"no ground truth available for {config.problem}")
    compute = gap_bound_bc if config.mode == "gap-bc" else gap_bound_crn
    ks = config.k if config.method != "single" else (config.n2,)

    def one_rep(r: int):
        try:
            stream = RngStream(config.seed, (r,))
            setup = make_gap_setup(program, config.n1, config.n2,
                                   stream.substream(0), config.alpha)
            true_gap = program.true_value(setup.x_hat) - program.true_optimum
            out = []
            for pos, k in enumerate(ks):
                method = _make_method(config.method, k, config.B)
                gb = compute(setup, program, method, rng=stream.substream(1, pos))
                lower = gb.lower_component
                out.append((gb.bound, true_gap,
                            lower.params.get("B") if lower else None))
            return out
        except Exception as exc:
            raise RuntimeError(f"replication {r}: {exc}") from exc

    per_rep = _pool_map(one_rep, config)
    rows = []
    for pos, k in enumerate(ks):
        bounds = np.array([per_rep[r][pos][0] for r in range(config.replications)])
        gaps = np.array([per_rep[r][pos][1] for r in range(config.replications)])
        resolved_b = per_rep[0][pos][2]
        rows.append(_summarize(config, k, bounds,
                               covered=bounds >= gaps, truth=float(np.mean(gaps)),
                               truth_tag="per-replication closed form (mean shown)",
                               b=resolved_b))
    return rows


def _pool_map(fn, config: ExperimentConfig) -> list:
    threads = config.threads if config.threads else default_threads()
    reps = config.replications
    if threads <= 1:
        return [fn(r) for r in range(reps)]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, range(reps)))


def _summarize(config: ExperimentConfig, k: int, bounds: np.ndarray,
               covered: np.ndarray, truth: float, truth_tag: str,
               b: Optional[int]) -> ExperimentRow:
    reps = config.replications
    degenerate = reps == 1
    if degenerate:
        std = 0.0
        warnings.warn("std of the bound is undefined with one replication; "
                      "reporting 0 and flagging the row", stacklevel=2)
    else:
        std = float(np.std(bounds, ddof=1))
    return ExperimentRow(
        problem=config.problem,
        method=config.method,
        n=config.n,
        k=int(k),
        coverage=float(np.count_nonzero(covered)) / reps,
        mean=float(np.mean(bounds)),
        std=std,
        reps=reps,
        truth=truth,
        truth_tag=truth_tag,
        seed=config.seed,
        mode=config.mode,
        b=b,
        std_degenerate=degenerate,
    )


def run_experiment(config: ExperimentConfig) -> list[ExperimentRow]:
    program = get_program(config.problem)
    if config.mode == "lower":
        return _run_lower(config, program)
    return _run_gap(config, program)


def rows_to_csv(rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for row in rows:
        writer.writerow([
            row.problem, row.method, row.n, row.k, repr(row.coverage),
            repr(row.mean), repr(row.std), row.reps, repr(row.truth),
            row.truth_tag, row.seed,
        ])
    return buf.getvalue()


def rows_to_json(rows) -> str:
    return json.dumps([asdict(row) for row in rows], indent=2) + "\n"


def emit(rows, fmt: str, path: str) -> None:
    """Write rows as CSV (fixed column order) or a JSON array."""
    if fmt == "csv":
        text = rows_to_csv(rows)
    elif fmt == "json":
        text = rows_to_json(rows)
    else:
        raise ValueError("format must be csv or json")
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)
