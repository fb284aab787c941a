"""Command-line interface.

Subcommands:

* ``bound``      one lower bound on a freshly simulated dataset
* ``gap``        one optimality-gap upper bound (bc or crn assembly)
* ``experiment`` coverage experiment over many replications, with
                 optional ``--config FILE`` JSON (explicit flags win)
* ``dev-oracle`` reference estimators, for reproducing test quantities

Exit codes: 0 success, 1 runtime failure, 2 usage error.
"""

from __future__ import annotations

import argparse
import json
import sys

from .bounds import bag_bound, batching_bound, single_replication_bound
from .core import Dataset, RngStream
from .gap import gap_bound_bc, gap_bound_crn, make_gap_setup
from .harness import (
    METHODS,
    MODES,
    ExperimentConfig,
    default_threads,
    emit,
    run_experiment,
)
from .oracle import (
    complete_u_statistic,
    complete_v_statistic,
    estimate_gk_variance,
    estimate_wk,
    example1_program,
)
from .programs import PROGRAMS, get_program
from .harness import _make_method  # shared method-string parsing


def _add_common_bound_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--problem", required=True, choices=sorted(PROGRAMS))
    p.add_argument("--method", required=True, choices=METHODS)
    p.add_argument("--k", type=int, default=None, help="batch/resample size")
    p.add_argument("--B", default="auto",
                   help="resample count for bagging; 'auto' means 5*n*k")
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--seed", type=int, default=0)


def _build_parser() -> argparse.ArgumentParser:
    root = argparse.ArgumentParser(
        prog="bagbound",
        description="Confidence bounds for stochastic-optimization solution quality.",
    )
    sub = root.add_subparsers(dest="command", required=True)

    b = sub.add_parser("bound", help="one lower bound on a simulated dataset")
    _add_common_bound_flags(b)
    b.add_argument("--n", type=int, required=True)

    g = sub.add_parser("gap", help="one optimality-gap upper bound")
    _add_common_bound_flags(g)
    g.add_argument("--approach", required=True, choices=("bc", "crn"))
    g.add_argument("--n1", type=int, required=True)
    g.add_argument("--n2", type=int, required=True)

    e = sub.add_parser("experiment", help="coverage experiment")
    e.add_argument("--config", help="JSON config file; explicit flags override it")
    e.add_argument("--problem", choices=sorted(PROGRAMS))
    e.add_argument("--mode", choices=MODES)
    e.add_argument("--method", choices=METHODS)
    e.add_argument("--n", type=int)
    e.add_argument("--n1", type=int)
    e.add_argument("--n2", type=int)
    e.add_argument("--k", help="comma-separated list of sizes")
    e.add_argument("--B")
    e.add_argument("--alpha", type=float)
    e.add_argument("--replications", type=int)
    e.add_argument("--seed", type=int)
    e.add_argument("--output")
    e.add_argument("--format", choices=("csv", "json"))
    e.add_argument("--threads", type=int)

    o = sub.add_parser("dev-oracle", help="reference estimators")
    o.add_argument("--op", required=True,
                   choices=("complete-u", "complete-v", "wk", "gk-var"))
    o.add_argument("--problem", default="cvar",
                   choices=sorted(PROGRAMS) + ["example1"])
    o.add_argument("--dim", type=int, default=4, help="dimension for example1")
    o.add_argument("--n", type=int, default=8)
    o.add_argument("--k", type=int, required=True)
    o.add_argument("--reps", type=int, default=1000)
    o.add_argument("--outer", type=int, default=200)
    o.add_argument("--inner", type=int, default=200)
    o.add_argument("--seed", type=int, default=0)
    return root


def _cmd_bound(args) -> int:
    program = get_program(args.problem)
    stream = RngStream(args.seed)
    data = Dataset(program.sample(stream.substream(0), args.n))
    if args.method in ("bagging-u", "bagging-v"):
        if args.k is None:
            raise ValueError("--k is required for bagging")
        method = _make_method(args.method, args.k, args.B)
        out = bag_bound(data, program, args.k, method.resolve_b(args.n),
                        args.alpha, method.scheme, stream.substream(1))
        print(f"{args.method} {args.problem} n={args.n} k={args.k} B={out.B}: "
              f"point={out.z_bag:.6g} sigma_ij={out.sigma_ij:.6g} "
              f"lower_bound={out.lower_bound:.6g} (seed {args.seed})")
    elif args.method == "batching":
        if args.k is None:
            raise ValueError("--k is required for batching")
        rep = batching_bound(data, program, args.k, args.alpha)
        print(f"batching {args.problem} n={args.n} k={args.k} m={rep.params['m']}: "
              f"point={rep.point:.6g} stderr={rep.stderr:.6g} "
              f"lower_bound={rep.bound:.6g} (seed {args.seed})")
    else:
        rep = single_replication_bound(data, program, args.alpha)
        print(f"single {args.problem} n={args.n}: point={rep.point:.6g} "
              f"stderr={rep.stderr:.6g} lower_bound={rep.bound:.6g} "
              f"(seed {args.seed})")
    return 0


def _cmd_gap(args) -> int:
    program = get_program(args.problem)
    stream = RngStream(args.seed)
    setup = make_gap_setup(program, args.n1, args.n2, stream.substream(0), args.alpha)
    if args.method in ("bagging-u", "bagging-v", "batching"):
        if args.k is None:
            raise ValueError("--k is required for this method")
    method = _make_method(args.method, args.k or 0, args.B)
    compute = gap_bound_bc if args.approach == "bc" else gap_bound_crn
    gb = compute(setup, program, method, rng=stream.substream(1))
    print(f"gap-{args.approach} {args.problem} {args.method} n1={args.n1} "
          f"n2={args.n2} k={args.k}: upper_bound={gb.bound:.6g} (seed {args.seed})")
    return 0


def _cmd_experiment(args) -> int:
    payload = {}
    if args.config:
        with open(args.config, encoding="utf-8") as fh:
            payload.update(json.load(fh))
    runs = payload.pop("runs", None)
    for key in ("problem", "mode", "method", "n", "n1", "n2", "B", "alpha",
                "replications", "seed", "output", "format", "threads"):
        val = getattr(args, key, None)
        if val is not None:
            payload[key] = val
    if args.k is not None:
        payload["k"] = [int(v) for v in str(args.k).split(",") if v]

    # a config may carry a "runs" list of per-run overrides sharing the
    # top-level defaults (e.g. one table spanning several methods)
    variants = [payload] if runs is None else [{**payload, **run} for run in runs]
    rows = []
    out_path = payload.get("output")
    out_fmt = payload.get("format", "csv")
    for variant in variants:
        variant.pop("output", None)
        variant.pop("format", None)
        config = ExperimentConfig.from_dict(variant)
        rows.extend(run_experiment(config))
    for row in rows:
        print(f"{row.problem} {row.mode} {row.method} n={row.n} k={row.k} "
              f"reps={row.reps}: coverage={100 * row.coverage:.1f}% "
              f"mean={row.mean:.4g} std={row.std:.4g}")
    if out_path:
        emit(rows, out_fmt, out_path)
        print(f"wrote {out_path}")
    return 0


def _cmd_dev_oracle(args) -> int:
    if args.problem == "example1":
        program = example1_program(args.dim)
    else:
        program = get_program(args.problem)
    stream = RngStream(args.seed)
    if args.op in ("complete-u", "complete-v"):
        data = Dataset(program.sample(stream.substream(0), args.n))
        fn = complete_u_statistic if args.op == "complete-u" else complete_v_statistic
        est = fn(data, args.k, program)
    elif args.op == "wk":
        est = estimate_wk(program, args.k, args.reps, stream.substream(1))
    else:
        est = estimate_gk_variance(program, args.k, args.outer, args.inner,
                                   stream.substream(1))
    print(f"{args.op} {args.problem} k={args.k}: value={est.value:.8g} "
          f"mc_stderr={est.mc_stderr:.3g} evaluations={est.evaluations} "
          f"exact={est.exact}")
    return 0


def cli_main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        if args.command == "bound":
            return _cmd_bound(args)
        if args.command == "gap":
            return _cmd_gap(args)
        if args.command == "experiment":
            return _cmd_experiment(args)
        return _cmd_dev_oracle(args)
    except (ValueError, OSError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(cli_main())


if __name__ == "__main__":
    main()
