"""Shipped problem constants (means, covariances, ground truths).

The covariance matrices are versioned constants generated once from the
documented seeds recorded alongside them (see
``scripts/derive_problem_constants.py``); loading from the JSON file keeps
every installation on identical benchmark problems.
"""

from __future__ import annotations

import json
from importlib import resources

import numpy as np


def _load() -> dict:
    with resources.files("bagbound.data").joinpath("problem_constants.json").open() as fh:
        return json.load(fh)


_RAW = _load()

CVAR_ALPHA1 = float(_RAW["cvar"]["alpha1"])
CVAR_TRUE_OPTIMUM = float(_RAW["cvar"]["true_optimum"])

PORTFOLIO_MU = np.asarray(_RAW["portfolio"]["mu"], dtype=np.float64)
PORTFOLIO_SIGMA = np.asarray(_RAW["portfolio"]["sigma"], dtype=np.float64)
PORTFOLIO_SIGMA_SEED = int(_RAW["portfolio"]["sigma_seed"])
PORTFOLIO_ALPHA2 = float(_RAW["portfolio"]["alpha2"])
PORTFOLIO_B = float(_RAW["portfolio"]["b"])
PORTFOLIO_TRUE_OPTIMUM = float(_RAW["portfolio"]["true_optimum"])
PORTFOLIO_TRUE_SOLUTION = np.asarray(_RAW["portfolio"]["true_solution"], dtype=np.float64)
PORTFOLIO_TRUTH_STDERR = float(_RAW["portfolio"]["truth_mc_check_stderr"])

IP_MU = np.asarray(_RAW["ip"]["mu"], dtype=np.float64)
IP_SIGMA = np.asarray(_RAW["ip"]["sigma"], dtype=np.float64)
IP_SIGMA_SEED = int(_RAW["ip"]["sigma_seed"])
IP_SIGMA_SCALE = float(_RAW["ip"]["sigma_scale"])
IP_A = np.asarray(_RAW["ip"]["a"], dtype=np.float64)
IP_B = np.asarray(_RAW["ip"]["b"], dtype=np.float64)
IP_TRUE_OPTIMUM = float(_RAW["ip"]["true_optimum"])
IP_TRUE_SOLUTION = np.asarray(_RAW["ip"]["true_solution"], dtype=np.float64)

TOYLP_TRUE_OPTIMUM = float(_RAW["toylp"]["true_optimum"])
TOYLP_TRUE_SOLUTION = float(_RAW["toylp"]["true_solution"])


def seeded_sigma(seed: int, d: int, scale: float = 1.0) -> np.ndarray:
    """Regenerate a shipped covariance from its seed (used to verify)."""
    g = np.random.Generator(np.random.Philox(np.random.SeedSequence(seed)))
    G = g.standard_normal((d, d))
    return scale * (G @ G.T / d + 0.1 * np.eye(d))
