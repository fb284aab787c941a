import math
import warnings

import numpy as np
import pytest

from bagbound.bounds import (
    BoundComputationError,
    ResampleScheme,
    _BLOCK,
    _index_block,
    bag_bound,
    batching_bound,
    resample_counts,
    single_replication_bound,
)
from bagbound.core import Dataset, RngStream
from bagbound.oracle import complete_u_statistic, complete_v_statistic
from bagbound.programs import SaaSolution, cvar1d, toy_lp

U = ResampleScheme.WITHOUT_REPLACEMENT
V = ResampleScheme.WITH_REPLACEMENT


def _quiet_bag(*args, **kwargs):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return bag_bound(*args, **kwargs)


def test_resample_counts_trivial_cases():
    idx, counts = resample_counts(RngStream(1), n=1, k=5, scheme=V)
    assert np.array_equal(counts, [5]) and len(idx) == 5
    idx, counts = resample_counts(RngStream(1), n=5, k=5, scheme=U)
    assert np.array_equal(counts, np.ones(5))
    with pytest.raises(ValueError):
        resample_counts(RngStream(1), n=4, k=5, scheme=U)


def test_resample_counts_sum_and_support():
    g = RngStream(2).generator()
    for scheme in (U, V):
        for _ in range(200):
            n = int(g.integers(2, 12))
            k = int(g.integers(1, n + 1))
            _, counts = resample_counts(RngStream(int(g.integers(1 << 30))), n, k, scheme)
            assert counts.sum() == k
            if scheme is U:
                assert counts.max() <= 1


def test_resample_uniformity():
    from scipy.stats import chi2

    n, k, draws = 10, 3, 10**5
    crit = chi2.ppf(0.999, n - 1)
    for scheme in (U, V):
        gen = RngStream(3, (scheme is U,)).generator()
        idx = _index_block(gen, draws, n, k, scheme)
        freq = np.bincount(idx.ravel(), minlength=n) / draws
        sd = math.sqrt((k / n) * (1 - k / n) / draws)
        assert np.all(np.abs(freq - k / n) < 3 * sd + 1e-12)
        stat = draws * n / k * np.sum((freq - k / n) ** 2) / (1 - k / n)
        assert stat < crit


def test_bag_bound_constant_data():
    p = cvar1d()
    out = _quiet_bag(Dataset(np.full((8, 1), 1.5)), p, k=3, B=200, alpha=0.05,
                     scheme=U, rng=RngStream(4))
    assert out.z_bag == pytest.approx(1.5, abs=1e-12)
    assert out.sigma_ij == pytest.approx(0.0, abs=1e-9)
    assert out.lower_bound == pytest.approx(1.5, abs=1e-8)
    assert out.per_datum_cov.shape == (8,)


def test_bag_bound_matches_complete_u_statistic():
    p = cvar1d()
    data = Dataset(RngStream(5, (0,)).generator().standard_normal((8, 1)))
    exact = complete_u_statistic(data, 3, p).value
    B = 50_000
    out = _quiet_bag(data, p, k=3, B=B, alpha=0.05, scheme=U, rng=RngStream(5, (1,)))
    assert abs(out.z_bag - exact) <= 3.0 * out.resample_std / math.sqrt(B)


def test_bag_bound_matches_complete_v_statistic():
    p = toy_lp()
    data = Dataset(RngStream(6, (0,)).generator().standard_normal((5, 1)))
    exact = complete_v_statistic(data, 3, p).value
    B = 50_000
    out = _quiet_bag(data, p, k=3, B=B, alpha=0.05, scheme=V, rng=RngStream(6, (1,)))
    assert abs(out.z_bag - exact) <= 3.0 * out.resample_std / math.sqrt(B)


def test_bag_bound_streaming_covariance_matches_two_pass():
    p = cvar1d()
    n, k, B = 12, 4, 2000
    data = Dataset(RngStream(7, (0,)).generator().standard_normal((n, 1)))
    for scheme in (U, V):
        rng = RngStream(7, (1, scheme is U))
        out = _quiet_bag(data, p, k=k, B=B, alpha=0.05, scheme=scheme, rng=rng)
        # regenerate identical resamples and evaluate the covariance the
        # direct way: mean over b of (N_i - k/n)(z_b - z_bag)
        gen = rng.generator()
        counts = np.zeros((B, n))
        zs = np.zeros(B)
        done = 0
        while done < B:
            rows = min(_BLOCK, B - done)
            idx = _index_block(gen, rows, n, k, scheme)
            zs[done:done + rows] = p.saa_values(data.observations, idx)
            for r in range(rows):
                counts[done + r] = np.bincount(idx[r], minlength=n)
            done += rows
        z_bag = zs.mean()
        cov = ((counts - k / n) * (zs - z_bag)[:, None]).mean(axis=0)
        assert z_bag == pytest.approx(out.z_bag, rel=1e-12, abs=1e-14)
        scale = max(np.max(np.abs(cov)), 1e-30)
        assert np.max(np.abs(cov - out.per_datum_cov)) / scale < 1e-10


def test_bag_bound_correction_factor():
    # identical resampling randomness, so the only difference between the
    # schemes' variance assembly is the (n/(n-k))^2 factor applied to the
    # same covariance vector
    p = cvar1d()
    n, k = 10, 4
    data = Dataset(RngStream(8, (0,)).generator().standard_normal((n, 1)))
    out = _quiet_bag(data, p, k=k, B=3000, alpha=0.05, scheme=U, rng=RngStream(8, (1,)))
    raw = float(np.dot(out.per_datum_cov, out.per_datum_cov))
    assert out.sigma_ij == pytest.approx(math.sqrt((n / (n - k)) ** 2 * raw), rel=1e-12)
    assert out.lower_bound == pytest.approx(out.z_bag - 1.6448536269514727 * out.sigma_ij,
                                            rel=1e-12)


def test_bag_bound_validation_and_warning():
    p = cvar1d()
    data = Dataset(np.arange(6.0))
    with pytest.raises(ValueError):
        bag_bound(data, p, k=6, B=100, alpha=0.05, scheme=U, rng=RngStream(9))
    with pytest.raises(ValueError):
        bag_bound(data, p, k=2, B=1, alpha=0.05, scheme=U, rng=RngStream(9))
    with pytest.warns(UserWarning, match="5\\*n\\*k"):
        bag_bound(data, p, k=2, B=10, alpha=0.05, scheme=U, rng=RngStream(9))
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        bag_bound(data, p, k=2, B=5 * 6 * 2, alpha=0.05, scheme=U, rng=RngStream(9))


class _FailingProgram:
    """Cost-free stub whose batch solver fails on one resample."""

    def __init__(self, fail_at):
        self.fail_at = fail_at

    def saa_values(self, data, idx):
        out = np.zeros(idx.shape[0])
        lo = self.fail_at[0]
        if 0 <= lo < idx.shape[0]:
            out[lo] = np.nan
            self.fail_at[0] = -1
        else:
            self.fail_at[0] -= idx.shape[0]
        return out


def test_bag_bound_failure_carries_resample_index():
    data = Dataset(np.arange(6.0))
    prog = _FailingProgram([4500])  # lands in the second block
    with pytest.raises(BoundComputationError, match="4500"):
        _quiet_bag(data, prog, k=2, B=6000, alpha=0.05, scheme=V, rng=RngStream(10))


def test_batching_engineered_two_batches():
    # batch SAA values {0, 2}: point 1, stderr 1, t quantile with df=1
    p = cvar1d(0.5)
    data = Dataset(np.array([0.0, 0.0, 2.0, 2.0]))
    rep = batching_bound(data, p, k=2, alpha=0.05)
    assert rep.point == pytest.approx(1.0, abs=1e-12)
    assert rep.stderr == pytest.approx(1.0, abs=1e-12)
    assert rep.quantile == pytest.approx(math.tan(math.pi * 0.45), abs=1e-6)
    assert rep.bound == pytest.approx(1.0 - math.tan(math.pi * 0.45), abs=1e-6)


def test_batching_constant_batches_and_remainder():
    p = cvar1d(0.5)
    rep = batching_bound(Dataset(np.full(7, 3.0)), p, k=2, alpha=0.05)
    assert rep.bound == pytest.approx(3.0, abs=1e-12)  # zero variance
    assert rep.params["m"] == 3  # the 7th observation is unused
    with pytest.raises(ValueError, match="two batches"):
        batching_bound(Dataset(np.arange(5.0)), p, k=3, alpha=0.05)


def test_batching_quantile_switches_to_normal():
    p = toy_lp()
    data = Dataset(RngStream(11, (0,)).generator().standard_normal((60, 1)))
    rep = batching_bound(data, p, k=2, alpha=0.05)  # m = 30
    assert rep.quantile == pytest.approx(1.6448536269514727, abs=1e-9)
    rep29 = batching_bound(data, p, k=3, alpha=0.05)  # m = 20
    from bagbound.core import t_quantile

    assert rep29.quantile == pytest.approx(t_quantile(0.95, 19), abs=1e-12)


class _ConstantProgram:
    """h(x, xi) = c for every decision and scenario."""

    def __init__(self, c):
        self.c = c

    def solve_saa(self, obs):
        return SaaSolution(value=self.c, solution=0.0)

    def cost_many(self, x, obs):
        return np.full(np.asarray(obs).shape[0], self.c)


def test_single_replication_constant_cost():
    rep = single_replication_bound(Dataset(np.arange(10.0)), _ConstantProgram(2.5), 0.05)
    assert rep.bound == pytest.approx(2.5, abs=1e-12)
    assert rep.stderr == 0.0


def test_single_replication_gap_degenerate_at_argmin():
    p = cvar1d()
    data = Dataset(RngStream(12, (0,)).generator().standard_normal((30, 1)))
    sol = p.solve_saa(data.observations)
    rep = single_replication_bound(data, p, 0.05, x_hat=sol.solution)
    assert rep.kind == "upper"
    assert rep.bound == pytest.approx(0.0, abs=1e-12)
    assert rep.stderr == pytest.approx(0.0, abs=1e-12)


def test_single_replication_gap_mode_formula():
    p = cvar1d()
    g = RngStream(13, (0,)).generator()
    data = Dataset(g.standard_normal((25, 1)))
    x_hat = 0.7
    rep = single_replication_bound(data, p, 0.05, x_hat=x_hat)
    sol = p.solve_saa(data.observations)
    diff = p.cost_many(x_hat, data.observations) - p.cost_many(sol.solution, data.observations)
    sigma = math.sqrt(np.var(diff, ddof=1) / 25)
    point = float(np.mean(p.cost_many(x_hat, data.observations))) - sol.value
    assert rep.point == pytest.approx(point, rel=1e-12)
    assert rep.bound == pytest.approx(point + 1.6448536269514727 * sigma, rel=1e-12)
