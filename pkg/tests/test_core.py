import numpy as np
import pytest

from bagbound.core import (
    Dataset,
    RngStream,
    cholesky,
    mean_var,
    mvn_sample,
    normal_quantile,
    t_quantile,
)

# High-precision reference values computed with mpmath (30 digits) ahead
# of the implementation: z = sqrt(2) * erfinv(2p - 1).
Z_REF = {
    0.95: 1.6448536269514727,
    0.975: 1.9599639845400542,
    0.9: 1.2815515655446005,
    0.025: -1.9599639845400542,
}
# Closed forms: df=1 is tan(pi*(p-1/2)); df=2 is 2(p-1/2)*sqrt(2/(4p(1-p))).
T_REF = {
    (0.975, 1): 12.706204736174705,
    (0.95, 2): 2.9199855803537257,
}


def test_mean_var_symmetric_three_point():
    s = mean_var([1.0, 2.0, 3.0])
    assert s.mean == pytest.approx(2.0, abs=1e-15)
    assert s.variance == pytest.approx(1.0, abs=1e-15)
    assert s.count == 3


def test_mean_var_constant_sample():
    s = mean_var([4.2] * 4)
    assert s.mean == pytest.approx(4.2)
    assert s.variance == 0.0


def test_mean_var_large_normal_sample():
    g = RngStream(123, (0,)).generator()
    v = g.standard_normal(10**6)
    s = mean_var(v)
    assert abs(s.mean) < 4.0 / 1000.0
    assert abs(s.variance - 1.0) < 0.01


def test_mean_var_errors():
    with pytest.raises(ValueError, match="empty sample"):
        mean_var([])
    with pytest.raises(ValueError, match=">=2"):
        mean_var([1.0])


def test_mean_var_permutation_invariant():
    g = RngStream(7).generator()
    v = g.standard_normal(257) * 3.0 + 1.0
    s1 = mean_var(v)
    s2 = mean_var(v[g.permutation(257)])
    assert s1.mean == pytest.approx(s2.mean, rel=1e-12)
    assert s1.variance == pytest.approx(s2.variance, rel=1e-12)


def test_normal_quantile_reference_values():
    assert normal_quantile(0.5) == pytest.approx(0.0, abs=1e-12)
    for p, z in Z_REF.items():
        assert normal_quantile(p) == pytest.approx(z, abs=1e-9)


def test_normal_quantile_symmetry_and_monotone():
    ps = np.linspace(1e-6, 1 - 1e-6, 4001)
    zs = np.array([normal_quantile(p) for p in ps])
    assert np.all(np.diff(zs) > 0)
    for p in (1e-5, 0.01, 0.3, 0.77, 0.999):
        assert normal_quantile(1 - p) == pytest.approx(-normal_quantile(p), abs=1e-9)


def test_normal_quantile_accuracy_against_scipy():
    from scipy.special import ndtri

    ps = np.linspace(1e-9, 1 - 1e-9, 20011)
    err = max(abs(normal_quantile(p) - ndtri(p)) for p in ps)
    assert err < 1e-9


def test_normal_quantile_domain():
    for p in (0.0, 1.0, -0.1, 1.1):
        with pytest.raises(ValueError):
            normal_quantile(p)


def test_t_quantile_reference_values():
    for df in (1, 3, 50):
        assert t_quantile(0.5, df) == pytest.approx(0.0, abs=1e-12)
    for (p, df), t in T_REF.items():
        assert t_quantile(p, df) == pytest.approx(t, abs=1e-6)
    assert t_quantile(0.95, 10**6) == pytest.approx(normal_quantile(0.95), abs=1e-4)


def test_t_quantile_against_quadrature():
    # independent route: integrate the t density and invert by bisection
    from scipy.integrate import quad

    def t_cdf(x, df):
        from math import gamma, pi, sqrt

        c = gamma((df + 1) / 2) / (sqrt(df * pi) * gamma(df / 2))
        pdf = lambda u: c * (1 + u * u / df) ** (-(df + 1) / 2)
        return 0.5 + quad(pdf, 0, x, limit=200)[0] if x >= 0 else 1 - t_cdf(-x, df)

    for p, df in ((0.9, 4), (0.975, 7), (0.8, 29)):
        q = t_quantile(p, df)
        assert t_cdf(q, df) == pytest.approx(p, abs=1e-9)


def test_t_quantile_domain():
    with pytest.raises(ValueError):
        t_quantile(1.5, 3)
    with pytest.raises(ValueError):
        t_quantile(0.5, 0)


def test_cholesky_identity_and_hand_case():
    L = cholesky(np.eye(3))
    assert np.allclose(L, np.eye(3), atol=1e-14)
    L2 = cholesky([[4.0, 2.0], [2.0, 5.0]])
    assert np.allclose(L2, [[2.0, 0.0], [1.0, 2.0]], atol=1e-12)


def test_cholesky_reconstruction_random():
    g = RngStream(99).generator()
    for d in (2, 5, 9):
        A = g.standard_normal((d, d))
        S = A @ A.T + d * np.eye(d)
        L = cholesky(S)
        assert np.all(np.diag(L) > 0)
        assert np.allclose(np.triu(L, 1), 0.0)
        resid = np.max(np.abs(L @ L.T - S)) / np.max(np.abs(S))
        assert resid < 1e-10
        # agrees with the library factorization
        assert np.allclose(L, np.linalg.cholesky(S), rtol=1e-9, atol=1e-9)


def test_cholesky_roundtrip_on_lower_triangular():
    g = RngStream(100).generator()
    L = np.tril(g.standard_normal((4, 4)))
    np.fill_diagonal(L, np.abs(np.diag(L)) + 0.5)
    L2 = cholesky(L @ L.T)
    assert np.allclose(L2, L, rtol=1e-10, atol=1e-12)


def test_cholesky_rejects_bad_input():
    with pytest.raises(ValueError, match="not positive definite"):
        cholesky([[1.0, 2.0], [2.0, 1.0]])
    with pytest.raises(ValueError, match="not symmetric"):
        cholesky([[1.0, 0.5], [0.0, 1.0]])
    with pytest.raises(ValueError, match="not positive definite"):
        cholesky([[1.0, 1.0], [1.0, 1.0]])  # singular PSD


def test_mvn_sample_zero_matrix_and_determinism():
    rng = RngStream(5, (1, 2))
    mu = np.array([1.0, -2.0, 3.0])
    x = mvn_sample(rng, mu, np.zeros((3, 3)))
    assert np.array_equal(x, mu)
    L = np.eye(3)
    a = mvn_sample(rng, mu, L)
    b = mvn_sample(RngStream(5, (1, 2)), mu, L)
    assert np.array_equal(a, b)
    with pytest.raises(ValueError, match="dimension mismatch"):
        mvn_sample(rng, mu, np.eye(2))


def test_mvn_sample_empirical_covariance():
    g = RngStream(11, (3,)).generator()
    z = g.standard_normal((10**5, 3))
    cov = np.cov(z, rowvar=False)
    assert np.max(np.abs(cov - np.eye(3))) < 0.05


def test_rng_stream_determinism_and_independence():
    a = RngStream(42, (1, 7)).generator().standard_normal(8)
    b = RngStream(42, (1, 7)).generator().standard_normal(8)
    c = RngStream(42, (1, 8)).generator().standard_normal(8)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, c)
    sub = RngStream(42).substream(1, 7)
    assert np.array_equal(sub.generator().standard_normal(8), a)


def test_dataset_shape_and_immutability():
    ds = Dataset(np.arange(6.0).reshape(3, 2))
    assert ds.n == 3 and ds.d == 2 and len(ds) == 3
    with pytest.raises(ValueError):
        ds.observations[0, 0] = 5.0
    flat = Dataset([1.0, 2.0, 3.0])
    assert flat.observations.shape == (3, 1)
    with pytest.raises(ValueError):
        Dataset(np.zeros((0, 2)))
