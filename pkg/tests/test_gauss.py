import math

import numpy as np
import pytest

from fracbridge.exceptions import DomainError, GridError
from fracbridge.gauss import (
    BVFunction,
    ComplexPath,
    SeedSpec,
    TimeGrid,
    covariance_matrix,
    fbm_covariance,
    inner_product_highH,
    inner_product_lowH,
    sample_complex_fbm,
    sample_fbm_cholesky,
    sample_fbm_circulant,
)
from fracbridge.limitlaw import ks_two_sample


# ---------------------------------------------------------------------------
# Grid and covariance basics
# ---------------------------------------------------------------------------


def test_grid_validation():
    with pytest.raises(GridError):
        TimeGrid(np.array([0.1, 0.2]))
    with pytest.raises(GridError):
        TimeGrid(np.array([0.0, 0.2, 0.2]))
    g = TimeGrid.uniform(1.0, 4)
    assert g.is_uniform and g.n_steps == 4 and g.h == 0.25


def test_covariance_diagonal_is_power():
    for H in (0.3, 0.5, 0.75):
        for t in (0.2, 1.0, 2.5):
            assert abs(fbm_covariance(H, t, t) - t ** (2 * H)) < 1e-14 * t ** (2 * H)


def test_covariance_brownian_case():
    assert abs(fbm_covariance(0.5, 1.0, 2.0) - 1.0) < 1e-14


def test_covariance_direct_value():
    want = 0.5 * (2.0**1.5 + 1.0 - 1.0)
    assert abs(fbm_covariance(0.75, 2.0, 1.0) - want) < 1e-14


def test_covariance_domain_error():
    with pytest.raises(DomainError):
        fbm_covariance(1.5, 1.0, 1.0)


def test_covariance_matrices_numerically_psd():
    rng = np.random.default_rng(5)
    for _ in range(10):
        H = rng.uniform(0.05, 0.95)
        n = rng.integers(4, 64)
        times = np.sort(rng.uniform(0.01, 2.0, size=n))
        C = covariance_matrix(H, times)
        assert np.linalg.eigvalsh(C).min() >= -1e-8


# ---------------------------------------------------------------------------
# Samplers
# ---------------------------------------------------------------------------


def test_cholesky_single_point_grid():
    path = sample_fbm_cholesky(0.7, TimeGrid(np.array([0.0])), SeedSpec(1))
    assert path.values.shape == (1,) and path.values[0] == 0.0


def test_cholesky_empirical_covariance():
    H = 0.7
    grid = TimeGrid(np.linspace(0.0, 1.0, 9))
    draws = np.stack(
        [sample_fbm_cholesky(H, grid, SeedSpec(42, k)).values for k in range(50_000)]
    )
    emp = draws.T @ draws / draws.shape[0]
    want = covariance_matrix(H, grid.times)
    # entrywise 4-SE gate (36 comparisons; Gaussian 4th-moment variance)
    for i in range(1, 9):
        for j in range(i, 9):
            se = math.sqrt((want[i, i] * want[j, j] + want[i, j] ** 2) / draws.shape[0])
            assert abs(emp[i, j] - want[i, j]) <= 4 * se


def test_circulant_requires_uniform_grid():
    with pytest.raises(GridError):
        sample_fbm_circulant(0.7, TimeGrid(np.array([0.0, 0.1, 0.5])), SeedSpec(0))


def test_circulant_brownian_increments():
    grid = TimeGrid.uniform(1.0, 512)
    incr = np.concatenate(
        [np.diff(sample_fbm_circulant(0.5, grid, SeedSpec(7, k)).values) for k in range(100)]
    )
    n = incr.size
    var = float(np.mean(incr**2))
    se = math.sqrt(2.0 / n) * grid.h  # chi-square variance of the variance
    assert abs(var - grid.h) <= 3 * se


def test_circulant_seed_determinism():
    grid = TimeGrid.uniform(1.0, 128)
    a = sample_fbm_circulant(0.7, grid, SeedSpec(123, 4)).values
    b = sample_fbm_circulant(0.7, grid, SeedSpec(123, 4)).values
    assert np.array_equal(a, b)
    c = sample_fbm_circulant(0.7, grid, SeedSpec(123, 5)).values
    assert not np.array_equal(a, c)


@pytest.mark.parametrize("H", [0.3, 0.7])
def test_circulant_vs_cholesky_marginal(H):
    grid = TimeGrid.uniform(1.0, 64)
    n_draws = 20_000
    ends_circ = np.array(
        [sample_fbm_circulant(H, grid, SeedSpec(31, k)).values[-1] for k in range(n_draws)]
    )
    ends_chol = np.array(
        [sample_fbm_cholesky(H, grid, SeedSpec(77, k)).values[-1] for k in range(n_draws)]
    )
    assert ks_two_sample(ends_circ, ends_chol) <= 0.02


def test_complex_fbm_moments():
    H = 0.65
    grid = TimeGrid.uniform(1.0, 256)
    n_draws = 20_000
    ends = np.array([sample_complex_fbm(H, grid, SeedSpec(9, k)).values[-1] for k in range(n_draws)])
    # E|zeta_t|^2 = t^(2H): |zeta|^2 is exponential with mean 1, sd 1
    m2 = float(np.mean(np.abs(ends) ** 2))
    se2 = float(np.std(np.abs(ends) ** 2)) / math.sqrt(n_draws)
    assert abs(m2 - 1.0) <= 3 * se2
    # E[zeta_t^2] = 0 (circular symmetry)
    pseudo = np.mean(ends**2)
    se_p = float(np.std(ends**2 .real)) / math.sqrt(n_draws)
    assert abs(pseudo.real) <= 3 * se_p and abs(pseudo.imag) <= 3 * se_p


def test_complex_fbm_starts_at_zero():
    path = sample_complex_fbm(0.7, TimeGrid(np.array([0.0])), SeedSpec(3))
    assert path.values[0] == 0


def test_complex_fbm_nonuniform_grid_falls_back():
    grid = TimeGrid(np.array([0.0, 0.1, 0.15, 0.6, 0.9]))
    path = sample_complex_fbm(0.7, grid, SeedSpec(3))
    assert path.values.shape == (5,) and path.values[0] == 0


# ---------------------------------------------------------------------------
# Inner products
# ---------------------------------------------------------------------------


def indicator(u):
    return lambda t: (np.asarray(t) <= u).astype(float)


def test_highH_indicator_diagonal():
    for H in (0.6, 0.75):
        for t in (0.3, 0.7):
            got = inner_product_highH(indicator(t), indicator(t), H, 1.0, n=256, breakpoints=(t,))
            assert abs(got - t ** (2 * H)) <= 1e-10


def test_highH_indicator_cross_matches_covariance():
    for H in (0.6, 0.75):
        for s in (0.2, 0.45, 0.8):
            for t in (0.3, 0.65, 0.95):
                got = inner_product_highH(indicator(s), indicator(t), H, 1.0, n=256, breakpoints=(s, t))
                want = fbm_covariance(H, s, t)
                assert abs(got - want) <= 1e-4 * abs(want)


def test_highH_isometry_against_monte_carlo(batch_paths):
    # Var(int f dB) = <f, f> for f(u) = (T-u)^(-0.3) on [0, 0.9T], H = 0.7
    H, T, t_max, n = 0.7, 1.0, 0.9, 1024
    f = lambda u: (T - np.asarray(u)) ** (-0.3)
    f_cut = lambda u: (T - np.asarray(u)) ** (-0.3) * (np.asarray(u) <= t_max)
    want = inner_product_highH(f_cut, f_cut, H, T, n=2048, breakpoints=(t_max,))
    times = np.linspace(0.0, t_max, n + 1)
    incr = batch_paths(H, n, times[1], seed=21, nreps=20_000)
    real_incr = math.sqrt(2.0) * incr.real  # real fGn rows
    w = np.sum(f(times[:-1]) * real_incr, axis=1)
    est = float(np.mean(w**2))
    se = float(np.std(w**2)) / math.sqrt(len(w))
    assert abs(est - want) <= 3 * se


def test_lowH_indicator_diagonal():
    H = 0.4
    for t in (0.3, 0.7):
        got = inner_product_lowH(indicator(t), BVFunction.indicator(t), H, 1.0, n=256, breakpoints=(t,))
        assert abs(got - t ** (2 * H)) <= 1e-10


def test_lowH_indicator_cross_matches_covariance():
    H = 0.4
    for s in (0.2, 0.45, 0.8):
        for t in (0.3, 0.65, 0.95):
            got = inner_product_lowH(indicator(s), BVFunction.indicator(t), H, 1.0, n=256, breakpoints=(s,))
            want = fbm_covariance(H, s, t)
            assert abs(got - want) <= 1e-4 * abs(want)


def test_lowH_smooth_function_against_step_isometry():
    # independent oracle: for step approximations f_n of smooth f, the inner
    # product equals the covariance of increments, computable from R_H alone
    H, T = 0.4, 1.0
    g = lambda u: 1.0 + np.asarray(u) ** 2
    dg = lambda u: 2.0 * np.asarray(u)
    got = inner_product_lowH(g, BVFunction.from_smooth(g, dg, T), H, T, n=2048)

    edges = np.linspace(0.0, T, 2049)
    mid = 0.5 * (edges[1:] + edges[:-1])
    fv = g(mid)
    K = np.abs(edges[:, None] - edges[None, :]) ** (2 * H)
    M = -0.5 * (K[1:, 1:] - K[1:, :-1] - K[:-1, 1:] + K[:-1, :-1])
    oracle = float(fv @ M @ fv)
    assert abs(got - oracle) <= 2e-3 * abs(oracle)


def test_lowH_isometry_against_monte_carlo(batch_paths):
    H, T, n = 0.4, 1.0, 2048
    g = lambda u: 1.0 + np.asarray(u) ** 2
    dg = lambda u: 2.0 * np.asarray(u)
    want = inner_product_lowH(g, BVFunction.from_smooth(g, dg, T), H, T, n=2048)
    times = np.linspace(0.0, T, n + 1)
    incr = batch_paths(H, n, times[1], seed=22, nreps=20_000)
    real_incr = math.sqrt(2.0) * incr.real
    w = np.sum(g(times[:-1]) * real_incr, axis=1)
    est = float(np.mean(w**2))
    se = float(np.std(w**2)) / math.sqrt(len(w))
    assert abs(est - want) <= 3 * se


def test_inner_product_domain_errors():
    with pytest.raises(DomainError):
        inner_product_highH(indicator(0.5), indicator(0.5), 0.4, 1.0)
    with pytest.raises(DomainError):
        inner_product_lowH(indicator(0.5), BVFunction.indicator(0.5), 0.7, 1.0)
