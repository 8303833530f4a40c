import math
import warnings

import numpy as np
import pytest

from fracbridge.bridge import bridge_euler, bridge_exact, omega_path, scaled_Y_path, simulate_bridge
from fracbridge.exceptions import DomainError, GridError
from fracbridge.gauss import ComplexPath, SeedSpec, TimeGrid, inner_product_highH, sample_complex_fbm
from fracbridge.special import ModelParams, Y_T_second_moment
from tests.conftest import omega_batch


def graded_increments(H, s_end, n, N, seed, coarse_to=None):
    """Complex fGn increments on a geometric remainder grid ending at T - s_end.

    Sampled exactly from the increment covariance (corner formula in the
    remainder variable, so no cancellation near T), correlation-normalized
    before factorization.  Returns (times, increments of shape (n, N)).
    """
    T = 1.0
    s = T * (s_end / T) ** (np.arange(n + 1) / n)

    def pow2h(d):
        return np.abs(d) ** (2 * H)

    D = s[None, :] - s[:, None]
    cov = -0.5 * (pow2h(D[1:, 1:]) - pow2h(D[1:, :-1]) - pow2h(D[:-1, 1:]) + pow2h(D[:-1, :-1]))
    sig = np.sqrt(np.diag(cov))
    L = np.linalg.cholesky(cov / np.outer(sig, sig) + 1e-12 * np.eye(n))
    rng = SeedSpec(seed).generator()
    z1 = sig[:, None] * (L @ rng.standard_normal((n, N)))
    z2 = sig[:, None] * (L @ rng.standard_normal((n, N)))
    return T - s, (z1 + 1j * z2) / math.sqrt(2.0)


# ---------------------------------------------------------------------------
# omega_path
# ---------------------------------------------------------------------------


def test_omega_unit_kernel_is_identity():
    # alpha -> 0 is outside ModelParams' domain, so apply the kernel directly
    grid = TimeGrid.uniform(0.9, 64)
    zeta = sample_complex_fbm(0.7, grid, SeedSpec(1))
    p = ModelParams(H=0.7, alpha=1e-300 + 0.0j)
    om = omega_path(zeta, p)
    assert np.allclose(om.values, zeta.values, atol=1e-12)


def test_omega_single_step():
    grid = TimeGrid(np.array([0.0, 0.4]))
    c = 0.7 - 0.3j
    zeta = ComplexPath(grid, np.array([0.0, c]))
    p = ModelParams(H=0.7, alpha=0.3 - 0.2j, T=1.0)
    om = omega_path(zeta, p)
    assert om.values[0] == 0
    assert abs(om.values[1] - 1.0 ** (-p.alpha) * c) < 1e-15


def test_omega_grid_must_stay_below_horizon():
    grid = TimeGrid.uniform(1.0, 8)
    zeta = ComplexPath(grid, np.zeros(9, dtype=complex))
    with pytest.raises(GridError):
        omega_path(zeta, ModelParams(H=0.7, alpha=0.3, T=1.0))


def test_omega_linearity_in_noise():
    grid = TimeGrid.uniform(0.9, 128)
    zeta = sample_complex_fbm(0.7, grid, SeedSpec(2))
    p = ModelParams(H=0.7, alpha=0.3 - 0.2j)
    c = 1.3 - 0.8j
    scaled = ComplexPath(grid, c * zeta.values)
    a = omega_path(scaled, p).values
    b = c * omega_path(zeta, p).values
    assert np.allclose(a, b, rtol=1e-12)


def test_omega_isometry_monte_carlo(batch_paths):
    # E|omega_t|^2 equals the Hilbert-space squared norm of the truncated
    # kernel, computed by quadrature on real and imaginary parts separately
    H, alpha, T, t_max, n = 0.7, 0.3 - 0.2j, 1.0, 0.9, 1024
    times = np.linspace(0.0, t_max, n + 1)
    incr = batch_paths(H, n, times[1], seed=23, nreps=20_000)
    om = omega_batch(incr, times, T, alpha)
    samples = np.abs(om[:, -1]) ** 2

    def fr(u):
        u = np.asarray(u)
        k = (T - u) ** (-alpha) * (u <= t_max)
        return k.real

    def fi(u):
        u = np.asarray(u)
        k = (T - u) ** (-alpha) * (u <= t_max)
        return k.imag

    want = inner_product_highH(fr, fr, H, T, n=2048, breakpoints=(t_max,)) + inner_product_highH(
        fi, fi, H, T, n=2048, breakpoints=(t_max,)
    )
    est = float(np.mean(samples))
    se = float(np.std(samples)) / math.sqrt(len(samples))
    assert abs(est - want) <= 3 * se, f"{est} vs {want} (se {se})"


# ---------------------------------------------------------------------------
# bridge_exact / bridge_euler
# ---------------------------------------------------------------------------


def test_exact_zero_integral_gives_zero_bridge():
    grid = TimeGrid.uniform(0.9, 16)
    om = ComplexPath(grid, np.zeros(17, dtype=complex))
    p = ModelParams(H=0.7, alpha=0.3 - 0.2j)
    assert np.all(bridge_exact(om, p).values == 0)


def test_exact_real_drift_real_noise_reduction():
    # w = 0 with purely real driving noise keeps the bridge real
    grid = TimeGrid.uniform(0.9, 256)
    rng = SeedSpec(4).generator()
    real_noise = np.concatenate([[0.0], np.cumsum(rng.standard_normal(256) * 0.01)])
    zeta = ComplexPath(grid, real_noise.astype(complex))
    p = ModelParams(H=0.7, alpha=0.3 + 0.0j)
    Z = bridge_exact(omega_path(zeta, p), p)
    assert np.max(np.abs(Z.values.imag)) <= 1e-14


def test_exact_modulus_identity():
    grid = TimeGrid.uniform(0.9, 128)
    zeta = sample_complex_fbm(0.7, grid, SeedSpec(5))
    p = ModelParams(H=0.7, alpha=0.3 - 0.2j)
    om = omega_path(zeta, p)
    Z = bridge_exact(om, p)
    want = (p.T - grid.times) ** p.lam * np.abs(om.values)
    assert np.allclose(np.abs(Z.values), want, rtol=1e-12)


def test_euler_zero_noise_stays_zero():
    grid = TimeGrid.uniform(0.9, 32)
    zeta = ComplexPath(grid, np.zeros(33, dtype=complex))
    p = ModelParams(H=0.7, alpha=0.3 - 0.2j)
    assert np.all(bridge_euler(zeta, p).values == 0)


def test_euler_matches_exact_under_refinement():
    # sup gap to the explicit solution halves when the step halves
    p = ModelParams(H=0.7, alpha=0.3 - 0.2j)
    fine = TimeGrid.uniform(0.9, 4096)
    zf = sample_complex_fbm(p.H, fine, SeedSpec(40))
    gaps = []
    for n in (1024, 2048, 4096):
        step = 4096 // n
        grid = TimeGrid(fine.times[::step])
        z = ComplexPath(grid, zf.values[::step])
        exact = bridge_exact(omega_path(z, p), p)
        euler = bridge_euler(z, p)
        gaps.append(float(np.max(np.abs(exact.values - euler.values))))
    for a, b in zip(gaps, gaps[1:]):
        assert 0.3 <= b / a <= 0.8


def test_euler_real_reduction():
    grid = TimeGrid.uniform(0.9, 64)
    rng = SeedSpec(6).generator()
    real_noise = np.concatenate([[0.0], np.cumsum(rng.standard_normal(64) * 0.05)])
    zeta = ComplexPath(grid, real_noise.astype(complex))
    p = ModelParams(H=0.7, alpha=0.3 + 0.0j)
    Z = bridge_euler(zeta, p)
    assert np.max(np.abs(Z.values.imag)) <= 1e-14


def test_euler_warns_when_step_too_large():
    grid = TimeGrid.uniform(0.999, 16)
    zeta = ComplexPath(grid, np.zeros(17, dtype=complex))
    p = ModelParams(H=0.7, alpha=0.9 - 0.2j, T=1.0)
    with pytest.warns(UserWarning):
        bridge_euler(zeta, p)


# ---------------------------------------------------------------------------
# scaled_Y_path and limiting moments
# ---------------------------------------------------------------------------


def test_scaled_Y_zero_input():
    grid = TimeGrid.uniform(0.9, 16)
    om = ComplexPath(grid, np.zeros(17, dtype=complex))
    p = ModelParams(H=0.6, alpha=0.8 - 0.1j)
    assert np.all(scaled_Y_path(om, p).values == 0)


def test_scaled_Y_domain_error():
    grid = TimeGrid.uniform(0.9, 16)
    om = ComplexPath(grid, np.zeros(17, dtype=complex))
    with pytest.raises(DomainError):
        scaled_Y_path(om, ModelParams(H=0.6, alpha=0.3))


def test_scaled_Y_power_case_second_moment():
    # lam > H: sqrt(lam-H) (T-t)^(lam-H) omega_t, deep-graded evaluation
    H, alpha = 0.6, 0.8 - 0.1j
    times, incr = graded_increments(H, 1e-6, 1200, 5000, seed=17)
    kern = (1.0 - times[:-1]) ** (-alpha)
    om_end = np.sum(kern[:, None] * incr, axis=0)
    y = math.sqrt(alpha.real - H) * (1e-6) ** (alpha.real - H) * om_end
    vals = np.abs(y) ** 2
    want = Y_T_second_moment(H, alpha)
    se = float(np.std(vals)) / math.sqrt(len(vals))
    assert abs(float(np.mean(vals)) - want) <= 3 * se


def test_scaled_Y_log_case_second_moment():
    # lam = H: omega_t / sqrt(2 |log(T-t)|); the gap to the limit decays
    # like 1/log(T-t), so evaluate very deep on the graded grid
    H, alpha = 0.6, 0.6 - 0.1j
    times, incr = graded_increments(H, 1e-12, 1200, 5000, seed=17)
    kern = (1.0 - times[:-1]) ** (-alpha)
    om_end = np.sum(kern[:, None] * incr, axis=0)
    y = om_end / math.sqrt(2.0 * abs(math.log(1e-12)))
    vals = np.abs(y) ** 2
    want = Y_T_second_moment(H, alpha)
    se = float(np.std(vals)) / math.sqrt(len(vals))
    assert abs(float(np.mean(vals)) - want) <= 3 * se


def test_scaled_Y_log_case_skips_unit_remainder():
    grid = TimeGrid(np.array([0.0, 1.0, 1.5]))
    om = ComplexPath(grid, np.ones(3, dtype=complex))
    p = ModelParams(H=0.6, alpha=0.6, T=2.0)
    with pytest.warns(UserWarning):
        y = scaled_Y_path(om, p)
    assert np.isnan(y.values[1].real)
    assert np.isfinite(y.values[2].real)


def test_scaled_Y_matches_path_transform():
    grid = TimeGrid.uniform(0.9, 128)
    zeta = sample_complex_fbm(0.6, grid, SeedSpec(8))
    p = ModelParams(H=0.6, alpha=0.8 - 0.1j)
    om = omega_path(zeta, p)
    y = scaled_Y_path(om, p)
    want = math.sqrt(0.2) * (1.0 - grid.times) ** 0.2 * om.values
    assert np.allclose(y.values, want, rtol=1e-12)


# ---------------------------------------------------------------------------
# Path regularity and pinning
# ---------------------------------------------------------------------------


def test_hoelder_quotient_bounded_under_refinement():
    # empirical Hoelder quotient at exponent H - lam - 0.05 must not blow up
    p = ModelParams(H=0.7, alpha=0.3 - 0.2j)
    expo = p.H - p.lam - 0.05
    quotients = []
    for n in (1024, 4096):
        grid = TimeGrid.uniform(0.9, n)
        om = omega_path(sample_complex_fbm(p.H, grid, SeedSpec(50)), p)
        stride = max(1, n // 512)
        vals = om.values[::stride]
        ts = grid.times[::stride]
        dv = np.abs(vals[None, :] - vals[:, None])
        dt = np.abs(ts[None, :] - ts[:, None])
        mask = dt > 0
        quotients.append(float(np.max(dv[mask] / dt[mask] ** expo)))
    assert quotients[1] <= 2.0 * quotients[0]


def test_bridge_pins_to_zero_near_horizon():
    # E|Z_t|^2 = (T-t)^(2 lam) E|omega_t|^2 decreases to 0 along t -> T
    H, alpha = 0.7, 0.3 - 0.2j
    times, incr = graded_increments(H, 1e-4, 800, 4000, seed=51)
    om = np.vstack(
        [np.zeros(incr.shape[1]), np.cumsum((1.0 - times[:-1])[:, None] ** (-alpha) * incr, axis=0)]
    )
    means = []
    ses = []
    for dt in (1e-1, 1e-2, 1e-3, 1e-4):
        idx = int(np.argmin(np.abs((1.0 - times) - dt)))
        z2 = np.abs((1.0 - times[idx]) ** alpha * om[idx]) ** 2
        means.append(float(np.mean(z2)))
        ses.append(float(np.std(z2)) / math.sqrt(len(z2)))
    for k in range(len(means) - 1):
        assert means[k + 1] < means[k] + 2 * (ses[k] + ses[k + 1])
    assert means[-1] < 0.05 * means[0]


def test_simulate_bridge_assembles_consistently():
    p = ModelParams(H=0.7, alpha=0.3 - 0.2j)
    grid = TimeGrid.uniform(0.99, 256)
    paths = simulate_bridge(p, grid, SeedSpec(77))
    om = omega_path(paths.zeta, p)
    assert np.allclose(paths.omega.values, om.values)
    assert np.allclose(paths.Z.values, bridge_exact(om, p).values)
    assert paths.Z.values[0] == 0
