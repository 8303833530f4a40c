"""Complex bridge paths: explicit solution, Euler cross-check, scaling limits.

The pinned process solves dZ_t = -alpha Z_t/(T-t) dt + sigma dzeta_t with
Z_0 = 0 and admits the explicit form Z_t = sigma (T-t)^alpha omega_t where
omega_t = int_0^t (T-u)^(-alpha) dzeta_u.  Grids must stop strictly before
T: the kernel and the drift are singular there.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .exceptions import DomainError, GridError
from .gauss import ComplexPath, SeedSpec, TimeGrid, sample_complex_fbm
from .special import ModelParams

__all__ = [
    "BridgePaths",
    "omega_path",
    "bridge_exact",
    "bridge_euler",
    "scaled_Y_path",
    "simulate_bridge",
]


@dataclass(frozen=True)
class BridgePaths:
    """Driving noise, Wiener integral and bridge on one grid."""

    zeta: ComplexPath
    omega: ComplexPath
    Z: ComplexPath
    params: ModelParams


def _check_grid(grid: TimeGrid, T: float):
    if grid.t_max >= T:
        raise GridError(f"grid reaches the horizon: t_max={grid.t_max} >= T={T}")


def omega_path(zeta: ComplexPath, p: ModelParams) -> ComplexPath:
    """Left-point discretization of omega_t = int_0^t (T-u)^(-alpha) dzeta_u."""
    _check_grid(zeta.grid, p.T)
    t = zeta.grid.times
    kern = (p.T - t[:-1]) ** (-complex(p.alpha))
    incr = np.diff(zeta.values)
    vals = np.concatenate([[0.0 + 0.0j], np.cumsum(kern * incr)])
    return ComplexPath(zeta.grid, vals)


def bridge_exact(omega: ComplexPath, p: ModelParams) -> ComplexPath:
    """Z_t = sigma (T-t)^alpha omega_t, principal power of the positive base."""
    _check_grid(omega.grid, p.T)
    t = omega.grid.times
    vals = p.sigma * (p.T - t) ** complex(p.alpha) * omega.values
    return ComplexPath(omega.grid, vals)


def bridge_euler(zeta: ComplexPath, p: ModelParams) -> ComplexPath:
    """Euler-Maruyama scheme on dZ = -alpha Z/(T-t) dt + sigma dzeta."""
    _check_grid(zeta.grid, p.T)
    t = zeta.grid.times
    h = np.diff(t)
    if h.size and float(np.max(h)) * p.lam / (p.T - t[-1]) > 0.5:
        warnings.warn("Euler step too large near the singular horizon", stacklevel=2)
    a = complex(p.alpha)
    incr = np.diff(zeta.values)
    Z = np.empty(t.size, dtype=complex)
    Z[0] = 0.0
    for k in range(h.size):
        Z[k + 1] = Z[k] - a * Z[k] / (p.T - t[k]) * h[k] + p.sigma * incr[k]
    return ComplexPath(zeta.grid, Z)


def scaled_Y_path(omega: ComplexPath, p: ModelParams) -> ComplexPath:
    """Normalization of omega with a finite limit when lam >= H.

    lam > H:  Y_t = sqrt(lam - H) (T-t)^(lam-H) omega_t
    lam = H:  Y_t = omega_t / sqrt(2 |log(T-t)|)

    In the log case, grid points with T - t = 1 exactly (where the
    normalization vanishes) are skipped and set to NaN with a warning.
    """
    lam, H = p.lam, p.H
    if lam < H:
        raise DomainError(f"scaling limit needs Re(alpha) >= H, got {lam} < {H}")
    _check_grid(omega.grid, p.T)
    t = omega.grid.times
    rem = p.T - t
    if lam > H:
        vals = np.sqrt(lam - H) * rem ** (lam - H) * omega.values
    else:
        logs = np.abs(np.log(rem))
        bad = logs == 0.0
        if np.any(bad):
            warnings.warn("skipping grid points with |log(T-t)| = 0", stacklevel=2)
            logs[bad] = np.nan
        with np.errstate(invalid="ignore"):
            vals = omega.values / np.sqrt(2.0 * logs)
    return ComplexPath(omega.grid, vals)


def simulate_bridge(p: ModelParams, grid: TimeGrid, seed: SeedSpec) -> BridgePaths:
    """Sample the driving noise and assemble (zeta, omega, Z) on one grid."""
    _check_grid(grid, p.T)
    zeta = sample_complex_fbm(p.H, grid, seed)
    om = omega_path(zeta, p)
    return BridgePaths(zeta=zeta, omega=om, Z=bridge_exact(om, p), params=p)
