"""The complex-Gaussian-ratio law CR(s): density, marginals, sampler, GOF.

CR(s) is the law of eta1/eta2 for independent circular complex Gaussians
eta1 ~ CN(0, sigma_x^2), eta2 ~ CN(0, sigma_y^2) with s = sigma_x^2/sigma_y^2.
Its planar density is f(z) = (s/pi) (|z|^2 + s)^(-2); both coordinate
marginals are (s/2)(x^2 + s)^(-3/2) (heavier than Cauchy normalization but
not Cauchy), and the radius has the closed CDF r^2/(r^2 + s).  E|Z| is
finite while E|Z|^2 diverges.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .exceptions import DomainError
from .gauss import SeedSpec

__all__ = [
    "CRLaw",
    "cr_density",
    "cr_marginal_density",
    "cr_marginal_cdf",
    "cr_radial_cdf",
    "cr_sample",
    "ks_statistic",
    "ks_two_sample",
]


@dataclass(frozen=True)
class CRLaw:
    s: float

    def __post_init__(self):
        if not self.s > 0.0:
            raise DomainError(f"scale must be positive, got {self.s}")


def cr_density(z, law: CRLaw):
    z = np.asarray(z, dtype=complex)
    out = law.s / math.pi * (np.abs(z) ** 2 + law.s) ** (-2.0)
    return out if out.ndim else float(out)


def cr_marginal_density(x, law: CRLaw):
    x = np.asarray(x, dtype=float)
    out = 0.5 * law.s * (x**2 + law.s) ** (-1.5)
    return out if out.ndim else float(out)


def cr_marginal_cdf(x, law: CRLaw):
    x = np.asarray(x, dtype=float)
    out = 0.5 * (1.0 + x / np.sqrt(x**2 + law.s))
    return out if out.ndim else float(out)


def cr_radial_cdf(r, law: CRLaw):
    """P(|Z| <= r) = r^2 / (r^2 + s)."""
    r = np.asarray(r, dtype=float)
    if np.any(r < 0):
        raise DomainError("radius must be nonnegative")
    out = r**2 / (r**2 + law.s)
    return out if out.ndim else float(out)


def cr_sample(law: CRLaw, n: int, seed: SeedSpec) -> np.ndarray:
    """n i.i.d. CR(s) draws as eta1/eta2 with sigma_x^2 = s, sigma_y^2 = 1."""
    if n < 1:
        raise DomainError(f"need n >= 1, got {n}")
    rng = seed.generator()
    sx = math.sqrt(law.s / 2.0)
    eta1 = sx * (rng.standard_normal(n) + 1j * rng.standard_normal(n))
    eta2 = (rng.standard_normal(n) + 1j * rng.standard_normal(n)) / math.sqrt(2.0)
    while True:  # exact zeros have probability zero but are redrawn anyway
        bad = eta2 == 0
        if not np.any(bad):
            break
        k = int(bad.sum())
        eta2[bad] = (rng.standard_normal(k) + 1j * rng.standard_normal(k)) / math.sqrt(2.0)
    return eta1 / eta2


def ks_statistic(samples, cdf) -> float:
    """Sup distance between the empirical CDF of ``samples`` and ``cdf``."""
    x = np.sort(np.asarray(samples, dtype=float))
    if x.size == 0:
        raise DomainError("need at least one sample")
    n = x.size
    c = np.asarray(cdf(x), dtype=float)
    i = np.arange(1, n + 1)
    return float(max(np.max(np.abs(c - i / n)), np.max(np.abs(c - (i - 1) / n))))


def ks_two_sample(a, b) -> float:
    """Two-sample sup distance between empirical CDFs."""
    a = np.sort(np.asarray(a, dtype=float))
    b = np.sort(np.asarray(b, dtype=float))
    if a.size == 0 or b.size == 0:
        raise DomainError("need at least one sample in each set")
    allx = np.concatenate([a, b])
    ca = np.searchsorted(a, allx, side="right") / a.size
    cb = np.searchsorted(b, allx, side="right") / b.size
    return float(np.max(np.abs(ca - cb)))
