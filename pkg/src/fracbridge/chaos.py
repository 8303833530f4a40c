"""Complex Hermite polynomials J_{m,n} and Monte Carlo chaos identities.

The polynomials are generated by exp(lam*conj(z) + conj(lam)*z - 2|lam|^2)
= sum conj(lam)^m lam^n / (m! n!) J_{m,n}(z), equivalently by the
recurrences

    J_{m+1,n} = z * J_{m,n} - 2n * J_{m,n-1}
    J_{m,n+1} = conj(z) * J_{m,n} - 2m * J_{m-1,n},    J_{0,0} = 1.

With Z distributed as the image of a unit-direction element of norm
sqrt(2) (i.e. Z ~ CN(0, 2): independent N(0,1) real and imaginary parts),
the family is orthogonal with E[J_{m,n} conj(J_{p,q})] =
1{m=p, n=q} m! n! 2^(m+n).  The variance convention 2 is fixed throughout;
all constants below follow it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .exceptions import DomainError
from .gauss import SeedSpec

__all__ = [
    "HERMITE_CAP",
    "BiPolynomial",
    "hermite_poly",
    "hermite_eval",
    "ChaosCheck",
    "ChaosReport",
    "mc_chaos_checks",
]

HERMITE_CAP = 12


@dataclass(frozen=True)
class BiPolynomial:
    """Polynomial in (z, conj(z)): coeffs[j, k] multiplies z^j conj(z)^k."""

    coeffs: np.ndarray

    def __call__(self, z):
        z = np.asarray(z, dtype=complex)
        zb = np.conj(z)
        out = np.zeros_like(z)
        J, K = self.coeffs.shape
        zp = [z**j for j in range(J)]
        zbp = [zb**k for k in range(K)]
        for j in range(J):
            for k in range(K):
                c = self.coeffs[j, k]
                if c != 0:
                    out = out + c * zp[j] * zbp[k]
        return out if out.ndim else complex(out)


def _check_index(m: int, n: int):
    if m < 0 or n < 0:
        raise DomainError(f"indices must be nonnegative, got ({m}, {n})")
    if m + n > HERMITE_CAP:
        raise DomainError(f"index cap {HERMITE_CAP} exceeded: m+n = {m + n}")


def hermite_poly(m: int, n: int) -> BiPolynomial:
    """Coefficients of J_{m,n} built from the two recurrences."""
    _check_index(m, n)
    # table[i][j] holds the coefficient array of J_{i,j}
    table: dict[tuple[int, int], np.ndarray] = {(0, 0): np.ones((1, 1), dtype=complex)}

    def pad(c, J, K):
        out = np.zeros((J, K), dtype=complex)
        out[: c.shape[0], : c.shape[1]] = c
        return out

    for i in range(m):
        # J_{i+1,0} = z * J_{i,0}
        c = table[(i, 0)]
        nc = np.zeros((c.shape[0] + 1, c.shape[1]), dtype=complex)
        nc[1:, :] = c
        table[(i + 1, 0)] = nc
    for i in range(m + 1):
        for j in range(n):
            c = table[(i, j)]
            nc = np.zeros((c.shape[0], c.shape[1] + 1), dtype=complex)
            nc[:, 1:] = c  # conj(z) * J_{i,j}
            if i > 0:
                prev = pad(table[(i - 1, j)], nc.shape[0], nc.shape[1])
                nc -= 2 * i * prev
            table[(i, j + 1)] = nc
    return BiPolynomial(table[(m, n)])


def hermite_eval(m: int, n: int, z) -> complex:
    """Evaluate J_{m,n}(z) by the recurrences (no expanded coefficients)."""
    _check_index(m, n)
    z = complex(z)
    zb = z.conjugate()
    # first build J_{i,0} = z^i, then walk the second index upward
    col = [1.0 + 0.0j]
    for i in range(m):
        col.append(z * col[i])
    # col[i] currently holds J_{i,0}; iterate J_{i,j+1} = zb J_{i,j} - 2i J_{i-1,j}
    for _ in range(n):
        nxt = [zb * col[0]]
        for i in range(1, m + 1):
            nxt.append(zb * col[i] - 2 * i * col[i - 1])
        col = nxt
    return col[m]


@dataclass(frozen=True)
class ChaosCheck:
    name: str
    estimate: float
    target: float
    se: float
    passed: bool


@dataclass(frozen=True)
class ChaosReport:
    trials: int
    checks: tuple = field(default_factory=tuple)

    @property
    def all_passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def to_dict(self) -> dict:
        return {
            "trials": self.trials,
            "all_passed": self.all_passed,
            "checks": [
                {"name": c.name, "estimate": c.estimate, "target": c.target, "se": c.se, "passed": c.passed}
                for c in self.checks
            ],
        }


def mc_chaos_checks(H: float, trials: int, seed: SeedSpec) -> ChaosReport:
    """Monte Carlo verification of orthogonality, product and moment identities.

    Draws Z = J-image of an element of norm sqrt(2); its law CN(0, 2) does
    not depend on H (the norm normalization cancels the Hurst scaling), but
    H is validated because the isometry constants assume H > 1/2.
    """
    if not 0.5 < H < 1.0:
        raise DomainError(f"requires H in (1/2, 1), got {H}")
    if trials < 10_000:
        raise DomainError(f"need at least 10000 trials, got {trials}")
    rng = seed.generator()
    z = rng.standard_normal(trials) + 1j * rng.standard_normal(trials)

    idx = [(m, n) for m in range(4) for n in range(4) if 0 < m + n <= 3]
    vals = {(m, n): hermite_poly(m, n)(z) for (m, n) in idx}
    checks = []

    def add(name, samples, target):
        est = float(np.mean(samples))
        se = float(np.std(samples) / math.sqrt(trials))
        checks.append(ChaosCheck(name, est, target, se, abs(est - target) <= 3 * se + 1e-12))

    # (a) orthogonality / isometry: E[J_{m,n} conj(J_{p,q})] = 1{..} m! n! 2^(m+n)
    for a, (m, n) in enumerate(idx):
        for m2, n2 in idx[a:]:
            prod = vals[(m, n)] * np.conj(vals[(m2, n2)])
            target = float(math.factorial(m) * math.factorial(n) * 2 ** (m + n)) if (m, n) == (m2, n2) else 0.0
            add(f"E[J{m}{n} conj(J{m2}{n2})] re", prod.real, target)
            if (m, n) != (m2, n2):
                add(f"E[J{m}{n} conj(J{m2}{n2})] im", prod.imag, 0.0)

    # (b) product identity J_{1,0} J_{0,1} = J_{1,1} + 2, pointwise
    resid = np.max(np.abs(vals[(1, 0)] * vals[(0, 1)] - (vals[(1, 1)] + 2.0)))
    checks.append(ChaosCheck("product J10*J01 = J11 + 2 (max residual)", float(resid), 0.0, 0.0, resid < 1e-10))

    # (c) hypercontractivity at r=4, (p,q)=(1,1): (E|J11|^4)^(1/4) <= 3 (E|J11|^2)^(1/2)
    a2 = np.abs(vals[(1, 1)]) ** 2
    lhs = float(np.mean(a2**2)) ** 0.25
    rhs = 3.0 * float(np.mean(a2)) ** 0.5
    checks.append(ChaosCheck("hypercontractivity (E|J11|^4)^(1/4) <= 3 sqrt(E|J11|^2)", lhs, rhs, 0.0, lhs <= rhs))

    return ChaosReport(trials=trials, checks=tuple(checks))
