"""Complex Gamma/Beta functions and closed-form second-moment constants.

Everything here is deterministic scalar math: the complex Gamma function
(Lanczos + reflection), the complex Beta function, and the closed-form
constants that govern the complex drift-toward-the-endpoint model

    dZ_t = -alpha * Z_t / (T - t) dt + sigma * dzeta_t,   alpha = lam - i*w,

driven by a complex fractional Brownian motion with Hurst index H.  The
Monte Carlo modules test their output against these constants; none of the
functions below depends on random state.
"""

from __future__ import annotations

import cmath
import enum
import math
from dataclasses import dataclass

from .exceptions import DomainError, PoleError

__all__ = [
    "ModelParams",
    "LimitCase",
    "cgamma",
    "cbeta",
    "omega_T_second_moment",
    "xi_T_second_moment",
    "xtilde_T_second_moment",
    "Y_T_second_moment",
    "A_tilde_second_moment",
    "cr_scale",
    "lemma_a1_value",
    "constants_report",
]

# Equality tolerance for classifying boundary regimes (lam == 1-H, lam == 1/2).
CASE_TOL = 1e-12

# Re(z) above which Gamma(z) overflows double precision.
_GAMMA_OVERFLOW_RE = 171.7


class LimitCase(enum.Enum):
    """Asymptotic regime of the normalized estimation error, by (lam, H)."""

    CASE_I = "i"  # lam in (0, 1-H): scaled Gaussian-ratio limit
    CASE_II = "ii"  # lam = 1-H: same family, extra sqrt-log normalization
    CASE_III = "iii"  # lam in (1-H, 1/2): second-chaos-ratio limit
    CASE_IV = "iv"  # lam = 1/2: second-chaos-ratio limit, log normalization
    INCONSISTENT = "inconsistent"  # lam in (1/2, H): estimator not consistent


@dataclass(frozen=True)
class ModelParams:
    """Full specification of the complex bridge model.

    Parameters
    ----------
    H : float
        Hurst index of the driving noise, in (0, 1).
    alpha : complex
        Drift parameter lam - i*w with lam = Re(alpha) > 0.
    T : float
        Pinning horizon, > 0.  The bridge is singular at t = T.
    sigma : float
        Diffusion coefficient, > 0.  All closed forms assume the sigma = 1
        normalization; the least-squares estimator is invariant under it.
    """

    H: float
    alpha: complex
    T: float = 1.0
    sigma: float = 1.0

    def __post_init__(self):
        if not 0.0 < self.H < 1.0:
            raise DomainError(f"H must lie in (0, 1), got {self.H}")
        if not self.lam > 0.0:
            raise DomainError(f"Re(alpha) must be positive, got {self.lam}")
        if not self.T > 0.0:
            raise DomainError(f"T must be positive, got {self.T}")
        if not self.sigma > 0.0:
            raise DomainError(f"sigma must be positive, got {self.sigma}")

    @property
    def lam(self) -> float:
        return complex(self.alpha).real

    @property
    def w(self) -> float:
        # alpha = lam - i*w
        return -complex(self.alpha).imag

    @property
    def well_posed(self) -> bool:
        """True when the bridge extends to t = T (requires lam < H)."""
        return self.lam < self.H

    def require_well_posed(self):
        if not self.well_posed:
            raise DomainError(
                f"well-posedness requires Re(alpha) < H, got Re(alpha)={self.lam}, H={self.H}"
            )

    def require_estimation_domain(self):
        """Estimation theory needs H > 1/2 on top of well-posedness."""
        self.require_well_posed()
        if not self.H > 0.5:
            raise DomainError(f"estimation requires H > 1/2, got H={self.H}")


# ---------------------------------------------------------------------------
# Complex Gamma / Beta
# ---------------------------------------------------------------------------

# 15-term Lanczos coefficient set, g = 607/128.  Relative error below 1e-13
# on Re(z) >= 1/2; the reflection formula covers the left half-plane.
_LANCZOS_G = 607.0 / 128.0
_LANCZOS_C = (
    0.99999999999999709182,
    57.156235665862923517,
    -59.597960355475491248,
    14.136097974741747174,
    -0.49191381609762019978,
    0.33994649984811888699e-4,
    0.46523628927048575665e-4,
    -0.98374475304879564677e-4,
    0.15808870322491248884e-3,
    -0.21026444172410488319e-3,
    0.21743961811521264320e-3,
    -0.16431810653676389022e-3,
    0.84418223983852743293e-4,
    -0.26190838401581408670e-4,
    0.36899182659531622704e-5,
)

# Distance below which an argument counts as sitting on a pole.
_POLE_TOL = 1e-12


def _near_pole(z: complex) -> bool:
    return z.real <= 0.5 and abs(z.imag) < _POLE_TOL and abs(z.real - round(z.real)) < _POLE_TOL


def cgamma(z: complex) -> complex:
    """Principal complex Gamma function.

    Lanczos approximation on Re(z) >= 1/2 and the reflection formula
    Gamma(z)Gamma(1-z) = pi/sin(pi z) on the left half-plane.  Raises
    ``PoleError`` within 1e-12 of a non-positive integer and
    ``OverflowError`` when the result exceeds double range.
    """
    z = complex(z)
    if _near_pole(z):
        raise PoleError(f"Gamma pole at non-positive integer, z={z}")
    if z.real >= _GAMMA_OVERFLOW_RE:
        raise OverflowError(f"Gamma({z}) overflows double precision")
    if z.real < 0.5:
        s = cmath.sin(math.pi * z)
        if s == 0:  # only reachable for exact integer input
            raise PoleError(f"Gamma pole at non-positive integer, z={z}")
        return math.pi / (s * cgamma(1.0 - z))
    zz = z - 1.0
    acc = _LANCZOS_C[0]
    for k in range(1, len(_LANCZOS_C)):
        acc += _LANCZOS_C[k] / (zz + k)
    t = zz + _LANCZOS_G + 0.5
    out = math.sqrt(2.0 * math.pi) * t ** (zz + 0.5) * cmath.exp(-t) * acc
    if not (math.isfinite(out.real) and math.isfinite(out.imag)):
        raise OverflowError(f"Gamma({z}) overflows double precision")
    return out


def cbeta(a: complex, b: complex) -> complex:
    """Complex Beta function B(a, b) = Gamma(a)Gamma(b)/Gamma(a+b), Re > 0."""
    a, b = complex(a), complex(b)
    if a.real <= 0.0 or b.real <= 0.0:
        raise DomainError(f"Beta requires positive real parts, got a={a}, b={b}")
    return cgamma(a) * cgamma(b) / cgamma(a + b)


def _gamma_ratio_re(num: complex, den: complex) -> float:
    return (cgamma(num) / cgamma(den)).real


# ---------------------------------------------------------------------------
# Closed-form second moments
# ---------------------------------------------------------------------------


def omega_T_second_moment(p: ModelParams) -> float:
    """Limiting second moment E|omega_T|^2 of the complex Wiener integral.

    E|omega_T|^2 = Gamma(1+2H)/(2(H-lam)) * Re[Gamma(1-alpha)/Gamma(2H-alpha)]
                   * T^(2(H-lam)),  valid for lam = Re(alpha) in (0, H).
    """
    p.require_well_posed()
    H, a, T = p.H, complex(p.alpha), p.T
    lam = p.lam
    val = (
        cgamma(1 + 2 * H).real
        / (2.0 * (H - lam))
        * _gamma_ratio_re(1 - a, 2 * H - a)
        * T ** (2 * (H - lam))
    )
    if not val > 0.0:
        raise DomainError(f"second moment must be positive, got {val}")
    return val


def xi_T_second_moment(H: float, alpha: float, T: float = 1.0) -> float:
    """Real-bridge analogue: E[xi_T^2] for real drift alpha in (0, H)."""
    alpha = float(alpha)
    if not (0.0 < alpha < H):
        raise DomainError(f"xi second moment needs 0 < alpha < H, got alpha={alpha}, H={H}")
    if not 0.0 < H < 1.0:
        raise DomainError(f"H must lie in (0, 1), got {H}")
    val = (
        cgamma(1 + 2 * H).real
        / (2.0 * (H - alpha))
        * (cgamma(1 - alpha) / cgamma(2 * H - alpha)).real
        * T ** (2 * (H - alpha))
    )
    return val


def xtilde_T_second_moment(H: float, alpha: float) -> float:
    """Second moment of the normalized real bridge for alpha in [H, 1).

    For alpha > H the normalization is (T-t)^(alpha-H) * xi_t and the limit
    is alpha*H/(alpha-H) * B(2H, 1+alpha-2H).  At alpha = H the correct
    normalization is sqrt(|log(T-t)|) and the limit is 2 H^2 B(2H, 1-H).
    """
    alpha = float(alpha)
    if not 0.0 < H < 1.0:
        raise DomainError(f"H must lie in (0, 1), got {H}")
    if alpha < H or alpha >= 1.0:
        raise DomainError(f"normalized bridge moment needs H <= alpha < 1, got {alpha}")
    if alpha == H:
        return 2.0 * H * H * cbeta(2 * H, 1 - H).real
    return alpha * H / (alpha - H) * cbeta(2 * H, 1 + alpha - 2 * H).real


def Y_T_second_moment(H: float, alpha: complex) -> float:
    """E|Y_T|^2 for the scaled Wiener integral in the lam >= H regime.

    E|Y_T|^2 = (1/2) Gamma(1+2H) Re(Gamma(1+alpha-2H)/Gamma(alpha)).
    """
    a = complex(alpha)
    lam = a.real
    if not 0.0 < H < 1.0:
        raise DomainError(f"H must lie in (0, 1), got {H}")
    if lam < H or lam >= 1.0:
        raise DomainError(f"scaling limit needs H <= Re(alpha) < 1, got {lam}")
    val = 0.5 * cgamma(1 + 2 * H).real * _gamma_ratio_re(1 + a - 2 * H, a)
    if not val > 0.0:
        raise DomainError(f"second moment must be positive, got {val}")
    return val


def A_tilde_second_moment(H: float, alpha: complex) -> float:
    """E|A_tilde_T|^2 for the normalized kernel integral in the lam < 1-H regime.

    E|A_tilde_T|^2 = H Gamma(2H)/(1-lam-H) * Re(Gamma(2-alpha-2H)/Gamma(1-alpha)).
    """
    a = complex(alpha)
    lam = a.real
    if not 0.5 < H < 1.0:
        raise DomainError(f"requires H in (1/2, 1), got {H}")
    if not 0.0 < lam < 1.0 - H:
        raise DomainError(f"requires Re(alpha) in (0, 1-H), got {lam}")
    val = H * cgamma(2 * H).real / (1.0 - lam - H) * _gamma_ratio_re(2 - a - 2 * H, 1 - a)
    if not val > 0.0:
        raise DomainError(f"second moment must be positive, got {val}")
    return val


def cr_scale(H: float, alpha: complex, T: float, case: LimitCase) -> float:
    """Scale parameter s = sigma_x^2/sigma_y^2 of the Gaussian-ratio limit law.

    Case I  (lam in (0, 1-H)):
        s = T^(2lam-2H) (H-lam)/(1-H-lam)
            * Re(Gamma(2-alpha-2H)/Gamma(1-alpha)) / Re(Gamma(1-alpha)/Gamma(2H-alpha))
    Case II (lam = 1-H):
        s = T^(2(1-2H))
            * Re(Gamma(2-alpha-2H)/Gamma(1-alpha)) / Re(Gamma(1-alpha)/Gamma(2H-alpha))
    """
    a = complex(alpha)
    lam = a.real
    if not 0.5 < H < 1.0:
        raise DomainError(f"requires H in (1/2, 1), got {H}")
    num = _gamma_ratio_re(2 - a - 2 * H, 1 - a)
    den = _gamma_ratio_re(1 - a, 2 * H - a)
    if case is LimitCase.CASE_I:
        if not 0.0 < lam < 1.0 - H - CASE_TOL:
            raise DomainError(f"case i requires Re(alpha) in (0, 1-H), got {lam}")
        s = T ** (2 * lam - 2 * H) * (H - lam) / (1.0 - H - lam) * num / den
    elif case is LimitCase.CASE_II:
        if abs(lam - (1.0 - H)) > CASE_TOL:
            raise DomainError(f"case ii requires Re(alpha) = 1-H, got {lam}")
        s = T ** (2 * (1 - 2 * H)) * num / den
    else:
        raise DomainError(f"no ratio-law scale for case {case}")
    if not s > 0.0:
        raise DomainError(f"scale must be positive, got {s}")
    return s


def lemma_a1_value(H: float, alpha: complex, T: float = 1.0) -> complex:
    """Closed form of the nested kernel integral

        int_0^T (T-u)^(conj(alpha)-1) int_0^u (T-v)^(-conj(alpha)) (u-v)^(2H-2) dv du
        = B(2H-1, conj(alpha)) / (2H-1) * T^(2H-1),

    valid for H > 1/2 and Re(alpha) in (0, 1).
    """
    a = complex(alpha)
    if not 0.5 < H < 1.0:
        raise DomainError(f"requires H in (1/2, 1), got {H}")
    if not 0.0 < a.real < 1.0:
        raise DomainError(f"requires Re(alpha) in (0, 1), got {a.real}")
    return cbeta(2 * H - 1, a.conjugate()) / (2 * H - 1) * T ** (2 * H - 1)


def constants_report(p: ModelParams) -> dict:
    """All closed-form constants applicable to the given model, as a dict."""
    from .estimate import classify_case  # late import; estimate depends on us

    out: dict = {
        "H": p.H,
        "alpha": [p.lam, complex(p.alpha).imag],
        "T": p.T,
        "well_posed": p.well_posed,
    }
    if p.well_posed:
        out["E_omega_T_sq"] = omega_T_second_moment(p)
    la1 = lemma_a1_value(p.H, p.alpha, p.T) if 0.5 < p.H < 1 and 0 < p.lam < 1 else None
    if la1 is not None:
        out["lemma_a1"] = [la1.real, la1.imag]
    if p.H > 0.5 and 0 < p.lam < p.H:
        case = classify_case(p.H, p.alpha)
        out["case"] = case.value
        if case in (LimitCase.CASE_I, LimitCase.CASE_II):
            out["cr_scale"] = cr_scale(p.H, p.alpha, p.T, case)
        if case is LimitCase.CASE_I:
            out["E_A_tilde_sq"] = A_tilde_second_moment(p.H, p.alpha)
    if p.H <= p.lam < 1.0:
        out["E_Y_T_sq"] = Y_T_second_moment(p.H, p.alpha)
    return out
