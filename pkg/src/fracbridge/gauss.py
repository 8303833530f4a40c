"""Fractional Brownian motion: covariance, exact samplers, inner products.

Two exact path samplers are provided: dense Cholesky factorization of the
covariance matrix (any grid, O(n^3)) and circulant embedding of the
stationary increment process (uniform grids, O(n log n)).  The complex
driving noise zeta = (B1 + i B2)/sqrt(2) is sampled either from one
circulant draw (whose real and imaginary parts are independent copies) or
from two Cholesky draws.

Inner products in the Gaussian Hilbert space are computed with exact
per-cell integration of the singular kernels, so indicator functions are
reproduced to rounding.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.fft import next_fast_len

from .exceptions import DecompositionError, DomainError, EmbeddingError, GridError, QuadratureError

__all__ = [
    "TimeGrid",
    "RealPath",
    "ComplexPath",
    "SeedSpec",
    "fbm_covariance",
    "covariance_matrix",
    "sample_fbm_cholesky",
    "sample_fbm_circulant",
    "sample_complex_fbm",
    "inner_product_highH",
    "inner_product_lowH",
    "BVFunction",
    "write_path_csv",
]

CHOLESKY_CAP = 4096
# Relative tolerance for negative circulant eigenvalues: clip above, error below.
EMBEDDING_TOL = 1e-10


# ---------------------------------------------------------------------------
# Grids, paths, seeds
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class TimeGrid:
    """Strictly increasing sample times starting at 0."""

    times: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float)
        object.__setattr__(self, "times", t)
        if t.ndim != 1 or t.size < 1:
            raise GridError("grid must be a 1-d array with at least one point")
        if t[0] != 0.0:
            raise GridError(f"grid must start at 0, got {t[0]}")
        if t.size > 1 and not np.all(np.diff(t) > 0):
            raise GridError("grid times must be strictly increasing")

    @classmethod
    def uniform(cls, t_max: float, n_steps: int) -> "TimeGrid":
        if n_steps < 1 or t_max <= 0:
            raise GridError(f"need n_steps >= 1 and t_max > 0, got {n_steps}, {t_max}")
        return cls(np.linspace(0.0, float(t_max), n_steps + 1))

    def __len__(self) -> int:
        return self.times.size

    @property
    def n_steps(self) -> int:
        return self.times.size - 1

    @property
    def t_max(self) -> float:
        return float(self.times[-1])

    @property
    def is_uniform(self) -> bool:
        if self.times.size < 2:
            return True
        d = np.diff(self.times)
        return bool(np.allclose(d, d[0], rtol=1e-9, atol=0.0))

    @property
    def h(self) -> float:
        """Step of a uniform grid."""
        if not self.is_uniform:
            raise GridError("grid is not uniform")
        return float(self.times[1] - self.times[0]) if self.times.size > 1 else 0.0


@dataclass(frozen=True, eq=False)
class RealPath:
    grid: TimeGrid
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "values", v)
        if v.shape != self.grid.times.shape:
            raise GridError("values must align with the grid")


@dataclass(frozen=True, eq=False)
class ComplexPath:
    grid: TimeGrid
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=complex)
        object.__setattr__(self, "values", v)
        if v.shape != self.grid.times.shape:
            raise GridError("values must align with the grid")


@dataclass(frozen=True)
class SeedSpec:
    """Master seed plus stream index; streams are statistically independent.

    Identical (seed, stream) pairs reproduce identical draws bit for bit.
    Streams are split with a counter-keyed Philox generator, so replication
    r of a Monte Carlo run can use stream=r and be generated in any order.
    """

    seed: int
    stream: int = 0

    def generator(self) -> np.random.Generator:
        ss = np.random.SeedSequence(entropy=self.seed, spawn_key=(self.stream,))
        return np.random.Generator(np.random.Philox(ss))


# ---------------------------------------------------------------------------
# Covariance and exact samplers
# ---------------------------------------------------------------------------


def fbm_covariance(H: float, t, s):
    """R_H(t,s) = (|t|^2H + |s|^2H - |t-s|^2H)/2; accepts scalars or arrays."""
    if not 0.0 < H < 1.0:
        raise DomainError(f"H must lie in (0, 1), got {H}")
    t = np.asarray(t, dtype=float)
    s = np.asarray(s, dtype=float)
    out = 0.5 * (np.abs(t) ** (2 * H) + np.abs(s) ** (2 * H) - np.abs(t - s) ** (2 * H))
    return out if out.ndim else float(out)


def covariance_matrix(H: float, times: np.ndarray) -> np.ndarray:
    t = np.asarray(times, dtype=float)
    return fbm_covariance(H, t[:, None], t[None, :])


def sample_fbm_cholesky(H: float, grid: TimeGrid, seed: SeedSpec, cap: int = CHOLESKY_CAP) -> RealPath:
    """Exact fBm sample on an arbitrary grid via Cholesky factorization."""
    if len(grid) > cap + 1:
        raise GridError(f"grid exceeds Cholesky cap of {cap} steps")
    rng = seed.generator()
    if grid.n_steps == 0:
        return RealPath(grid, np.zeros(1))
    L = _cholesky_factor(H, grid.times[1:])
    z = rng.standard_normal(grid.n_steps)
    vals = np.concatenate([[0.0], L @ z])
    return RealPath(grid, vals)


_FACTOR_MEMO: dict = {}


def _cholesky_factor(H: float, times: np.ndarray) -> np.ndarray:
    key = (H, times.tobytes())
    hit = _FACTOR_MEMO.get(key)
    if hit is not None:
        return hit
    C = covariance_matrix(H, times)
    scale = float(np.mean(np.diag(C)))
    L = None
    for jitter in (0.0, 1e-14, 1e-12, 1e-10):
        try:
            L = np.linalg.cholesky(C + jitter * scale * np.eye(len(C)))
            break
        except np.linalg.LinAlgError:
            continue
    if L is None:
        raise DecompositionError("covariance matrix is not PSD within jitter tolerance")
    if len(_FACTOR_MEMO) > 8:
        _FACTOR_MEMO.clear()
    _FACTOR_MEMO[key] = L
    return L


def fgn_sqrt_spectrum(H: float, n_steps: int, h: float) -> np.ndarray:
    """sqrt of the circulant-embedding eigenvalues for n_steps fGn increments.

    Returns an array of length 2*n_steps.  Raises ``EmbeddingError`` when an
    eigenvalue falls below -EMBEDDING_TOL * max(eigenvalues); smaller
    negative values (pure rounding) are clipped to zero.
    """
    if not 0.0 < H < 1.0:
        raise DomainError(f"H must lie in (0, 1), got {H}")
    n = int(n_steps)
    k = np.arange(n + 1, dtype=float)
    gamma = 0.5 * h ** (2 * H) * ((k + 1) ** (2 * H) - 2 * k ** (2 * H) + np.abs(k - 1) ** (2 * H))
    c = np.empty(2 * n)
    c[: n + 1] = gamma
    c[n + 1 :] = gamma[1:n][::-1]
    lam = np.fft.fft(c).real
    lmax = lam.max()
    if lam.min() < -EMBEDDING_TOL * lmax:
        raise EmbeddingError(
            f"circulant embedding not nonnegative: min eigenvalue {lam.min():.3e} vs max {lmax:.3e}"
        )
    return np.sqrt(np.clip(lam, 0.0, None))


def complex_fgn(sqrt_spectrum: np.ndarray, rng: np.random.Generator, size: int = 1) -> np.ndarray:
    """(size, n) complex fGn increments: E[Y_j conj(Y_k)] = gamma(j-k), E[Y Y] = 0."""
    m = sqrt_spectrum.size
    n = m // 2
    xi = (rng.standard_normal((size, m)) + 1j * rng.standard_normal((size, m))) / math.sqrt(2.0)
    return (math.sqrt(m) * np.fft.ifft(sqrt_spectrum * xi, axis=1))[:, :n]


def sample_fbm_circulant(H: float, grid: TimeGrid, seed: SeedSpec) -> RealPath:
    """Exact fBm sample on a uniform grid via circulant embedding, O(n log n)."""
    if not grid.is_uniform:
        raise GridError("circulant sampler requires a uniform grid")
    if grid.n_steps == 0:
        return RealPath(grid, np.zeros(1))
    sq = fgn_sqrt_spectrum(H, grid.n_steps, grid.h)
    y = complex_fgn(sq, seed.generator(), size=1)[0]
    incr = math.sqrt(2.0) * y.real  # real part carries an exact real fGn draw
    return RealPath(grid, np.concatenate([[0.0], np.cumsum(incr)]))


def sample_complex_fbm(H: float, grid: TimeGrid, seed: SeedSpec) -> ComplexPath:
    """Complex fBm zeta = (B1 + i B2)/sqrt(2) with independent components.

    E[zeta_t conj(zeta_s)] = R_H(t, s) and E[zeta_t zeta_s] = 0.  Uniform
    grids use one circulant draw (its real and imaginary parts are the two
    independent fGn components); other grids fall back to two Cholesky draws.
    """
    if grid.n_steps == 0:
        return ComplexPath(grid, np.zeros(1, dtype=complex))
    if grid.is_uniform:
        sq = fgn_sqrt_spectrum(H, grid.n_steps, grid.h)
        y = complex_fgn(sq, seed.generator(), size=1)[0]
        return ComplexPath(grid, np.concatenate([[0.0], np.cumsum(y)]))
    b1 = sample_fbm_cholesky(H, grid, SeedSpec(seed.seed, 2 * seed.stream))
    b2 = sample_fbm_cholesky(H, grid, SeedSpec(seed.seed, 2 * seed.stream + 1))
    return ComplexPath(grid, (b1.values + 1j * b2.values) / math.sqrt(2.0))


# ---------------------------------------------------------------------------
# Hilbert-space inner products
# ---------------------------------------------------------------------------


def _cell_edges(T: float, n: int, breakpoints: Sequence[float]) -> np.ndarray:
    edges = np.linspace(0.0, T, n + 1)
    pts = [b for b in breakpoints if 0.0 < b < T]
    if pts:
        edges = np.unique(np.concatenate([edges, np.asarray(pts, dtype=float)]))
    return edges


def _tabulate(f: Callable[[np.ndarray], np.ndarray], mid: np.ndarray) -> np.ndarray:
    vals = np.asarray(f(mid), dtype=float)
    if vals.shape != mid.shape:
        vals = np.array([f(x) for x in mid], dtype=float)
    if not np.all(np.isfinite(vals)):
        raise QuadratureError("tabulated function produced non-finite values")
    return vals


def inner_product_highH(f, g, H: float, T: float, n: int = 2048, breakpoints: Sequence[float] = ()) -> float:
    """<f, g> = H(2H-1) iint f(t) g(s) |t-s|^(2H-2) dt ds for H in (1/2, 1).

    Functions are tabulated at cell midpoints; the weakly singular kernel is
    integrated exactly over every cell pair through the corner identity
    H(2H-1) iint_cell |t-s|^(2H-2) = -(1/2) * double difference of |t-s|^2H.
    Step functions whose jumps are listed in ``breakpoints`` are therefore
    reproduced exactly: the value equals the isometry covariance of their
    increments.
    """
    if not 0.5 < H < 1.0:
        raise DomainError(f"requires H in (1/2, 1), got {H}")
    edges = _cell_edges(T, n, breakpoints)
    mid = 0.5 * (edges[1:] + edges[:-1])
    fv = _tabulate(f, mid)
    gv = _tabulate(g, mid)
    K = np.abs(edges[:, None] - edges[None, :]) ** (2 * H)
    M = -0.5 * (K[1:, 1:] - K[1:, :-1] - K[:-1, 1:] + K[:-1, :-1])
    out = float(fv @ M @ gv)
    if not math.isfinite(out):
        raise QuadratureError("inner product quadrature returned a non-finite value")
    return out


@dataclass(frozen=True)
class BVFunction:
    """Bounded-variation function presented as jump atoms plus a density.

    The low-H inner product integrates against the signed measure of the
    zero-extended function, so boundary jumps at 0 and T enter as atoms.
    ``atoms`` is a sequence of (location, jump size); ``density`` is the
    absolutely continuous part g' (or None).
    """

    atoms: tuple = ()
    density: Callable[[np.ndarray], np.ndarray] | None = None

    @classmethod
    def indicator(cls, u: float) -> "BVFunction":
        """1_[0, u]: unit jump up at 0, unit jump down at u."""
        return cls(atoms=((0.0, 1.0), (float(u), -1.0)))

    @classmethod
    def from_smooth(cls, g: Callable, dg: Callable, T: float) -> "BVFunction":
        """Differentiable g on [0, T]; zero extension adds atoms g(0), -g(T)."""
        return cls(atoms=((0.0, float(g(0.0))), (float(T), -float(g(T)))), density=dg)


def inner_product_lowH(f, g: BVFunction, H: float, T: float, n: int = 2048, breakpoints: Sequence[float] = ()) -> float:
    """<f, g> = H iint f(t) |t-s|^(2H-1) sgn(t-s) dt nu_g(ds) for H in (0, 1/2).

    nu_g carries the atoms of ``g`` (including the boundary jumps of its
    zero extension) plus the density g'(s) ds.  The t-integrals against the
    |t-s|^(2H-1) sgn(t-s) kernel are exact per cell; f is tabulated at cell
    midpoints.
    """
    if not 0.0 < H < 0.5:
        raise DomainError(f"requires H in (0, 1/2), got {H}")
    atom_locs = [loc for loc, _ in g.atoms]
    edges = _cell_edges(T, n, tuple(breakpoints) + tuple(atom_locs))
    mid = 0.5 * (edges[1:] + edges[:-1])
    fv = _tabulate(f, mid)

    total = 0.0
    # Atom part: sum_j w_j int f(t) |t-s_j|^(2H-1) sgn(t-s_j) dt,
    # with exact antiderivative |t-s|^(2H) / (2H) in t.
    for loc, w in g.atoms:
        if w == 0.0:
            continue
        prim = np.abs(edges - loc) ** (2 * H) / (2 * H)
        total += w * float(fv @ np.diff(prim))
    # Density part: exact cell-pair integral of the odd kernel via the
    # primitive F(t,s) = -(t-s)|t-s|^(2H) / (2H(2H+1)).
    if g.density is not None:
        gv = _tabulate(g.density, mid)
        d = edges[:, None] - edges[None, :]
        F = -d * np.abs(d) ** (2 * H) / (2 * H * (2 * H + 1))
        M = F[1:, 1:] - F[1:, :-1] - F[:-1, 1:] + F[:-1, :-1]
        total += float(fv @ M @ gv)
    out = H * total
    if not math.isfinite(out):
        raise QuadratureError("inner product quadrature returned a non-finite value")
    return out


# ---------------------------------------------------------------------------
# CSV dump
# ---------------------------------------------------------------------------


def write_path_csv(path, stream) -> None:
    """Write a RealPath as `t,x` or a ComplexPath as `t,re,im` rows."""
    t = path.grid.times
    v = path.values
    if np.iscomplexobj(v):
        stream.write("t,re,im\n")
        for k in range(t.size):
            stream.write(f"{t[k]:.17g},{v[k].real:.17g},{v[k].imag:.17g}\n")
    else:
        stream.write("t,x\n")
        for k in range(t.size):
            stream.write(f"{t[k]:.17g},{v[k]:.17g}\n")


def fast_step_count(n_min: int) -> int:
    """Smallest FFT-friendly step count >= n_min (keeps 2n fast too)."""
    return int(next_fast_len(int(n_min)))
