import math

import numpy as np
import pytest

from fracbridge.gauss import SeedSpec, complex_fgn, fgn_sqrt_spectrum


@pytest.fixture(scope="session")
def batch_paths():
    """Batched complex-fBm increment generator for Monte Carlo oracles.

    Returns (nreps, n) complex fGn increments on the uniform grid with
    n steps of size h, using one stream per call (tests fix seeds).
    """

    def make(H, n, h, seed, nreps, stream=0):
        sq = fgn_sqrt_spectrum(H, n, h)
        rng = SeedSpec(seed, stream).generator()
        out = np.empty((nreps, n), dtype=complex)
        chunk = max(1, int(4e6) // (2 * n))
        done = 0
        while done < nreps:
            c = min(chunk, nreps - done)
            out[done : done + c] = complex_fgn(sq, rng, size=c)
            done += c
        return out

    return make


def omega_batch(incr, times, T, alpha):
    """Left-point Wiener-integral paths from increment rows."""
    kern = (T - times[:-1]) ** (-alpha)
    zeros = np.zeros((incr.shape[0], 1), dtype=complex)
    return np.concatenate([zeros, np.cumsum(kern * incr, axis=1)], axis=1)


def three_se(samples, target):
    """(ok, message) for a 3-standard-error mean check."""
    est = float(np.mean(samples))
    se = float(np.std(samples) / math.sqrt(len(samples)))
    ok = abs(est - target) <= 3 * se
    return ok, f"estimate {est:.5f} vs target {target:.5f} (se {se:.5f})"
