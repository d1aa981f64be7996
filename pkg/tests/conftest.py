"""Shared fixtures and a naive reference implementation of the dynamics.

The ``naive_*`` helpers work on raw ``(R, 2N)`` scatterer arrays with explicit
boundary handling and plain Python loops; they share no code with the
package and serve as the brute-force oracle.
"""

import numpy as np
import pytest

from ringgas import Geometry, sample_scatterers


def naive_xi(bits, N, k, i):
    R = bits.shape[0]
    if i < -N or i > N - 1:
        return 0
    return int(bits[k % R, i + N])


def naive_J(bits, N, k, i):
    return naive_xi(bits, N, k, i) * (1 - naive_xi(bits, N, k, i - 1)) * (1 - naive_xi(bits, N, k, i + 1))


def naive_tau(bits, N, k, i):
    """Evaluate the three-term sum literally, as a vector combination."""
    R = bits.shape[0]
    up, down = naive_J(bits, N, k, i), naive_J(bits, N, k, i - 1)
    stay = (1 - up) * (1 - down)
    assert up + down + stay == 1
    kk = up * (k + 1) + down * (k + 1) + stay * (k + 1)
    ii = up * (i + 1) + down * (i - 1) + stay * i
    return (kk % R, ii)


def naive_step(bits, N, sigma):
    """Move every occupation bit along the naive map."""
    R = bits.shape[0]
    out = np.zeros_like(sigma)
    for k in range(R):
        for i in range(-N, N + 1):
            kk, ii = naive_tau(bits, N, k, i)
            out[kk, ii + N] = sigma[k, i + N]
    return out


def naive_orbit(bits, N, k, i):
    start = (k, i)
    seen = [start]
    x = naive_tau(bits, N, k, i)
    while x != start:
        seen.append(x)
        x = naive_tau(bits, N, *x)
    return seen


@pytest.fixture
def small_field():
    return sample_scatterers(Geometry(8, 2), 0.5, seed=11)
