"""Orbits of the one-step map and the loop decomposition of phase space."""

from collections import Counter
from dataclasses import dataclass

import numpy as np

from .lattice import Geometry, ScattererField, tau, tau_table

__all__ = [
    "Orbit", "LoopDecomposition", "orbit_of", "loop_decomposition",
    "period_histogram", "generate_anomalous_field", "ring_span",
]


def _canonical_key(site):
    return (site.i, site.k)


@dataclass(frozen=True)
class Orbit:
    """A cycle of ``tau`` listed from its smallest ``(i, k)`` site."""

    sites: tuple
    period: int

    def __post_init__(self):
        if len(self.sites) != self.period:
            raise ValueError("orbit length and period disagree")

    def __contains__(self, site):
        return tuple(site) in set(self.sites)

    @property
    def rings(self):
        return sorted({s.i for s in self.sites})


@dataclass(frozen=True)
class LoopDecomposition:
    geometry: Geometry
    orbits: tuple

    def __len__(self):
        return len(self.orbits)

    def __iter__(self):
        return iter(self.orbits)

    def periods(self):
        return [o.period for o in self.orbits]

    def orbit_containing(self, site):
        for orbit in self.orbits:
            if site in orbit:
                return orbit
        raise KeyError(site)


def _rotate_to_canonical(cycle):
    start = min(range(len(cycle)), key=lambda n: _canonical_key(cycle[n]))
    return tuple(cycle[start:] + cycle[:start])


def orbit_of(field, x):
    """Iterate ``tau`` from ``x`` until it returns."""
    x = field.geometry.check_site(x)
    cycle = [x]
    y = tau(field, x)
    # the period never exceeds the site count, so this terminates
    while y != x:
        cycle.append(y)
        y = tau(field, y)
    return Orbit(_rotate_to_canonical(cycle), len(cycle))


def loop_decomposition(field):
    """Partition phase space into the cycles of ``tau``.

    Runs in time and memory linear in the site count, using the vectorized
    image table and a visited bitmap.
    """
    g = field.geometry
    image = tau_table(field)
    visited = np.zeros(g.size, dtype=bool)
    # visiting in (i, k) order makes the first site of each cycle its canonical representative
    order = np.lexsort((np.arange(g.size) // g.rings, np.arange(g.size) % g.rings))
    orbits = []
    for start in order:
        if visited[start]:
            continue
        cycle = []
        x = int(start)
        while not visited[x]:
            visited[x] = True
            cycle.append(x)
            x = int(image[x])
        sites = tuple(g.site_at(n) for n in cycle)
        orbits.append(Orbit(sites, len(sites)))
    return LoopDecomposition(g, tuple(orbits))


def period_histogram(decomposition):
    return dict(sorted(Counter(o.period for o in decomposition.orbits).items()))


def ring_span(orbit):
    """Number of distinct rings an orbit visits."""
    return len({s.i for s in orbit.sites})


def generate_anomalous_field(geometry, pattern, **params):
    """Structured scatterer fields with long-range order.

    ``pattern`` is one of:

    ``"isolated"``
        one scatterer on link ``(k0, i0)``; defaults to ``(0, -N)``.
    ``"single-column"``
        every link of row ``k0`` (default 0) occupied, which blocks all jumps.
    ``"diagonal"``
        a scatterer on link ``i`` at row ``(offset + stride * i) mod R``;
        ``stride`` defaults to 1 and must not be a multiple of ``R`` so that
        neighbouring links never share a row.
    """
    g = geometry
    bits = np.zeros((g.R, g.links), dtype=bool)
    if pattern == "isolated":
        k0 = params.get("k0", 0)
        i0 = params.get("i0", -g.N)
        if g.N == 0:
            raise ValueError("isolated pattern needs at least one link (N >= 1)")
        if not (0 <= k0 < g.R and -g.N <= i0 < g.N):
            raise ValueError(f"link {(k0, i0)} outside geometry")
        bits[k0, i0 + g.N] = True
    elif pattern == "single-column":
        k0 = params.get("k0", 0)
        if not 0 <= k0 < g.R:
            raise ValueError(f"row {k0} outside geometry")
        bits[k0, :] = True
    elif pattern == "diagonal":
        stride = params.get("stride", 1)
        offset = params.get("offset", 0)
        if g.links > 1 and stride % g.R == 0:
            raise ValueError("diagonal stride must not be a multiple of R")
        for i in range(-g.N, g.N):
            bits[(offset + stride * i) % g.R, i + g.N] = True
    else:
        raise ValueError(f"unknown pattern {pattern!r}")
    return ScattererField(g, bits)
