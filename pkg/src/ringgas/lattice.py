"""Phase space, scatterer field and the bijective one-step map.

The phase space is ``R`` rows by ``2N + 1`` rings.  Rows ``k`` are 0-based
and wrap modulo ``R``; rings keep the signed index ``i`` in ``[-N, N]``.
A scatterer on link ``i`` sits between rings ``i`` and ``i + 1``; only links
``-N .. N-1`` are stored and every other link reads as empty.

Occupations are stored packed: one row of ``uint64`` words per ``k``, with
ring ``i`` at bit ``i + N``.  A time step swaps the two ring bits across
every link whose jump indicator is set and then advances all rows by one.
"""

from dataclasses import dataclass
from functools import cached_property
from typing import NamedTuple

import numpy as np

from .rng import make_rng

__all__ = [
    "Geometry", "Site", "ScattererField", "OccupationState",
    "j_indicator", "tau", "tau_inverse", "tau_table", "tau_inverse_table",
    "step", "step_backward", "evolve", "evolve_backward", "ring_counts_at",
    "sample_scatterers", "sample_initial",
]


@dataclass(frozen=True)
class Geometry:
    R: int
    N: int

    def __post_init__(self):
        if int(self.R) != self.R or self.R < 1:
            raise ValueError(f"R must be a positive integer, got {self.R!r}")
        if int(self.N) != self.N or self.N < 0:
            raise ValueError(f"N must be a non-negative integer, got {self.N!r}")

    @property
    def rings(self):
        return 2 * self.N + 1

    @property
    def links(self):
        return 2 * self.N

    @property
    def size(self):
        return self.R * self.rings

    @property
    def words(self):
        """Number of 64-bit words per packed row."""
        return (self.rings + 63) // 64

    def ring_indices(self):
        return np.arange(-self.N, self.N + 1)

    def contains(self, site):
        k, i = site
        return 0 <= k < self.R and -self.N <= i <= self.N

    def check_site(self, site):
        if not self.contains(site):
            raise ValueError(f"site {tuple(site)} outside geometry R={self.R}, N={self.N}")
        return Site(int(site[0]), int(site[1]))

    def flat_index(self, site):
        k, i = site
        return k * self.rings + (i + self.N)

    def site_at(self, index):
        k, col = divmod(int(index), self.rings)
        return Site(k, col - self.N)


class Site(NamedTuple):
    k: int
    i: int


@dataclass(frozen=True, eq=False)
class ScattererField:
    """Quenched scatterer bits ``xi(k, i)`` on the stored links.

    ``bits`` has shape ``(R, 2N)``; column ``i + N`` holds link ``i``.
    ``mu`` records the Bernoulli parameter the field was drawn with, if any.
    """

    geometry: Geometry
    bits: np.ndarray
    mu: float | None = None

    def __post_init__(self):
        g = self.geometry
        bits = np.array(self.bits, dtype=bool, copy=True)
        if bits.shape != (g.R, g.links):
            raise ValueError(f"scatterer bits must have shape {(g.R, g.links)}, got {bits.shape}")
        bits.flags.writeable = False
        object.__setattr__(self, "bits", bits)

    @classmethod
    def empty(cls, geometry):
        return cls(geometry, np.zeros((geometry.R, geometry.links), dtype=bool), mu=0.0)

    @classmethod
    def from_links(cls, geometry, links):
        """Build a field with scatterers on the given ``(k, i)`` links."""
        bits = np.zeros((geometry.R, geometry.links), dtype=bool)
        for k, i in links:
            if not (0 <= k < geometry.R and -geometry.N <= i < geometry.N):
                raise ValueError(f"link {(k, i)} outside geometry")
            bits[k, i + geometry.N] = True
        return cls(geometry, bits)

    def xi(self, k, i):
        g = self.geometry
        if -g.N <= i < g.N:
            return int(self.bits[k % g.R, i + g.N])
        return 0

    def with_bits(self, bits):
        return ScattererField(self.geometry, bits, self.mu)

    @cached_property
    def _padded(self):
        # links -N-1 .. N; the two end columns are the forced-zero boundary links
        g = self.geometry
        pad = np.zeros((g.R, g.links + 2), dtype=bool)
        pad[:, 1:-1] = self.bits
        return pad

    @cached_property
    def jump_mask(self):
        """Indicator ``J(k, i)`` for the stored links, shape ``(R, 2N)``."""
        pad = self._padded
        mask = pad[:, 1:-1] & ~pad[:, :-2] & ~pad[:, 2:]
        mask.flags.writeable = False
        return mask

    @cached_property
    def jump_words(self):
        """``jump_mask`` packed like occupation rows: bit ``i + N`` flags link ``i``."""
        g = self.geometry
        cols = np.zeros((g.R, g.rings), dtype=bool)
        cols[:, :g.links] = self.jump_mask
        return _pack(cols, g.words)

    @cached_property
    def _jump_words_twice(self):
        return np.concatenate([self.jump_words, self.jump_words])


@dataclass(eq=False)
class OccupationState:
    """Packed occupation bits ``sigma(k, i)`` at integer time ``time``."""

    geometry: Geometry
    words: np.ndarray
    time: int = 0

    def __post_init__(self):
        g = self.geometry
        words = np.ascontiguousarray(self.words, dtype=np.uint64)
        if words.shape != (g.R, g.words):
            raise ValueError(f"packed words must have shape {(g.R, g.words)}, got {words.shape}")
        self.words = words
        if self.time < 0:
            raise ValueError("time must be non-negative")

    @classmethod
    def from_bits(cls, geometry, bits, time=0):
        bits = np.asarray(bits, dtype=bool)
        if bits.shape != (geometry.R, geometry.rings):
            raise ValueError(f"bits must have shape {(geometry.R, geometry.rings)}, got {bits.shape}")
        return cls(geometry, _pack(bits, geometry.words), time)

    @classmethod
    def from_sites(cls, geometry, sites, time=0):
        bits = np.zeros((geometry.R, geometry.rings), dtype=bool)
        for site in sites:
            k, i = geometry.check_site(site)
            bits[k, i + geometry.N] = True
        return cls.from_bits(geometry, bits, time)

    @property
    def bits(self):
        """Unpacked ``(R, 2N + 1)`` boolean view of the occupations."""
        return _unpack(self.words, self.geometry.rings)

    def occupied(self, site):
        k, i = self.geometry.check_site(site)
        b = i + self.geometry.N
        return bool((int(self.words[k, b >> 6]) >> (b & 63)) & 1)

    def ring_counts(self):
        counts = np.empty(self.geometry.rings, dtype=np.int64)
        for b in range(self.geometry.rings):
            counts[b] = np.count_nonzero(self.words[:, b >> 6] & np.uint64(1 << (b & 63)))
        return counts

    def popcount(self):
        return int(np.bitwise_count(self.words).sum())

    def copy(self):
        return OccupationState(self.geometry, self.words.copy(), self.time)

    def __eq__(self, other):
        if not isinstance(other, OccupationState):
            return NotImplemented
        return (self.geometry == other.geometry and self.time == other.time
                and np.array_equal(self.words, other.words))


def _pack(bits, nwords):
    R, width = bits.shape
    padded = np.zeros((R, 64 * nwords), dtype=bool)
    padded[:, :width] = bits
    packed = np.packbits(padded, axis=1, bitorder="little")
    return np.ascontiguousarray(packed).view("<u8").astype(np.uint64)


def _unpack(words, width):
    as_bytes = np.ascontiguousarray(words.astype("<u8")).view(np.uint8)
    return np.unpackbits(as_bytes, axis=1, bitorder="little")[:, :width].astype(bool)


def _shr1(x):
    out = x >> np.uint64(1)
    if x.shape[1] > 1:
        out[:, :-1] |= x[:, 1:] << np.uint64(63)
    return out


def _shl1(x):
    out = x << np.uint64(1)
    if x.shape[1] > 1:
        out[:, 1:] |= x[:, :-1] >> np.uint64(63)
    return out


def _swap_links(words, mask):
    """Swap ring bits ``b`` and ``b + 1`` wherever ``mask`` has bit ``b``, in place.

    Set bits of ``mask`` are never adjacent, so the swaps are disjoint.
    """
    if words.shape[1] == 1:
        d = words >> np.uint64(1)
        d ^= words
        d &= mask
        words ^= d
        d <<= np.uint64(1)
        words ^= d
    else:
        d = (words ^ _shr1(words)) & mask
        words ^= d
        words ^= _shl1(d)


def _check_same_geometry(state, field):
    if state.geometry != field.geometry:
        raise ValueError(f"geometry mismatch: state {state.geometry} vs field {field.geometry}")


def j_indicator(field, k, i):
    """Effective jump gate on link ``i`` at row ``k`` (0 outside the stored links)."""
    return field.xi(k, i) * (1 - field.xi(k, i - 1)) * (1 - field.xi(k, i + 1))


def tau(field, x):
    g = field.geometry
    k, i = g.check_site(x)
    k1 = (k + 1) % g.R
    if j_indicator(field, k, i):
        return Site(k1, i + 1)
    if j_indicator(field, k, i - 1):
        return Site(k1, i - 1)
    return Site(k1, i)


def tau_inverse(field, y):
    g = field.geometry
    k, i = g.check_site(y)
    k0 = (k - 1) % g.R
    if j_indicator(field, k0, i - 1):
        return Site(k0, i - 1)
    if j_indicator(field, k0, i):
        return Site(k0, i + 1)
    return Site(k0, i)


def _jump_ext(field):
    # J on links -N-1 .. N, zero at both ends
    g = field.geometry
    ext = np.zeros((g.R, g.links + 2), dtype=np.int64)
    ext[:, 1:-1] = field.jump_mask
    return ext


def tau_table(field):
    """Image of every flat site index under ``tau`` (k-major flattening)."""
    g = field.geometry
    ext = _jump_ext(field)
    up = ext[:, 1:]     # J(k, i), rings -N..N
    down = ext[:, :-1]  # J(k, i - 1)
    k = np.arange(g.R)[:, None]
    col = np.arange(g.rings)[None, :]
    new_col = col + up - down
    new_k = np.broadcast_to((k + 1) % g.R, new_col.shape)
    return (new_k * g.rings + new_col).ravel()


def tau_inverse_table(field):
    g = field.geometry
    ext = _jump_ext(field)
    k_prev = (np.arange(g.R) - 1) % g.R
    from_below = ext[k_prev, :-1]  # J(k-1, i-1)
    from_above = ext[k_prev, 1:]   # J(k-1, i)
    col = np.arange(g.rings)[None, :]
    new_col = col - from_below + from_above
    new_k = np.broadcast_to(k_prev[:, None], new_col.shape)
    return (new_k * g.rings + new_col).ravel()


def step(state, field):
    _check_same_geometry(state, field)
    words = state.words.copy()
    _swap_links(words, field.jump_words)
    return OccupationState(state.geometry, np.roll(words, 1, axis=0), state.time + 1)


def step_backward(state, field):
    _check_same_geometry(state, field)
    if state.time < 1:
        raise ValueError("cannot step back from time 0")
    words = np.roll(state.words, -1, axis=0)
    _swap_links(words, field.jump_words)
    return OccupationState(state.geometry, words, state.time - 1)


def _advance(words, field, steps, offset=0):
    """Evolve ``words`` forward in place in the co-moving frame.

    Co-moving row ``j`` sits at physical row ``j + s`` after ``s`` steps, so
    the swap mask is a contiguous window of the doubled jump table and no row
    rotation is needed until the caller re-anchors.
    """
    R = field.geometry.R
    twice = field._jump_words_twice
    for s in range(offset, offset + steps):
        start = s % R
        _swap_links(words, twice[start:start + R])


def evolve(state, field, steps):
    """Advance ``state`` by ``steps`` applications of the one-step map."""
    _check_same_geometry(state, field)
    if steps < 0:
        raise ValueError("steps must be non-negative")
    words = state.words.copy()
    _advance(words, field, steps)
    return OccupationState(state.geometry, np.roll(words, steps, axis=0), state.time + steps)


def ring_counts_at(state, field, times):
    """Occupied-site count of every ring at each absolute time in ``times``.

    Returns an ``(len(times), 2N + 1)`` integer array.  Ring counts do not
    depend on the row alignment, so the co-moving words are counted directly.
    """
    _check_same_geometry(state, field)
    times = [int(t) for t in times]
    if any(t < state.time for t in times):
        raise ValueError("requested times precede the state time")
    out = np.empty((len(times), state.geometry.rings), dtype=np.int64)
    comoving = state.copy()
    done = 0
    for idx in np.argsort(times, kind="stable"):
        rel = times[idx] - state.time
        _advance(comoving.words, field, rel - done, offset=done)
        done = rel
        out[idx] = comoving.ring_counts()
    return out


def evolve_backward(state, field, steps):
    _check_same_geometry(state, field)
    if steps < 0:
        raise ValueError("steps must be non-negative")
    if steps > state.time:
        raise ValueError(f"cannot evolve back {steps} steps from time {state.time}")
    g = field.geometry
    R = g.R
    twice = field._jump_words_twice
    words = state.words.copy()
    for s in range(steps):
        start = (-s - 1) % R
        _swap_links(words, twice[start:start + R])
    return OccupationState(g, np.roll(words, -steps, axis=0), state.time - steps)


def sample_scatterers(geometry, mu, seed):
    """Independent Bernoulli(``mu``) scatterers on every stored link."""
    if not 0.0 <= mu <= 1.0:
        raise ValueError(f"mu must lie in [0, 1], got {mu}")
    rng = make_rng(seed)
    bits = rng.random((geometry.R, geometry.links)) < mu
    return ScattererField(geometry, bits, mu=float(mu))


def sample_initial(geometry, profile, seed):
    """Product-Bernoulli occupations with ring ``i`` filled at rate ``profile[i + N]``."""
    profile = np.asarray(profile, dtype=float)
    if profile.shape != (geometry.rings,):
        raise ValueError(f"profile must have length {geometry.rings}, got shape {profile.shape}")
    if np.any(~np.isfinite(profile)) or np.any(profile < 0) or np.any(profile > 1):
        raise ValueError("profile values must lie in [0, 1]")
    rng = make_rng(seed)
    bits = rng.random((geometry.R, geometry.rings)) < profile[None, :]
    return OccupationState.from_bits(geometry, bits, time=0)
