import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ringgas import (
    Geometry, OccupationState, ScattererField, Site, evolve, evolve_backward,
    j_indicator, loop_decomposition, ring_counts_at, sample_initial,
    sample_scatterers, step, step_backward, tau, tau_inverse, tau_inverse_table,
    tau_table,
)
from conftest import naive_J, naive_step, naive_tau


def test_geometry_counts_and_validation():
    g = Geometry(5, 2)
    assert (g.rings, g.links, g.size) == (5, 4, 25)
    assert Geometry(3, 0).size == 3
    with pytest.raises(ValueError):
        Geometry(0, 1)
    with pytest.raises(ValueError):
        Geometry(3, -1)
    with pytest.raises(ValueError):
        g.check_site((5, 0))
    with pytest.raises(ValueError):
        g.check_site((0, 3))


def test_boundary_links_read_zero():
    g = Geometry(4, 2)
    f = ScattererField(g, np.ones((4, 4), dtype=bool))
    assert f.xi(0, -2) == 1 and f.xi(0, 1) == 1
    assert f.xi(0, -3) == 0 and f.xi(0, 2) == 0 and f.xi(0, 7) == 0


def test_field_is_read_only():
    f = sample_scatterers(Geometry(4, 1), 0.5, 1)
    with pytest.raises(ValueError):
        f.bits[0, 0] = True


class TestJIndicator:
    def test_empty_field(self):
        f = ScattererField.empty(Geometry(6, 2))
        assert all(j_indicator(f, k, i) == 0 for k in range(6) for i in range(-4, 4))

    def test_single_scatterer(self):
        f = ScattererField.from_links(Geometry(6, 2), [(3, 0)])
        assert j_indicator(f, 3, 0) == 1
        assert j_indicator(f, 3, 1) == 0 and j_indicator(f, 2, 0) == 0

    def test_adjacent_pair_blocks_both(self):
        f = ScattererField.from_links(Geometry(6, 2), [(1, -1), (1, 0)])
        assert j_indicator(f, 1, -1) == 0
        assert j_indicator(f, 1, 0) == 0

    def test_boundary_link_only_has_one_neighbour(self):
        f = ScattererField.from_links(Geometry(6, 2), [(0, -2), (0, 1)])
        assert j_indicator(f, 0, -2) == 1 and j_indicator(f, 0, 1) == 1


class TestTau:
    def test_empty_field_rotates(self):
        g = Geometry(5, 1)
        f = ScattererField.empty(g)
        assert tau(f, (4, -1)) == Site(0, -1)
        assert tau(f, (2, 1)) == Site(3, 1)

    def test_single_scatterer_swaps_rings(self):
        g = Geometry(6, 2)
        f = ScattererField.from_links(g, [(2, 0)])
        assert tau(f, (2, 0)) == Site(3, 1)
        assert tau(f, (2, 1)) == Site(3, 0)
        assert tau(f, (2, -1)) == Site(3, -1)

    def test_full_column_blocks_everything(self):
        g = Geometry(6, 2)
        f = ScattererField.from_links(g, [(4, i) for i in range(-2, 2)])
        # oracle: the literal formula on the raw bits
        assert all(naive_J(f.bits, 2, 4, i) == 0 for i in range(-3, 3))
        for i in range(-2, 3):
            assert tau(f, (4, i)) == Site(5, i)

    def test_matches_naive_formula(self, small_field):
        g = small_field.geometry
        for k in range(g.R):
            for i in range(-g.N, g.N + 1):
                assert tuple(tau(small_field, (k, i))) == naive_tau(small_field.bits, g.N, k, i)

    def test_inverse_examples(self):
        g = Geometry(6, 2)
        assert tau_inverse(ScattererField.empty(g), (0, 1)) == Site(5, 1)
        f = ScattererField.from_links(g, [(2, 0)])
        assert tau_inverse(f, (3, 1)) == Site(2, 0)
        assert tau_inverse(f, (3, 0)) == Site(2, 1)

    def test_tables_agree_with_scalar_map(self, small_field):
        g = small_field.geometry
        image = tau_table(small_field)
        preimage = tau_inverse_table(small_field)
        for n in range(g.size):
            x = g.site_at(n)
            assert g.site_at(image[n]) == tau(small_field, x)
            assert g.site_at(preimage[n]) == tau_inverse(small_field, x)


fields = st.builds(
    lambda R, N, mu, seed: sample_scatterers(Geometry(R, N), mu, seed),
    st.integers(1, 8), st.integers(0, 3), st.floats(0, 1), st.integers(0, 2**32),
)


@settings(max_examples=200, deadline=None)
@given(fields)
def test_tau_is_a_permutation_with_inverse(field):
    g = field.geometry
    image = tau_table(field)
    assert len(np.unique(image)) == g.size
    assert np.array_equal(tau_inverse_table(field)[image], np.arange(g.size))


@settings(max_examples=200, deadline=None)
@given(fields)
def test_row_advance_and_single_branch(field):
    g = field.geometry
    J = field.jump_mask
    # neighbouring links never jump together
    assert not np.any(J[:, 1:] & J[:, :-1])
    for n, m in enumerate(tau_table(field)):
        x, y = g.site_at(n), g.site_at(m)
        assert y.k == (x.k + 1) % g.R
        assert abs(y.i - x.i) <= 1


class TestStep:
    def test_empty_field_rotates_rows(self):
        g = Geometry(7, 2)
        s = sample_initial(g, np.full(5, 0.5), 3)
        out = step(s, ScattererField.empty(g))
        assert np.array_equal(out.bits, np.roll(s.bits, 1, axis=0))
        assert np.array_equal(out.ring_counts(), s.ring_counts())
        assert out.time == 1

    def test_lone_particle_jumps(self):
        g = Geometry(6, 2)
        f = ScattererField.from_links(g, [(2, 0)])
        out = step(OccupationState.from_sites(g, [(2, 0)]), f)
        assert out == OccupationState.from_sites(g, [(3, 1)], time=1)

    def test_matches_naive_step(self, small_field):
        g = small_field.geometry
        s = sample_initial(g, np.full(g.rings, 0.5), 5)
        assert np.array_equal(step(s, small_field).bits, naive_step(small_field.bits, g.N, s.bits))

    def test_step_back_round_trip(self, small_field):
        s = sample_initial(small_field.geometry, np.full(5, 0.4), 9)
        assert step_backward(step(s, small_field), small_field) == s

    def test_geometry_mismatch(self, small_field):
        s = sample_initial(Geometry(8, 1), np.full(3, 0.5), 1)
        with pytest.raises(ValueError):
            step(s, small_field)
        with pytest.raises(ValueError):
            evolve(s, small_field, 2)

    def test_multiword_rows(self):
        # 2N + 1 = 131 rings spans three words
        g = Geometry(12, 65)
        f = sample_scatterers(g, 0.45, 21)
        s = sample_initial(g, np.linspace(0, 1, g.rings), 22)
        assert np.array_equal(step(s, f).bits, naive_step(f.bits, g.N, s.bits))
        assert evolve_backward(evolve(s, f, 30), f, 30) == s


class TestEvolve:
    def test_zero_steps_is_identity(self, small_field):
        s = sample_initial(small_field.geometry, np.full(5, 0.5), 1)
        assert evolve(s, small_field, 0) == s
        assert evolve_backward(s, small_field, 0) == s

    def test_empty_field_full_rotation(self):
        g = Geometry(9, 2)
        s = sample_initial(g, np.full(5, 0.5), 4)
        out = evolve(s, ScattererField.empty(g), 9)
        assert np.array_equal(out.words, s.words) and out.time == 9

    def test_empty_field_backward_rotates_down(self):
        g = Geometry(9, 2)
        s = sample_initial(g, np.full(5, 0.5), 4)
        s.time = 1
        out = evolve_backward(s, ScattererField.empty(g), 1)
        assert np.array_equal(out.bits, np.roll(s.bits, -1, axis=0))

    def test_matches_repeated_step(self, small_field):
        s = sample_initial(small_field.geometry, np.full(5, 0.5), 2)
        ref = s
        for _ in range(19):
            ref = step(ref, small_field)
        assert evolve(s, small_field, 19) == ref

    @pytest.mark.parametrize("R,N,seed", [(4, 1, 0), (5, 2, 1), (6, 2, 2), (6, 1, 3)])
    def test_lcm_of_periods_returns_home(self, R, N, seed):
        g = Geometry(R, N)
        f = sample_scatterers(g, 0.5, seed)
        period = math.lcm(*loop_decomposition(f).periods())
        s = sample_initial(g, np.full(g.rings, 0.5), seed + 100)
        back = evolve(s, f, period)
        assert np.array_equal(back.words, s.words)

    def test_ring_counts_at_matches_evolve(self, small_field):
        s = sample_initial(small_field.geometry, np.full(5, 0.6), 3)
        times = [7, 0, 3, 20]
        counts = ring_counts_at(s, small_field, times)
        for row, t in zip(counts, times):
            assert np.array_equal(row, evolve(s, small_field, t).ring_counts())


@settings(max_examples=100, deadline=None)
@given(fields, st.integers(0, 2**32), st.integers(0, 40))
def test_round_trip_and_conservation(field, seed, t):
    g = field.geometry
    s = sample_initial(g, np.full(g.rings, 0.5), seed)
    out = evolve(s, field, t)
    assert out.popcount() == s.popcount()
    assert evolve_backward(out, field, t) == s


def test_step_permutes_bits_as_multiset(small_field):
    # tag every site with a distinct label and push labels along tau_table
    g = small_field.geometry
    image = tau_table(small_field)
    labels = np.arange(g.size)
    moved = np.empty_like(labels)
    moved[image] = labels
    assert sorted(moved) == list(labels)


class TestSampling:
    def test_scatterer_extremes(self):
        g = Geometry(20, 3)
        assert not sample_scatterers(g, 0.0, 1).bits.any()
        full = sample_scatterers(g, 1.0, 1)
        assert full.bits.all()
        assert full.xi(0, -4) == 0 and full.xi(0, 3) == 0

    def test_scatterer_density_binomial(self):
        g = Geometry(10_000, 10)
        n = g.R * g.links
        f = sample_scatterers(g, 0.5, 7)
        assert abs(f.bits.sum() - 0.5 * n) <= 5 * math.sqrt(n * 0.25)

    def test_scatterer_errors_and_determinism(self):
        g = Geometry(10, 2)
        with pytest.raises(ValueError):
            sample_scatterers(g, 1.5, 0)
        assert np.array_equal(sample_scatterers(g, 0.3, 5).bits, sample_scatterers(g, 0.3, 5).bits)

    def test_initial_extremes(self):
        g = Geometry(30, 2)
        assert sample_initial(g, np.zeros(5), 1).popcount() == 0
        assert sample_initial(g, np.ones(5), 1).popcount() == g.size

    def test_initial_density_binomial(self):
        g = Geometry(100_000, 2)
        s = sample_initial(g, np.full(5, 0.3), 8)
        radius = 5 * math.sqrt(0.3 * 0.7 / g.R)
        assert np.all(np.abs(s.ring_counts() / g.R - 0.3) <= radius)

    def test_initial_errors(self):
        g = Geometry(10, 1)
        with pytest.raises(ValueError):
            sample_initial(g, [0.5, 0.5], 0)
        with pytest.raises(ValueError):
            sample_initial(g, [0.5, 1.2, 0.5], 0)


@settings(max_examples=60, deadline=None)
@given(st.integers(2, 10), st.integers(0, 3), st.integers(0, 2**32), st.data())
def test_dependence_cone(R, N, seed, data):
    g = Geometry(R, N)
    rng = np.random.default_rng(seed)
    f = sample_scatterers(g, 0.5, seed)
    t = data.draw(st.integers(0, R - 1))
    k = data.draw(st.integers(0, R - 1))
    cone = {(k - n) % R for n in range(1, t + 1)}
    bits = f.bits.copy()
    outside = [r for r in range(R) if r not in cone]
    flips = rng.random((len(outside), g.links)) < 0.5
    bits[outside] ^= flips
    s = sample_initial(g, np.full(g.rings, 0.5), seed + 1)
    a = evolve(s, f, t).bits[k]
    b = evolve(s, f.with_bits(bits), t).bits[k]
    assert np.array_equal(a, b)
