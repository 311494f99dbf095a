import itertools
import math

import numpy as np
import pytest

from nlwqed import (
    BasisTooLarge,
    CouplingPoint,
    EmitterSpec,
    LatticeSpec,
    RegionOverlap,
    SectorBasis,
    TruncationRule,
    WavepacketSpec,
    assemble_hamiltonian,
    build_wavepacket,
    initial_state,
    photon_number_map,
    populations,
    project_onto_doublon_modes,
    small_atom,
    triplon_band,
)
from nlwqed.hilbert import (
    StateVector,
    _pair_count,
    _triple_count,
    doublon_mode_vector,
    excitation_expectation,
)
from nlwqed.model import BandModel


# ---------------------------------------------------------------------------
# brute-force oracle: dense bosonic Hamiltonian from first principles
# ---------------------------------------------------------------------------

def dense_reference(lattice, emitters, total, ring=False):
    """Dense sector Hamiltonian built from explicit occupation vectors,
    independent of the production assembly code."""
    N = lattice.n_sites
    n_em = len(emitters)
    states = []
    for bits in itertools.product((0, 1), repeat=n_em):
        p = total - sum(bits)
        if p < 0:
            continue
        for occ in itertools.combinations_with_replacement(range(N), p):
            counts = [0] * N
            for s in occ:
                counts[s] += 1
            states.append((bits, tuple(counts)))
    index = {s: i for i, s in enumerate(states)}
    H = np.zeros((len(states), len(states)), complex)
    bonds = [(n, n + 1) for n in range(N - 1)] + ([(N - 1, 0)] if ring else [])
    for i, (bits, counts) in enumerate(states):
        H[i, i] += -0.5 * lattice.nonlinearity * sum(c * (c - 1) for c in counts)
        H[i, i] += sum(
            0.5 * em.detuning * (1 if b else -1) for em, b in zip(emitters, bits)
        )
        for a, b in bonds:
            for src, dst in ((a, b), (b, a)):
                if counts[src] == 0:
                    continue
                new = list(counts)
                new[src] -= 1
                new[dst] += 1
                j = index[(bits, tuple(new))]
                H[j, i] += -lattice.hopping * math.sqrt(counts[src] * (counts[dst] + 1))
        for which, (em, b) in enumerate(zip(emitters, bits)):
            if b != 1:
                continue
            for cp in em.couplings:
                new_bits = list(bits)
                new_bits[which] = 0
                new = list(counts)
                new[cp.site] += 1
                j = index[(tuple(new_bits), tuple(new))]
                amp = cp.strength * np.exp(1j * cp.phase) * math.sqrt(counts[cp.site] + 1)
                H[j, i] += amp
                H[i, j] += np.conj(amp)
    return H, states, index


def embed(basis, states):
    """Map brute-force state order onto production basis indices."""
    perm = np.zeros(len(states), dtype=int)
    for i, (bits, counts) in enumerate(states):
        photons = tuple(
            s for s, c in enumerate(counts) for _ in range(c)
        )
        perm[i] = basis.index_of(tuple(bits), photons)
    return perm


# ---------------------------------------------------------------------------
# enumeration
# ---------------------------------------------------------------------------

class TestEnumeration:
    def test_single_excitation_dimension(self):
        lat = LatticeSpec(8, 1.0, 6.0)
        basis = SectorBasis(lat, (small_atom(4, 0.2, -6.633),), 1)
        # N single-photon states (emitter ground) + 1 emitter-excited state
        assert basis.dimension == 8 + 1
        assert basis.block_dimensions() == {(0,): 8, (1,): 1}

    def test_two_excitation_dimension_formula(self):
        lat = LatticeSpec(100, 1.0, 6.0)
        basis = SectorBasis(lat, (small_atom(50, 0.2, -6.633),), 2)
        assert basis.dimension == 100 + 100 * 101 // 2
        # the published working scale follows the same closed form
        assert 2000 + _pair_count(2000) == 2_003_000

    def test_truncated_triple_count_vs_bruteforce(self):
        N, r_max = 12, 4
        expected = sum(
            1
            for occ in itertools.combinations_with_replacement(range(N), 3)
            if occ[-1] - occ[0] <= r_max
        )
        assert _triple_count(N, r_max) == expected
        lat = LatticeSpec(N, 1.0, 6.0)
        ems = (small_atom(4, 0.1, -6.633), small_atom(8, 0.1, -11.0))
        basis = SectorBasis(lat, ems, 3, TruncationRule(r_max))
        assert basis.by_pattern[(0, 0)].size == expected
        # bound quoted for the truncated sector size
        assert expected <= N * (r_max + 1) * (2 * r_max + 1)

    def test_ordering_is_lexicographic(self):
        lat = LatticeSpec(8, 1.0, 6.0)
        ems = (small_atom(2, 0.1, -6.0), small_atom(5, 0.1, -6.0))
        basis = SectorBasis(lat, ems, 2)
        assert [b.pattern for b in basis.blocks] == [(0, 0), (0, 1), (1, 0), (1, 1)]
        assert [b.n_photons for b in basis.blocks] == [2, 1, 1, 0]

    def test_memory_budget(self):
        lat = LatticeSpec(100, 1.0, 6.0)
        with pytest.raises(BasisTooLarge):
            SectorBasis(lat, (small_atom(50, 0.2, -6.633),), 2, memory_budget=1000)

    def test_index_of_round_trip(self):
        lat = LatticeSpec(10, 1.0, 6.0)
        basis = SectorBasis(lat, (small_atom(5, 0.2, -6.633),), 2)
        block = basis.by_pattern[(0,)]
        for i in range(block.size):
            photons = tuple(conf[i] for conf in block.configs)
            assert basis.index_of((0,), photons) == block.offset + i


# ---------------------------------------------------------------------------
# Hamiltonian assembly
# ---------------------------------------------------------------------------

class TestHamiltonian:
    def test_matches_dense_reference_two_excitations(self):
        lat = LatticeSpec(8, 1.0, 6.0)
        em = EmitterSpec(-6.633, (CouplingPoint(3, 0.3, 0.4), CouplingPoint(5, 0.2, -0.9)))
        basis = SectorBasis(lat, (em,), 2)
        H = assemble_hamiltonian(basis).toarray()
        Href, states, _ = dense_reference(lat, (em,), 2)
        perm = embed(basis, states)
        Hemb = np.zeros_like(H)
        Hemb[np.ix_(perm, perm)] = Href
        assert np.max(np.abs(H - Hemb)) < 1e-14

    def test_matches_dense_reference_three_excitations(self):
        lat = LatticeSpec(8, 1.0, 5.0)
        ems = (
            EmitterSpec(-5.5, (CouplingPoint(2, 0.25, 0.3),)),
            EmitterSpec(-9.0, (CouplingPoint(5, 0.15, -0.2), CouplingPoint(6, 0.1, 0.1))),
        )
        basis = SectorBasis(lat, ems, 3)
        H = assemble_hamiltonian(basis).toarray()
        Href, states, _ = dense_reference(lat, ems, 3)
        perm = embed(basis, states)
        Hemb = np.zeros_like(H)
        Hemb[np.ix_(perm, perm)] = Href
        assert np.max(np.abs(H - Hemb)) < 1e-14

    def test_matches_dense_reference_on_ring(self):
        lat = LatticeSpec(8, 1.0, 6.0)
        basis = SectorBasis(lat, (), 2)
        H = assemble_hamiltonian(basis, boundary="ring").toarray()
        Href, states, _ = dense_reference(lat, (), 2, ring=True)
        perm = embed(basis, states)
        Hemb = np.zeros_like(H)
        Hemb[np.ix_(perm, perm)] = Href
        assert np.max(np.abs(H - Hemb)) < 1e-14

    def test_hermitian_random_specs(self, rng):
        for _ in range(5):
            N = int(rng.randint(8, 14))
            lat = LatticeSpec(N, 1.0, float(rng.uniform(0, 9)))
            n_em = int(rng.randint(1, 3))
            ems = tuple(
                EmitterSpec(
                    float(rng.choice([-1, 1]) * rng.uniform(2.1, 12)),
                    tuple(
                        CouplingPoint(int(rng.randint(0, N)), float(rng.uniform(0, 0.6)),
                                      float(rng.uniform(-np.pi, np.pi)))
                        for _ in range(int(rng.randint(1, 4)))
                    ),
                )
                for _ in range(n_em)
            )
            total = min(n_em + 1, 3)
            trunc = TruncationRule(4) if total == 3 else None
            basis = SectorBasis(lat, ems, total, trunc)
            H = assemble_hamiltonian(basis)
            assert abs(H - H.getH()).max() < 1e-14

    def test_zero_coupling_block_diagonalizes(self):
        lat = LatticeSpec(10, 1.0, 6.0)
        em = small_atom(5, 0.0, -6.633)
        basis = SectorBasis(lat, (em,), 2)
        H = assemble_hamiltonian(basis).toarray()
        b1 = basis.by_pattern[(1,)].slice
        b2 = basis.by_pattern[(0,)].slice
        assert np.all(H[b1, b2] == 0) and np.all(H[b2, b1] == 0)

    def test_double_occupancy_energy(self):
        # two photons stacked on one site carry interaction energy -U
        lat = LatticeSpec(8, 1.0, 6.0)
        basis = SectorBasis(lat, (), 2)
        H = assemble_hamiltonian(basis)
        idx = basis.index_of((), (3, 3))
        assert H[idx, idx] == pytest.approx(-6.0)
        idx2 = basis.index_of((), (2, 3))
        assert H[idx2, idx2] == pytest.approx(0.0)
        assert H[idx, idx2] == pytest.approx(-math.sqrt(2.0))


# ---------------------------------------------------------------------------
# states and observables
# ---------------------------------------------------------------------------

class TestStatesAndObservables:
    def test_plane_wave_initial_state(self):
        lat = LatticeSpec(16, 1.0, 6.0)
        em = small_atom(8, 0.3, -6.633)
        basis = SectorBasis(lat, (em,), 2)
        k0 = 2 * np.pi * 4 / 16
        packet = build_wavepacket(WavepacketSpec("plane_wave", k0), lat)
        state = initial_state(basis, packet)
        block = basis.by_pattern[(1,)]
        expect = np.exp(1j * k0 * np.arange(16)) / 4.0
        assert np.allclose(state.data[block.slice], expect, atol=1e-14)
        rep = populations(state)
        assert rep.p_single == pytest.approx(1.0, abs=1e-12)
        assert rep.p_two == pytest.approx(0.0, abs=1e-14)
        assert excitation_expectation(state) == pytest.approx(2.0, abs=1e-12)

    def test_narrow_momentum_limit_approaches_plane_wave(self):
        lat = LatticeSpec(256, 1.0, 6.0)
        k0 = 2 * np.pi * 64 / 256
        pw = build_wavepacket(WavepacketSpec("plane_wave", k0), lat)
        overlaps = []
        for width in (0.03, 0.006):
            g = build_wavepacket(
                WavepacketSpec("gaussian", k0, width, 128.0), lat, clearance_factor=0.0
            )
            overlaps.append(abs(np.vdot(pw, g)))
        assert overlaps[1] > overlaps[0]
        assert overlaps[1] > 0.99

    def test_photon_number_map_indicator(self):
        lat = LatticeSpec(12, 1.0, 6.0)
        em = small_atom(6, 0.3, -6.633)
        basis = SectorBasis(lat, (em,), 2)
        data = np.zeros(basis.dimension, complex)
        data[basis.index_of((1,), (3,))] = 1.0
        density = photon_number_map(StateVector(basis, data))
        expect = np.zeros(12)
        expect[3] = 1.0
        assert np.allclose(density, expect, atol=1e-14)

    def test_photon_number_map_pair_mode(self):
        lat = LatticeSpec(64, 1.0, 6.0)
        basis = SectorBasis(lat, (), 2)
        block = basis.blocks[0]
        vec = doublon_mode_vector(basis, block, 2 * np.pi * 16 / 64)
        density = photon_number_map(StateVector(basis, vec))
        assert density.sum() == pytest.approx(2.0, abs=1e-12)
        interior = density[12:-12]
        assert np.ptp(interior) < 1e-10

    def test_populations_after_free_transmission(self):
        # packet fully to the right of the emitter: everything counts as t
        lat = LatticeSpec(256, 1.0, 6.0)
        em = small_atom(60, 0.0, -6.633)
        basis = SectorBasis(lat, (em,), 2)
        packet = build_wavepacket(
            WavepacketSpec("gaussian", np.pi / 2, 0.05, 180.0), lat
        )
        state = initial_state(basis, packet)
        rep = populations(state)
        assert rep.transmitted == pytest.approx(1.0, abs=1e-10)
        assert rep.reflected == pytest.approx(0.0, abs=1e-12)
        assert rep.total == pytest.approx(1.0, abs=1e-12)

    def test_region_overlap_guard(self):
        lat = LatticeSpec(256, 1.0, 6.0)
        em = small_atom(128, 0.3, -6.633)
        basis = SectorBasis(lat, (em,), 2)
        packet = build_wavepacket(
            WavepacketSpec("gaussian", np.pi / 2, 0.05, 128.0),
            lat,
            clearance_factor=0.0,
        )
        state = initial_state(basis, packet)
        with pytest.raises(RegionOverlap):
            populations(state, check_clearance=True)

    def test_partition_of_unity(self, rng):
        lat = LatticeSpec(24, 1.0, 6.0)
        em = small_atom(12, 0.3, -6.633)
        basis = SectorBasis(lat, (em,), 2)
        data = rng.standard_normal(basis.dimension) + 1j * rng.standard_normal(basis.dimension)
        data /= np.linalg.norm(data)
        rep = populations(StateVector(basis, data))
        assert rep.p_single + rep.p_two == pytest.approx(1.0, abs=1e-12)
        assert rep.p_doublon <= rep.p_two + 1e-15
        assert rep.p_uncorrelated == pytest.approx(rep.p_two - rep.p_doublon, abs=1e-15)
        for v in (rep.transmitted, rep.reflected, rep.u_plus, rep.u_minus):
            assert 0.0 <= v <= 1.0


class TestDoublonProjection:
    @pytest.fixture
    def setup(self):
        lat = LatticeSpec(96, 1.0, 6.0)
        basis = SectorBasis(lat, (), 2)
        band = BandModel(lattice=lat)
        return lat, basis, band

    def test_exact_mode_gives_delta(self, setup):
        lat, basis, band = setup
        block = basis.blocks[0]
        m_target = 20
        K = 2 * np.pi * m_target / 96
        vec = doublon_mode_vector(basis, block, K)
        Ks, coeffs, weight = project_onto_doublon_modes(
            StateVector(basis, vec), band, pattern=()
        )
        peak = int(np.argmax(np.abs(coeffs)))
        assert Ks[peak] == pytest.approx(K, abs=1e-12)
        assert abs(coeffs[peak]) == pytest.approx(1.0, abs=1e-8)
        others = np.abs(np.delete(coeffs, peak))
        assert others.max() < 1e-8
        assert weight == pytest.approx(1.0, abs=1e-9)

    def test_weight_bounded_by_pair_population(self, setup, rng):
        lat, basis, band = setup
        data = rng.standard_normal(basis.dimension) + 1j * rng.standard_normal(basis.dimension)
        data /= np.linalg.norm(data)
        state = StateVector(basis, data)
        _, _, weight = project_onto_doublon_modes(state, band, pattern=())
        assert weight <= 1.0 + 1e-9

    def test_far_apart_product_state_has_tiny_weight(self, setup):
        lat, basis, band = setup
        block = basis.blocks[0]
        A, B = block.configs
        f = np.exp(-((np.arange(96) - 24.0) ** 2) / 18.0)
        g = np.exp(-((np.arange(96) - 72.0) ** 2) / 18.0)
        data = np.zeros(basis.dimension, complex)
        data[block.slice] = f[A] * g[B] + f[B] * g[A]
        data /= np.linalg.norm(data)
        _, _, weight = project_onto_doublon_modes(StateVector(basis, data), band, pattern=())
        assert weight < 0.01


def test_basis_hash_stability():
    lat = LatticeSpec(16, 1.0, 6.0)
    em = small_atom(8, 0.3, -6.633)
    h1 = SectorBasis(lat, (em,), 2).basis_hash()
    h2 = SectorBasis(lat, (em,), 2).basis_hash()
    h3 = SectorBasis(lat, (small_atom(8, 0.31, -6.633),), 2).basis_hash()
    assert h1 == h2 != h3
