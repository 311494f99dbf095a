import math

import numpy as np
import pytest

from nlwqed import (
    DegenerateMomentum,
    LatticeSpec,
    OffResonant,
    PacketTooWide,
    WavepacketSpec,
    build_wavepacket,
    doublon_energy,
    doublon_group_velocity,
    doublon_shape,
    resonant_doublon_momentum,
    resonant_triplon_momentum,
    single_photon_energy,
    single_photon_group_velocity,
    triplon_band,
)
from nlwqed.errors import TruncationNotConverged
from nlwqed.model import band_table, bloch_relative_hamiltonian
from nlwqed.oracles import ring_ground_energy


class TestSinglePhotonBand:
    def test_band_center(self, lattice):
        assert single_photon_energy(np.pi / 2, lattice) == pytest.approx(0.0, abs=1e-12)

    def test_band_bottom(self, lattice):
        assert single_photon_energy(0.0, lattice) == pytest.approx(-2.0)

    def test_third_of_zone(self, lattice):
        assert single_photon_energy(np.pi / 3, lattice) == pytest.approx(-1.0)

    def test_group_velocity_is_derivative(self, lattice):
        k = np.linspace(-np.pi + 0.1, np.pi - 0.1, 17)
        dk = 1e-6
        numeric = (single_photon_energy(k + dk, lattice) - single_photon_energy(k - dk, lattice)) / (2 * dk)
        assert np.allclose(single_photon_group_velocity(k, lattice), numeric, atol=1e-7)


class TestDoublonBand:
    def test_half_zone_value(self, lattice):
        assert doublon_energy(np.pi / 2, lattice) == pytest.approx(-math.sqrt(44.0), rel=1e-14)

    def test_zone_edge_is_minus_u(self):
        for U in (3.0, 6.0, 9.5):
            lat = LatticeSpec(64, 1.0, U)
            assert doublon_energy(np.pi, lat) == pytest.approx(-U, rel=1e-14)

    def test_zone_center(self, lattice):
        assert doublon_energy(0.0, lattice) == pytest.approx(-math.sqrt(52.0), rel=1e-14)

    def test_group_velocity_is_derivative(self, lattice):
        K = np.linspace(-3.0, 3.0, 13)
        dK = 1e-6
        numeric = (doublon_energy(K + dK, lattice) - doublon_energy(K - dK, lattice)) / (2 * dK)
        assert np.allclose(doublon_group_velocity(K, lattice), numeric, atol=1e-7)

    def test_band_ordering_below_free_band(self):
        # attractive pairs never overlap the free band once U > 2J
        for U in (2.5, 6.0, 12.0):
            lat = LatticeSpec(64, 1.0, U)
            K = np.linspace(-np.pi, np.pi, 101)
            assert np.all(doublon_energy(K, lat) <= -U + 1e-12)
            assert -U < -2 * lat.hopping
            assert np.all(single_photon_energy(K, lat) >= -2 * lat.hopping - 1e-12)


class TestDoublonShape:
    def test_half_zone_alpha(self, lattice):
        shape = doublon_shape(np.pi / 2, lattice)
        expected = (-6.0 + math.sqrt(44.0)) / (2.0 * math.sqrt(2.0))
        assert shape.decay_factor == pytest.approx(expected, rel=1e-14)
        assert shape.decay_factor == pytest.approx(0.22389, abs=5e-6)
        assert shape.localization_length == pytest.approx(0.6682, abs=5e-5)

    def test_zone_center_alpha(self, lattice):
        assert doublon_shape(0.0, lattice).decay_factor == pytest.approx(
            (-6.0 + math.sqrt(52.0)) / 4.0, rel=1e-14
        )

    def test_normalization_closed_form(self, lattice):
        for K in (0.3, 1.1, 2.0, 2.9):
            s = doublon_shape(K, lattice)
            alpha, u0 = s.decay_factor, s.normalization
            assert u0**2 == pytest.approx((1 - alpha**2) / (1 + alpha**2), rel=1e-14)
            # unit norm over all integer separations (geometric series)
            total = u0**2 * (1 + 2 * alpha**2 / (1 - alpha**2))
            assert abs(total - 1.0) < 1e-12

    def test_zone_edge_degenerates(self, lattice):
        with pytest.raises(DegenerateMomentum):
            doublon_shape(np.pi, lattice)
        limit = doublon_shape(np.pi, lattice, allow_degenerate=True)
        assert limit.degenerate and limit.localization_length == 0.0

    def test_energy_consistency(self, lattice):
        # E = -J_K (alpha + 1/alpha) must reproduce the closed-form band
        for K in (0.2, 0.9, 1.7, 2.5):
            s = doublon_shape(K, lattice)
            JK = 2.0 * np.cos(K / 2)
            e = -JK * (s.decay_factor + 1.0 / s.decay_factor)
            assert e == pytest.approx(float(doublon_energy(K, lattice)), rel=1e-13)


class TestPairResonance:
    def test_published_operating_point(self, lattice):
        K_r = resonant_doublon_momentum(-6.633, np.pi / 2, lattice)
        assert K_r == pytest.approx(np.pi / 2, abs=5e-3)
        assert doublon_energy(K_r, lattice) == pytest.approx(-6.633, abs=1e-12)

    def test_band_edge_target(self, lattice):
        # detuning placing the target exactly at -U resolves to the zone edge
        assert resonant_doublon_momentum(-6.0, np.pi / 2, lattice) == pytest.approx(np.pi)

    def test_off_resonant_below_band(self, lattice):
        with pytest.raises(OffResonant):
            resonant_doublon_momentum(-20.0, np.pi / 2, lattice)


@pytest.fixture(scope="module")
def band():
    lat = LatticeSpec(64, 1.0, 6.0)
    return triplon_band(lat, np.linspace(-np.pi, np.pi, 33), r_max=10)


class TestTriplonBand:

    def test_parity_symmetry(self, band):
        e = band.triplon_table.energies
        assert np.allclose(e, e[::-1], atol=1e-12)

    def test_below_twice_u(self, band):
        assert np.all(band.triplon_table.energies < -12.0)

    def test_against_ring_ground_state(self, band):
        ring = ring_ground_energy(LatticeSpec(18, 1.0, 6.0), 3)
        assert min(band.triplon_table.band_range) == pytest.approx(ring, abs=1e-6)

    def test_strong_coupling_limit(self):
        lat = LatticeSpec(64, 1.0, 50.0)
        band = triplon_band(lat, np.linspace(-np.pi, np.pi, 9), r_max=6)
        e0 = float(band.triplon_energy(0.0))
        assert abs(e0 + 3 * 50.0) < 4.0 / 50.0 * 1.0 + 0.02
        assert e0 < -3 * 50.0  # binding corrections push below -3U

    def test_truncation_convergence_guard(self):
        # weak binding at small U: a tiny spread cutoff cannot converge
        lat = LatticeSpec(64, 1.0, 2.5)
        with pytest.raises(TruncationNotConverged):
            triplon_band(lat, np.linspace(-np.pi, np.pi, 9), r_max=3)

    def test_resonance_node_identity(self, band):
        table = band.triplon_table
        idx = 10
        target_K = abs(table.momenta[idx])
        detuning2 = float(table.energies[idx]) - float(doublon_energy(1.0, band.lattice))
        found = resonant_triplon_momentum(detuning2, 1.0, band)
        assert found == pytest.approx(target_K, abs=1e-9)

    def test_resonance_off_band(self, band):
        with pytest.raises(OffResonant):
            resonant_triplon_momentum(-30.0, 1.0, band)

    def test_published_cascade_resonance_exists(self, band):
        K_r = resonant_doublon_momentum(-6.633, np.pi / 2, band.lattice)
        KK_r = resonant_triplon_momentum(-11.869, K_r, band)
        assert 0.0 < KK_r < np.pi

    def test_group_velocity_hierarchy(self, band):
        lat = band.lattice
        K_r = resonant_doublon_momentum(-6.633, np.pi / 2, lat)
        KK_r = resonant_triplon_momentum(-11.869, K_r, band)
        v1 = single_photon_group_velocity(np.pi / 2, lat)
        v2 = float(doublon_group_velocity(K_r, lat))
        v3 = abs(float(band.triplon_velocity(KK_r)))
        assert v1 > v2 > v3 > 0


class TestBlochRelativeHamiltonian:
    def test_two_particle_reproduces_closed_form(self, lattice):
        # the generic fixed-momentum builder must agree with the pair band
        for K in (0.0, 0.7, 1.6, 2.8):
            H = bloch_relative_hamiltonian(lattice, 2, K, r_max=60)
            e0 = float(np.linalg.eigvalsh(H)[0])
            assert e0 == pytest.approx(float(doublon_energy(K, lattice)), rel=1e-10)

    def test_hermitian(self, lattice):
        for K in (0.4, 2.0):
            H = bloch_relative_hamiltonian(lattice, 3, K, r_max=8)
            assert np.max(np.abs(H - H.conj().T)) < 1e-14


class TestWavepackets:
    def test_gaussian_unit_norm_and_round_trip(self, big_lattice):
        N = big_lattice.n_sites
        spec = WavepacketSpec("gaussian", np.pi / 2, 0.02, N / 2)
        psi = build_wavepacket(spec, big_lattice)
        assert abs(np.linalg.norm(psi) - 1.0) < 1e-12
        # transform back: the momentum profile must match the generating law
        k = 2 * np.pi * np.fft.fftfreq(N)
        target = np.exp(-((k - np.pi / 2) ** 2) / (4 * 0.02**2)) * np.exp(-1j * k * (N / 2))
        target /= np.linalg.norm(target)
        back = np.fft.fft(psi)
        back /= np.linalg.norm(back)
        phase = np.vdot(target, back)
        assert abs(abs(phase) - 1.0) < 1e-10
        assert np.allclose(back, phase * target, atol=1e-10)

    def test_plane_wave_uniform_modulus(self, big_lattice):
        psi = build_wavepacket(WavepacketSpec("plane_wave", 1.1), big_lattice)
        assert np.allclose(np.abs(psi), 1.0 / math.sqrt(big_lattice.n_sites), atol=1e-14)

    def test_one_sided_exponential_support(self, big_lattice):
        x0 = 300.0
        spec = WavepacketSpec("lorentzian", np.pi / 2, 0.02, x0)
        psi = build_wavepacket(spec, big_lattice)
        n = np.arange(big_lattice.n_sites)
        assert np.all(psi[n > x0] == 0.0)
        envelope = np.abs(psi[(n <= x0) & (n > x0 - 100)])
        ratio = envelope[1:] / envelope[:-1]
        assert np.allclose(ratio, math.exp(0.02), atol=1e-10)

    def test_clearance_guard(self, big_lattice):
        spec = WavepacketSpec("gaussian", np.pi / 2, 0.004, 50.0)
        with pytest.raises(PacketTooWide):
            build_wavepacket(spec, big_lattice)
        with pytest.raises(PacketTooWide):
            build_wavepacket(
                WavepacketSpec("gaussian", np.pi / 2, 0.02, 256.0),
                big_lattice,
                emitter_sites=(260,),
            )

    def test_momentum_width_convention(self, big_lattice):
        # |psi(k)|^2 has standard deviation equal to the width parameter
        width = 0.03
        psi = build_wavepacket(
            WavepacketSpec("gaussian", np.pi / 2, width, 256.0), big_lattice
        )
        k = 2 * np.pi * np.fft.fftfreq(big_lattice.n_sites)
        pk = np.abs(np.fft.fft(psi)) ** 2
        pk /= pk.sum()
        mean = float((pk * k).sum())
        std = math.sqrt(float((pk * (k - mean) ** 2).sum()))
        assert std == pytest.approx(width, rel=1e-3)


def test_band_table_columns(lattice):
    table = band_table(lattice, 41)
    assert set(table) >= {
        "momentum",
        "single_photon_energy",
        "single_photon_velocity",
        "doublon_energy",
        "doublon_velocity",
    }
    assert len(table["momentum"]) == 41
