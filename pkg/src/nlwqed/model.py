"""Band structure, bound-state shapes, resonances, and incident wavepackets.

Conventions (used consistently across the package):

  * Lattice Hamiltonian  H_w = -sum_n [ J (a_n^+ a_{n+1} + h.c.)
                                        + (U/2) a_n^+ a_n^+ a_n a_n ],
    i.e. an overall minus on both hopping and on-site interaction, so the
    attractive bound bands lie *below* the free band.
  * Single photon:      E_k = -2 J cos k,           v_k = 2 J sin k.
  * Photon pair (K = center-of-mass momentum):
                        E_K = -sqrt(U^2 + [4 J cos(K/2)]^2),
    with relative-coordinate profile u(r) = u0 * alpha^|r| where alpha is
    the root in (0,1) of  J_K a^2 + U a - J_K = 0,  J_K = 2 J cos(K/2).
  * Three-photon band E(KK) has no closed form; it is tabulated from the
    fixed-momentum relative-coordinate Hamiltonian (Bloch-reduced center
    of mass, relative spread truncated at r_max).

All energies are in units of J, times in 1/J, momenta in radians per site.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import PchipInterpolator
from scipy.optimize import brentq

from .errors import DegenerateMomentum, OffResonant, PacketTooWide, TruncationNotConverged

_DEGENERATE_EPS = 1e-12


@dataclass(frozen=True)
class LatticeSpec:
    """Waveguide: a chain of n_sites coupled nonlinear cavities."""

    n_sites: int
    hopping: float = 1.0
    nonlinearity: float = 0.0

    def __post_init__(self) -> None:
        if self.n_sites < 8:
            raise ValueError(f"n_sites must be >= 8, got {self.n_sites}")
        if self.hopping <= 0:
            raise ValueError("hopping must be positive")
        if self.nonlinearity < 0:
            raise ValueError("nonlinearity must be >= 0 (attractive convention)")


@dataclass(frozen=True)
class CouplingPoint:
    """One physical emitter-waveguide contact: site index, strength, phase."""

    site: int
    strength: float
    phase: float = 0.0

    def __post_init__(self) -> None:
        if self.strength < 0:
            raise ValueError("coupling strength must be >= 0")


@dataclass(frozen=True)
class EmitterSpec:
    """Two-level emitter, possibly coupled at several points (giant atom).

    ``detuning`` is the transition frequency relative to the cavity
    frequency (frame rotating at the cavity frequency); the far-detuned
    working regime requires |detuning| > 2 J.
    """

    detuning: float
    couplings: tuple[CouplingPoint, ...]

    def __post_init__(self) -> None:
        if len(self.couplings) == 0:
            raise ValueError("emitter needs at least one coupling point")

    @property
    def sites(self) -> tuple[int, ...]:
        return tuple(c.site for c in self.couplings)

    @property
    def min_site(self) -> int:
        return min(self.sites)

    @property
    def max_site(self) -> int:
        return max(self.sites)

    def validate_against(self, lattice: LatticeSpec) -> None:
        for c in self.couplings:
            if not 0 <= c.site < lattice.n_sites:
                raise ValueError(f"coupling site {c.site} outside lattice")
        if abs(self.detuning) <= 2 * lattice.hopping:
            raise ValueError(
                "emitter is not far detuned: |detuning| must exceed the "
                f"half-bandwidth 2J = {2 * lattice.hopping}"
            )


def small_atom(site: int, strength: float, detuning: float) -> EmitterSpec:
    """Emitter coupled at a single site with zero phase."""
    return EmitterSpec(detuning=detuning, couplings=(CouplingPoint(site, strength),))


def antisymmetric_three_point(
    center: int, strength: float, phase_step: float, detuning: float
) -> EmitterSpec:
    """Giant atom on sites {center-1, center, center+1} with equal strengths
    and antisymmetric phases (+2*phase_step, 0, -2*phase_step).

    The outer legs carry twice the nominal phase parameter, with the sign
    chosen so that positive phase_step steers the generated photon pair
    forward (transmission direction); the published operating points for
    this layout are quoted in these units.
    """
    return EmitterSpec(
        detuning=detuning,
        couplings=(
            CouplingPoint(center - 1, strength, +2.0 * phase_step),
            CouplingPoint(center, strength, 0.0),
            CouplingPoint(center + 1, strength, -2.0 * phase_step),
        ),
    )


def symmetric_three_point(
    center: int, strength: float, phase_step: float, detuning: float
) -> EmitterSpec:
    """Giant atom on {center-1, center, center+1} with phases
    (2*phase_step, 0, 2*phase_step) on the outer legs, same units as
    antisymmetric_three_point."""
    return EmitterSpec(
        detuning=detuning,
        couplings=(
            CouplingPoint(center - 1, strength, 2.0 * phase_step),
            CouplingPoint(center, strength, 0.0),
            CouplingPoint(center + 1, strength, 2.0 * phase_step),
        ),
    )


# ---------------------------------------------------------------------------
# dispersions
# ---------------------------------------------------------------------------

def single_photon_energy(k: float, lattice: LatticeSpec) -> float:
    return -2.0 * lattice.hopping * np.cos(k)


def single_photon_group_velocity(k: float, lattice: LatticeSpec) -> float:
    return 2.0 * lattice.hopping * np.sin(k)


def doublon_energy(K, lattice: LatticeSpec):
    J, U = lattice.hopping, lattice.nonlinearity
    return -np.sqrt(U**2 + (4.0 * J * np.cos(np.asarray(K) / 2.0)) ** 2)


def doublon_group_velocity(K, lattice: LatticeSpec):
    J, U = lattice.hopping, lattice.nonlinearity
    K = np.asarray(K)
    return 4.0 * J**2 * np.sin(K) / np.sqrt(U**2 + 16.0 * J**2 * np.cos(K / 2.0) ** 2)


def doublon_band_edges(lattice: LatticeSpec) -> tuple[float, float]:
    """(bottom, top) of the pair band: [-sqrt(U^2+16J^2), -U]."""
    J, U = lattice.hopping, lattice.nonlinearity
    return -math.sqrt(U**2 + 16.0 * J**2), -U


@dataclass(frozen=True)
class DoublonShape:
    """Relative-coordinate profile u(r) = u0 * alpha^|r| of the photon pair."""

    momentum: float
    decay_factor: float
    localization_length: float
    normalization: float
    degenerate: bool = False


def doublon_shape(K: float, lattice: LatticeSpec, *, allow_degenerate: bool = False) -> DoublonShape:
    """Bound-pair shape at center-of-mass momentum K.

    alpha solves J_K a^2 + U a - J_K = 0 on (0,1); u0 follows from
    u0^2 sum_r alpha^(2|r|) = 1, i.e. u0^2 = (1-alpha^2)/(1+alpha^2).
    At the zone edge (cos(K/2) -> 0) the pair collapses onto one site;
    that limit is returned flagged if allow_degenerate, else raised.
    """
    U = lattice.nonlinearity
    if U <= 0:
        raise ValueError("doublon shape requires U > 0")
    JK = 2.0 * lattice.hopping * np.cos(K / 2.0)
    if abs(JK) < _DEGENERATE_EPS * lattice.hopping:
        if allow_degenerate:
            return DoublonShape(K, 0.0, 0.0, 1.0, degenerate=True)
        raise DegenerateMomentum(f"|cos(K/2)| < {_DEGENERATE_EPS} at K={K}")
    alpha = (-U + math.sqrt(U**2 + 4.0 * JK**2)) / (2.0 * JK)
    u0 = math.sqrt((1.0 - alpha**2) / (1.0 + alpha**2))
    return DoublonShape(K, alpha, -1.0 / math.log(alpha), u0)


def resonant_doublon_momentum(detuning: float, k0: float, lattice: LatticeSpec) -> float:
    """K_r > 0 with E_{K_r} = detuning + E_{k0} (energy matching for the
    photon + excited emitter -> photon pair channel)."""
    target = detuning + single_photon_energy(k0, lattice)
    bottom, top = doublon_band_edges(lattice)
    if not bottom <= target <= top:
        raise OffResonant(
            f"target energy {target:.6g} outside pair band [{bottom:.6g}, {top:.6g}]"
        )
    f = lambda K: doublon_energy(K, lattice) - target
    if f(0.0) == 0.0:
        return 0.0
    if f(np.pi) == 0.0:
        return float(np.pi)
    return float(brentq(f, 0.0, np.pi, xtol=1e-14, rtol=1e-15))


# ---------------------------------------------------------------------------
# three-photon band (numeric)
# ---------------------------------------------------------------------------

def _relative_configs(n_particles: int, r_max: int) -> list[tuple[int, ...]]:
    """Sorted occupied-site tuples anchored at 0 with total spread <= r_max."""
    if n_particles == 2:
        return [(0, r) for r in range(r_max + 1)]
    if n_particles == 3:
        out = []
        for r1 in range(r_max + 1):
            for r2 in range(r_max + 1 - r1):
                out.append((0, r1, r1 + r2))
        return out
    raise ValueError("only 2- and 3-particle relative bases are supported")


def bloch_relative_hamiltonian(
    lattice: LatticeSpec, n_particles: int, total_momentum: float, r_max: int
) -> np.ndarray:
    """Dense fixed-total-momentum Hamiltonian in relative coordinates.

    Basis states are translation orbits of anchored configurations
    (leftmost occupied site at 0, spread <= r_max); a hop that re-anchors
    the configuration by delta picks up the Bloch phase exp(-i K delta).
    Hops that would exceed the spread cutoff are projected out.
    """
    J, U = lattice.hopping, lattice.nonlinearity
    configs = _relative_configs(n_particles, r_max)
    index = {c: i for i, c in enumerate(configs)}
    dim = len(configs)
    H = np.zeros((dim, dim), complex)
    for i, conf in enumerate(configs):
        counts: dict[int, int] = {}
        for s in conf:
            counts[s] = counts.get(s, 0) + 1
        # on-site attraction -U/2 n(n-1)
        H[i, i] += -0.5 * U * sum(n * (n - 1) for n in counts.values())
        for a, ca in counts.items():
            for b in (a - 1, a + 1):
                new = sorted(conf[: conf.index(a)] + conf[conf.index(a) + 1 :] + (b,))
                delta = new[0]
                key = tuple(s - delta for s in new)
                jdx = index.get(key)
                if jdx is None:  # spread beyond cutoff: projected out
                    continue
                cb = counts.get(b, 0)
                amp = -J * math.sqrt(ca * (cb + 1)) * np.exp(-1j * total_momentum * delta)
                H[jdx, i] += amp
    return H


@dataclass(frozen=True)
class TriplonTable:
    """Sampled three-photon band with monotone-cubic interpolation."""

    momenta: np.ndarray
    energies: np.ndarray
    group_velocities: np.ndarray
    r_max: int
    _interp: PchipInterpolator = field(repr=False, compare=False, default=None)

    def energy(self, K) -> np.ndarray:
        return self._interp(np.abs(K))

    def velocity(self, K) -> np.ndarray:
        K = np.asarray(K)
        return np.sign(K) * self._interp.derivative()(np.abs(K))

    @property
    def band_range(self) -> tuple[float, float]:
        return float(self.energies.min()), float(self.energies.max())


@dataclass(frozen=True)
class BandModel:
    """All dispersion evaluators for one lattice; the triplon table is
    attached only when three-photon physics is needed."""

    lattice: LatticeSpec
    triplon_table: TriplonTable | None = None

    def single_photon_energy(self, k):
        return single_photon_energy(k, self.lattice)

    def single_photon_velocity(self, k):
        return single_photon_group_velocity(k, self.lattice)

    def doublon_energy(self, K):
        return doublon_energy(K, self.lattice)

    def doublon_velocity(self, K):
        return doublon_group_velocity(K, self.lattice)

    def triplon_energy(self, K):
        self._require_table()
        return self.triplon_table.energy(K)

    def triplon_velocity(self, K):
        self._require_table()
        return self.triplon_table.velocity(K)

    def _require_table(self) -> None:
        if self.triplon_table is None:
            raise ValueError("BandModel has no triplon table; build one with triplon_band()")


def triplon_band(
    lattice: LatticeSpec,
    momentum_grid: np.ndarray | None = None,
    *,
    r_max: int = 12,
    check_convergence: bool = True,
    convergence_tol: float = 1e-8,
) -> BandModel:
    """Tabulate the lowest three-photon bound band over momentum_grid.

    The band is computed as the minimum eigenvalue of the fixed-momentum
    relative Hamiltonian; doubling r_max must not move any grid energy by
    more than convergence_tol * J (else TruncationNotConverged).
    Velocities are centered differences on the stored grid.
    """
    if momentum_grid is None:
        momentum_grid = np.linspace(-np.pi, np.pi, 65)
    grid = np.asarray(momentum_grid, dtype=float)
    if grid.min() > -np.pi + 1e-9 or grid.max() < np.pi - 1e-9:
        raise ValueError("momentum grid must cover [-pi, pi]")

    def lowest(K: float, r: int) -> float:
        H = bloch_relative_hamiltonian(lattice, 3, K, r)
        return float(np.linalg.eigvalsh(H)[0])

    energies = np.array([lowest(K, r_max) for K in grid])
    if check_convergence:
        probe = grid[:: max(1, len(grid) // 8)]
        coarse = np.array([lowest(K, r_max) for K in probe])
        fine = np.array([lowest(K, 2 * r_max) for K in probe])
        worst = float(np.max(np.abs(fine - coarse)))
        if worst > convergence_tol * lattice.hopping:
            raise TruncationNotConverged(
                f"doubling r_max={r_max} shifts triplon energies by {worst:.3e} J"
            )
    velocities = np.gradient(energies, grid)
    # interpolate on the non-negative half band (E is even in momentum)
    half = grid >= -1e-12
    interp = PchipInterpolator(grid[half], energies[half])
    table = TriplonTable(grid, energies, velocities, r_max, interp)
    return BandModel(lattice=lattice, triplon_table=table)


def resonant_triplon_momentum(detuning2: float, doublon_K: float, band: BandModel) -> float:
    """KK_r > 0 with E_triplon(KK_r) = detuning2 + E_doublon(doublon_K)."""
    band._require_table()
    target = detuning2 + float(doublon_energy(doublon_K, band.lattice))
    table = band.triplon_table
    lo, hi = table.band_range
    if not lo <= target <= hi:
        raise OffResonant(
            f"target energy {target:.6g} outside triplon band [{lo:.6g}, {hi:.6g}]"
        )
    f = lambda K: float(table.energy(K)) - target
    if abs(f(0.0)) < 1e-13:
        return 0.0
    if abs(f(np.pi)) < 1e-13:
        return float(np.pi)
    return float(brentq(f, 0.0, np.pi, xtol=1e-13))


# ---------------------------------------------------------------------------
# incident wavepackets
# ---------------------------------------------------------------------------

GAUSSIAN = "gaussian"
LORENTZIAN = "lorentzian"
PLANE_WAVE = "plane_wave"


@dataclass(frozen=True)
class WavepacketSpec:
    """Incident single-photon packet.

    ``width`` is the momentum-space scale: for a Gaussian the amplitude is
    exp[-(k-k0)^2 / (4 width^2)] (so |psi(k)|^2 has std = width); for the
    one-sided exponential ("lorentzian") packet the real-space envelope is
    exp[(x-x0) * width] for x <= x0.
    """

    kind: str
    center_momentum: float
    width: float = 0.0
    center_position: float = 0.0

    def __post_init__(self) -> None:
        if self.kind not in (GAUSSIAN, LORENTZIAN, PLANE_WAVE):
            raise ValueError(f"unknown packet kind {self.kind!r}")
        if self.kind != PLANE_WAVE and self.width <= 0:
            raise ValueError("packet width must be positive")

    @property
    def spatial_width(self) -> float:
        """Std of |psi(x)|^2 (1/(2 width) for both localized kinds)."""
        if self.kind == PLANE_WAVE:
            return math.inf
        return 1.0 / (2.0 * self.width)


def build_wavepacket(
    spec: WavepacketSpec,
    lattice: LatticeSpec,
    *,
    emitter_sites: tuple[int, ...] = (),
    clearance_factor: float = 5.0,
) -> np.ndarray:
    """Unit-norm site amplitudes of the incident packet.

    The Gaussian is assembled in momentum space on the ring grid and
    transformed; the one-sided exponential is written directly in real
    space with support x <= x0. Clearance from the chain ends and from
    every emitter site must be at least clearance_factor * spatial_width,
    else PacketTooWide. Pass a smaller clearance_factor deliberately for
    cramped geometries; the default matches the safe regime.
    """
    N = lattice.n_sites
    n = np.arange(N)
    if spec.kind == PLANE_WAVE:
        psi = np.exp(1j * spec.center_momentum * n) / math.sqrt(N)
        return psi.astype(np.complex128)

    width = spec.spatial_width
    x0 = spec.center_position
    clear = clearance_factor * width
    margins = [x0, (N - 1) - x0] + [abs(x0 - s) for s in emitter_sites]
    if min(margins) < clear:
        raise PacketTooWide(
            f"packet needs {clear:.1f} sites of clearance "
            f"(factor {clearance_factor} x width {width:.1f}); worst margin "
            f"is {min(margins):.1f}"
        )
    if spec.kind == GAUSSIAN:
        k = 2.0 * np.pi * np.fft.fftfreq(N)
        psi_k = np.exp(-((k - spec.center_momentum) ** 2) / (4.0 * spec.width**2))
        psi = np.fft.ifft(psi_k * np.exp(-1j * k * x0))
        # the transform is ring-periodic; discard the tail that wrapped
        # around to the far side of the chain
        psi[np.abs(n - x0) > N / 2] = 0.0
    else:  # one-sided exponential, sharp front at x0
        envelope = np.where(n <= x0, np.exp((n - x0) * spec.width), 0.0)
        psi = envelope * np.exp(1j * spec.center_momentum * n)
    psi = psi.astype(np.complex128)
    psi /= np.linalg.norm(psi)
    return psi


def band_table(
    lattice: LatticeSpec, n_points: int = 201, band: BandModel | None = None
) -> dict[str, np.ndarray]:
    """Momentum/energy/velocity columns for each available band."""
    k = np.linspace(-np.pi, np.pi, n_points)
    out = {
        "momentum": k,
        "single_photon_energy": single_photon_energy(k, lattice),
        "single_photon_velocity": single_photon_group_velocity(k, lattice),
    }
    if lattice.nonlinearity > 0:
        out["doublon_energy"] = doublon_energy(k, lattice)
        out["doublon_velocity"] = doublon_group_velocity(k, lattice)
    if band is not None and band.triplon_table is not None:
        out["triplon_energy"] = band.triplon_energy(k)
        out["triplon_velocity"] = band.triplon_velocity(k)
    return out
