"""Excitation-number-conserving bases, sparse Hamiltonians, observables.

The conserved charge is (photon number) + (number of excited emitters).
A SectorBasis enumerates, for a fixed total, every emitter bit pattern
together with the matching bosonic photon sector:

    pattern block                photon configurations
    (1, 1, ...) all excited      single sites n
    one emitter relaxed          pairs n1 <= n2
    two relaxed                  triples n1 <= n2 <= n3 (optionally
                                 truncated to spread n3 - n1 <= r_max)

Ordering is deterministic: patterns lexicographically, then photon
configurations lexicographically; this fixes state indices, CSV layouts,
and snapshot hashes.
"""

from __future__ import annotations

import hashlib
import itertools
import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.linalg import toeplitz

from .errors import BasisTooLarge, RegionOverlap
from .model import BandModel, EmitterSpec, LatticeSpec, doublon_shape


@dataclass(frozen=True)
class TruncationRule:
    """Relative-spread cutoff; applies only to the 3-photon sector."""

    max_photon_spread: int | None = None


@dataclass(frozen=True)
class Block:
    pattern: tuple[int, ...]
    n_photons: int
    offset: int
    size: int
    configs: tuple[np.ndarray, ...] = field(repr=False)
    index_map: dict | None = field(default=None, repr=False, compare=False)

    @property
    def slice(self) -> slice:
        return slice(self.offset, self.offset + self.size)


def _pair_count(n: int) -> int:
    return n * (n + 1) // 2


def _triple_count(n: int, r_max: int | None) -> int:
    if r_max is None:
        return n * (n + 1) * (n + 2) // 6
    total = 0
    for n1 in range(n):
        w = min(r_max, n - 1 - n1)
        total += (w + 1) * (w + 2) // 2
    return total


class SectorBasis:
    """Enumerated basis of one conserved-excitation sector."""

    def __init__(
        self,
        lattice: LatticeSpec,
        emitters: tuple[EmitterSpec, ...],
        total_excitations: int,
        truncation: TruncationRule | None = None,
        memory_budget: int = 6_000_000,
    ):
        if total_excitations not in (1, 2, 3):
            raise ValueError("total_excitations must be 1, 2, or 3")
        for em in emitters:
            em.validate_against(lattice)
        self.lattice = lattice
        self.emitters = tuple(emitters)
        self.total_excitations = total_excitations
        self.truncation = truncation or TruncationRule()
        N = lattice.n_sites
        r_max = self.truncation.max_photon_spread

        estimated = 0
        for pattern in itertools.product((0, 1), repeat=len(emitters)):
            p = total_excitations - sum(pattern)
            if p < 0:
                continue
            if p < 3:
                estimated += {0: 1, 1: N, 2: _pair_count(N)}[p]
            else:
                estimated += _triple_count(N, r_max)
        if estimated > memory_budget:
            raise BasisTooLarge(
                f"sector needs {estimated} states, budget is {memory_budget}; "
                "enable 3-photon truncation or shrink the lattice"
            )

        blocks: list[Block] = []
        offset = 0
        for pattern in sorted(itertools.product((0, 1), repeat=len(emitters))):
            p = total_excitations - sum(pattern)
            if p < 0:
                continue
            index_map = None
            if p == 0:
                configs: tuple[np.ndarray, ...] = ()
                size = 1
            elif p == 1:
                configs = (np.arange(N),)
                size = N
            elif p == 2:
                n1, n2 = np.triu_indices(N)
                configs = (n1.astype(np.int64), n2.astype(np.int64))
                size = len(n1)
            else:
                t1, t2, t3 = [], [], []
                for a in range(N):
                    top = N - 1 if r_max is None else min(a + r_max, N - 1)
                    for b in range(a, top + 1):
                        for c in range(b, top + 1):
                            t1.append(a)
                            t2.append(b)
                            t3.append(c)
                configs = (
                    np.array(t1, dtype=np.int64),
                    np.array(t2, dtype=np.int64),
                    np.array(t3, dtype=np.int64),
                )
                size = len(t1)
                index_map = {
                    (a, b, c): i for i, (a, b, c) in enumerate(zip(t1, t2, t3))
                }
            blocks.append(Block(tuple(pattern), p, offset, size, configs, index_map))
            offset += size
        self.blocks = blocks
        self.by_pattern = {b.pattern: b for b in blocks}
        self.dimension = offset

    # -- index helpers ------------------------------------------------------

    def pair_index(self, block: Block, n1, n2):
        """Absolute index of pair (n1 <= n2) within a 2-photon block."""
        N = self.lattice.n_sites
        n1 = np.asarray(n1, dtype=np.int64)
        n2 = np.asarray(n2, dtype=np.int64)
        return block.offset + n1 * N - (n1 * (n1 - 1)) // 2 + (n2 - n1)

    def index_of(self, pattern: tuple[int, ...], photons: tuple[int, ...]) -> int:
        block = self.by_pattern[pattern]
        photons = tuple(sorted(int(p) for p in photons))
        if block.n_photons != len(photons):
            raise ValueError("photon count does not match the pattern block")
        if block.n_photons == 0:
            return block.offset
        if block.n_photons == 1:
            return block.offset + photons[0]
        if block.n_photons == 2:
            return int(self.pair_index(block, photons[0], photons[1]))
        idx = block.index_map.get(photons)
        if idx is None:
            raise KeyError(f"photon configuration {photons} not in truncated basis")
        return block.offset + idx

    def photon_blocks(self, n_photons: int) -> list[Block]:
        return [b for b in self.blocks if b.n_photons == n_photons]

    def basis_hash(self) -> str:
        key = repr(
            (self.lattice, self.emitters, self.total_excitations, self.truncation)
        ).encode()
        return hashlib.sha256(key).hexdigest()[:16]

    def block_dimensions(self) -> dict[tuple[int, ...], int]:
        return {b.pattern: b.size for b in self.blocks}


def enumerate_basis(
    lattice: LatticeSpec,
    emitters: tuple[EmitterSpec, ...],
    total_excitations: int,
    truncation: TruncationRule | None = None,
    memory_budget: int = 6_000_000,
) -> SectorBasis:
    return SectorBasis(lattice, emitters, total_excitations, truncation, memory_budget)


# ---------------------------------------------------------------------------
# Hamiltonian assembly
# ---------------------------------------------------------------------------

def _hop_pairs_block(basis: SectorBasis, block: Block, ring: bool, rows, cols, vals):
    """Directed single-particle hops within a 2-photon block.

    Matrix element for moving a particle from site s to site d is
    -J sqrt(c_s (c_d + 1)) with occupancies counted in the source state.
    Each directed move is emitted once; the reverse move appears when the
    destination configuration is processed, so the block is Hermitian.
    """
    N = basis.lattice.n_sites
    J = basis.lattice.hopping
    A, B = block.configs
    eq = A == B
    src_idx = block.offset + np.arange(block.size)
    for moved, dn in ((0, -1), (0, +1), (1, -1), (1, +1)):
        if moved == 0:
            src_ok = np.ones(block.size, dtype=bool)
            m = A + dn
            other = B
            c_src = np.where(eq, 2.0, 1.0)
        else:
            src_ok = ~eq  # moving the second of an identical pair = duplicate
            m = B + dn
            other = A
            c_src = np.ones(block.size)
        if ring:
            m = np.mod(m, N)
            ok = src_ok
        else:
            ok = src_ok & (m >= 0) & (m < N)
        amp = -J * np.sqrt(c_src * (1.0 + (other == m)))
        na, nb = np.minimum(m, other), np.maximum(m, other)
        dst = basis.pair_index(block, na[ok], nb[ok])
        rows.append(np.asarray(dst))
        cols.append(src_idx[ok])
        vals.append(amp[ok].astype(complex))


def _hop_triples_block(basis: SectorBasis, block: Block, ring: bool, rows, cols, vals):
    N = basis.lattice.n_sites
    J = basis.lattice.hopping
    t1, t2, t3 = block.configs
    index_map = block.index_map
    rr, cc, vv = [], [], []
    for i in range(block.size):
        conf = (int(t1[i]), int(t2[i]), int(t3[i]))
        counts: dict[int, int] = {}
        for s in conf:
            counts[s] = counts.get(s, 0) + 1
        for s, cs in counts.items():
            for d in (s - 1, s + 1):
                if ring:
                    d %= N
                elif not 0 <= d < N:
                    continue
                pos = conf.index(s)
                new = tuple(sorted(conf[:pos] + conf[pos + 1 :] + (d,)))
                j = index_map.get(new)
                if j is None:  # spread truncation: projected out
                    continue
                cd = counts.get(d, 0)
                rr.append(block.offset + j)
                cc.append(block.offset + i)
                vv.append(-J * math.sqrt(cs * (cd + 1)))
    rows.append(np.array(rr, dtype=np.int64))
    cols.append(np.array(cc, dtype=np.int64))
    vals.append(np.array(vv, dtype=complex))


def _diagonal(basis: SectorBasis) -> np.ndarray:
    """On-site attraction -U/2 n(n-1) plus emitter detunings +-Delta/2."""
    U = basis.lattice.nonlinearity
    diag = np.zeros(basis.dimension)
    for block in basis.blocks:
        d = np.zeros(block.size)
        if block.n_photons == 2:
            A, B = block.configs
            d += np.where(A == B, -U, 0.0)
        elif block.n_photons == 3:
            t1, t2, t3 = block.configs
            d += np.where(t1 == t2, -U, 0.0)
            d += np.where(t2 == t3, -U, 0.0)
            d += np.where(t1 == t3, -U, 0.0)  # (n,n,n) then totals -3U
        for em, bit in zip(basis.emitters, block.pattern):
            d += 0.5 * em.detuning * (1.0 if bit else -1.0)
        diag[block.slice] = d
    return diag


def assemble_hamiltonian(basis: SectorBasis, *, boundary: str = "open") -> sp.csr_matrix:
    """Sparse sector Hamiltonian (Hermitian, complex128).

    boundary "open" is the scattering geometry; "ring" (periodic) is only
    supported without 3-photon truncation and exists for the oracles.
    """
    if boundary not in ("open", "ring"):
        raise ValueError("boundary must be 'open' or 'ring'")
    ring = boundary == "ring"
    if ring and any(
        b.n_photons == 3 and basis.truncation.max_photon_spread is not None
        for b in basis.blocks
    ):
        raise ValueError("ring boundary is incompatible with 3-photon truncation")
    N = basis.lattice.n_sites
    J = basis.lattice.hopping
    rows: list[np.ndarray] = []
    cols: list[np.ndarray] = []
    vals: list[np.ndarray] = []

    for block in basis.blocks:
        if block.n_photons == 1:
            n = block.configs[0]
            src = block.offset + n[:-1]
            dst = block.offset + n[1:]
            hop = np.full(N - 1, -J, dtype=complex)
            rows.extend([dst, src])
            cols.extend([src, dst])
            vals.extend([hop, hop])
            if ring:
                first = np.array([block.offset])
                last = np.array([block.offset + N - 1])
                rows.extend([first, last])
                cols.extend([last, first])
                vals.extend([np.array([-J], dtype=complex)] * 2)
        elif block.n_photons == 2:
            _hop_pairs_block(basis, block, ring, rows, cols, vals)
        elif block.n_photons == 3:
            _hop_triples_block(basis, block, ring, rows, cols, vals)

    # emitter relaxation: g e^{i phi} sigma_i^- a_s^+  (+ h.c.)
    for i, em in enumerate(basis.emitters):
        for cp in em.couplings:
            g = cp.strength * np.exp(1j * cp.phase)
            for block in basis.blocks:
                if block.pattern[i] != 1:
                    continue
                dest_pattern = list(block.pattern)
                dest_pattern[i] = 0
                dest = basis.by_pattern[tuple(dest_pattern)]
                if block.n_photons == 0:
                    r = np.array([dest.offset + cp.site])
                    c = np.array([block.offset])
                    a = np.array([g])
                elif block.n_photons == 1:
                    n = block.configs[0]
                    na, nb = np.minimum(n, cp.site), np.maximum(n, cp.site)
                    a = g * np.sqrt(1.0 + (n == cp.site))
                    r = np.asarray(basis.pair_index(dest, na, nb))
                    c = block.offset + n
                else:  # 2 photons -> 3 photons (possibly truncated)
                    A, B = block.configs
                    occ = (A == cp.site).astype(int) + (B == cp.site).astype(int)
                    keep = _fits_truncation(A, B, cp.site, basis)
                    r_list, c_list, a_list = [], [], []
                    for j in np.nonzero(keep)[0]:
                        trip = tuple(sorted((int(A[j]), int(B[j]), cp.site)))
                        idx = dest.index_map.get(trip)
                        if idx is None:
                            continue
                        r_list.append(dest.offset + idx)
                        c_list.append(block.offset + j)
                        a_list.append(g * math.sqrt(occ[j] + 1.0))
                    r = np.array(r_list, dtype=np.int64)
                    c = np.array(c_list, dtype=np.int64)
                    a = np.array(a_list, dtype=complex)
                a = np.asarray(a, dtype=complex)
                rows.extend([r, c])
                cols.extend([c, r])
                vals.extend([a, np.conj(a)])

    diag = _diagonal(basis)
    rows.append(np.arange(basis.dimension))
    cols.append(np.arange(basis.dimension))
    vals.append(diag.astype(complex))

    H = sp.coo_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
        shape=(basis.dimension, basis.dimension),
    )
    return H.tocsr()


def _fits_truncation(A: np.ndarray, B: np.ndarray, site: int, basis: SectorBasis) -> np.ndarray:
    """Pairs that stay inside the truncated triple basis once `site` joins."""
    r_max = basis.truncation.max_photon_spread
    if r_max is None:
        return np.ones_like(A, dtype=bool)
    lo = np.minimum(A, site)
    hi = np.maximum(B, site)
    return hi - lo <= r_max


# ---------------------------------------------------------------------------
# states and observables
# ---------------------------------------------------------------------------

@dataclass
class StateVector:
    basis: SectorBasis
    data: np.ndarray
    time: float = 0.0

    def norm(self) -> float:
        return float(np.linalg.norm(self.data))

    def copy(self) -> "StateVector":
        return StateVector(self.basis, self.data.copy(), self.time)

    def block_weight(self, pattern: tuple[int, ...]) -> float:
        b = self.basis.by_pattern[pattern]
        return float(np.sum(np.abs(self.data[b.slice]) ** 2))


def initial_state(
    basis: SectorBasis, wavepacket: np.ndarray, *, emitter_pattern: str = "all_excited"
) -> StateVector:
    """Photon wavepacket times all emitters excited, normalized.

    Requires total_excitations = n_emitters + 1 so that the all-excited
    block is the single-photon block.
    """
    if emitter_pattern != "all_excited":
        raise ValueError("only the all-excited initial pattern is supported")
    n_em = len(basis.emitters)
    if basis.total_excitations != n_em + 1:
        raise ValueError(
            "initial_state needs total_excitations == n_emitters + 1 "
            f"(got {basis.total_excitations} with {n_em} emitters)"
        )
    block = basis.by_pattern[(1,) * n_em]
    if len(wavepacket) != basis.lattice.n_sites:
        raise ValueError("wavepacket length must equal n_sites")
    data = np.zeros(basis.dimension, dtype=complex)
    data[block.slice] = wavepacket
    data /= np.linalg.norm(data)
    return StateVector(basis, data, 0.0)


def photon_number_map(state: StateVector) -> np.ndarray:
    """Per-site photon number expectation <a_n^+ a_n>."""
    N = state.basis.lattice.n_sites
    density = np.zeros(N)
    for block in state.basis.blocks:
        w = np.abs(state.data[block.slice]) ** 2
        for conf in block.configs:
            np.add.at(density, conf, w)
    return density


def excitation_expectation(state: StateVector) -> float:
    """<photon number + excited emitter count>; conserved by H."""
    total = 0.0
    for block in state.basis.blocks:
        w = float(np.sum(np.abs(state.data[block.slice]) ** 2))
        total += w * (block.n_photons + sum(block.pattern))
    return total


def emitter_populations(state: StateVector) -> tuple[float, ...]:
    out = []
    for i in range(len(state.basis.emitters)):
        out.append(
            sum(
                state.block_weight(b.pattern)
                for b in state.basis.blocks
                if b.pattern[i] == 1
            )
        )
    return tuple(out)


@dataclass
class PopulationReport:
    """Sector- and region-resolved populations of one snapshot."""

    time: float
    p_single: float
    p_two: float
    p_three: float
    p_doublon: float
    p_triplon: float
    transmitted: float
    reflected: float
    u_plus: float
    u_minus: float
    emitter_excited: tuple[float, ...]
    emitter_region_single: float
    emitter_region_pair: float
    p_uncorrelated: float
    total: float

    def as_row(self) -> dict[str, float]:
        row = {
            "time": self.time,
            "P_I": self.p_single,
            "P_II": self.p_two,
            "P_III": self.p_three,
            "P_D": self.p_doublon,
            "P_T": self.p_triplon,
            "t2": self.transmitted,
            "r2": self.reflected,
            "u_plus2": self.u_plus,
            "u_minus2": self.u_minus,
            "P_uncorrelated": self.p_uncorrelated,
            "total": self.total,
        }
        for i, p in enumerate(self.emitter_excited):
            row[f"emitter{i}_excited"] = p
        return row


def populations(
    state: StateVector,
    *,
    divider_emitter: int = 0,
    pair_cutoff: int = 2,
    triple_cutoff: int = 2,
    check_clearance: bool = False,
    clearance_buffer: int = 3,
    clearance_threshold: float = 0.02,
) -> PopulationReport:
    """Region- and bound-state-resolved populations.

    transmitted/reflected split the single-photon channel strictly right/
    left of the divider emitter's coupling range; u_plus/u_minus sum the
    two-photon weight with relative separation <= pair_cutoff by which
    side of that range its center of mass lies. With check_clearance,
    raises RegionOverlap if the single-photon channel keeps more than
    clearance_threshold of its weight within clearance_buffer sites of
    the coupling range (packets still straddle the emitter).
    """
    basis = state.basis
    em = basis.emitters[divider_emitter]
    lo, hi = em.min_site, em.max_site

    p_single = transmitted = reflected = region_single = near_single = 0.0
    p_two = p_doublon = u_plus = u_minus = region_pair = 0.0
    p_three = p_triplon = 0.0
    for block in basis.blocks:
        w = np.abs(state.data[block.slice]) ** 2
        tot = float(w.sum())
        if block.n_photons == 1 and all(block.pattern):
            p_single += tot
            n = block.configs[0]
            transmitted += float(w[n > hi].sum())
            reflected += float(w[n < lo].sum())
            region_single += float(w[(n >= lo) & (n <= hi)].sum())
            band = (n >= lo - clearance_buffer) & (n <= hi + clearance_buffer)
            near_single += float(w[band].sum())
        elif block.n_photons == 2:
            p_two += tot
            A, B = block.configs
            bound = (B - A) <= pair_cutoff
            p_doublon += float(w[bound].sum())
            xc = 0.5 * (A + B)
            u_plus += float(w[bound & (xc > hi)].sum())
            u_minus += float(w[bound & (xc < lo)].sum())
            region_pair += float(w[bound & (xc >= lo) & (xc <= hi)].sum())
        elif block.n_photons == 3:
            p_three += tot
            t1, _, t3 = block.configs
            p_triplon += float(w[(t3 - t1) <= triple_cutoff].sum())

    if check_clearance and near_single > clearance_threshold * max(p_single, 1e-30):
        raise RegionOverlap(
            f"single-photon weight {near_single:.3g} still within "
            f"{clearance_buffer} sites of the coupling range"
        )

    return PopulationReport(
        time=state.time,
        p_single=p_single,
        p_two=p_two,
        p_three=p_three,
        p_doublon=p_doublon,
        p_triplon=p_triplon,
        transmitted=transmitted,
        reflected=reflected,
        u_plus=u_plus,
        u_minus=u_minus,
        emitter_excited=emitter_populations(state),
        emitter_region_single=region_single,
        emitter_region_pair=region_pair,
        p_uncorrelated=p_two - p_doublon,
        total=float(np.sum(np.abs(state.data) ** 2)),
    )


# ---------------------------------------------------------------------------
# bound-pair momentum analysis
# ---------------------------------------------------------------------------

def doublon_mode_vector(
    basis: SectorBasis, block: Block, K: float, *, r_cut: int | None = None
) -> np.ndarray:
    """Unit-norm analysis mode: plane wave in the pair center of mass with
    the analytic relative profile at momentum K, written on the open chain.
    """
    N = basis.lattice.n_sites
    shape = doublon_shape(K if abs(K) > 1e-12 else 1e-9, basis.lattice, allow_degenerate=True)
    alpha = shape.decay_factor
    if r_cut is None:
        r_cut = _default_r_cut(basis.lattice)
    A, B = block.configs
    sep = B - A
    vec = np.zeros(block.size, dtype=complex)
    keep = sep <= r_cut
    mul = np.where(sep[keep] > 0, math.sqrt(2.0), 1.0)
    prof = mul * np.where(sep[keep] > 0, alpha ** sep[keep].astype(float), 1.0)
    vec[keep] = prof * np.exp(1j * K * 0.5 * (A[keep] + B[keep]))
    vec /= np.linalg.norm(vec)
    return vec


def _default_r_cut(lattice: LatticeSpec) -> int:
    shape = doublon_shape(1e-9, lattice, allow_degenerate=False)
    return max(3, int(math.ceil(-28.0 / math.log(shape.decay_factor))))


def project_onto_doublon_modes(
    state: StateVector,
    band: BandModel,
    *,
    pattern: tuple[int, ...] | None = None,
    r_cut: int | None = None,
) -> tuple[np.ndarray, np.ndarray, float]:
    """Decompose the two-photon channel into bound-pair momentum modes.

    Returns (momenta, coefficients, subspace_weight). The mode family is
    mildly non-orthogonal on an open chain, so coefficients are computed
    as least-squares coordinates through the family's Gram matrix; an
    exact mode state then yields an exact delta and subspace_weight never
    exceeds the two-photon population.
    """
    basis = state.basis
    N = basis.lattice.n_sites
    if pattern is None:
        candidates = [b for b in basis.blocks if b.n_photons == 2]
        if not candidates:
            raise ValueError("state has no two-photon block")
        block = max(candidates, key=lambda b: state.block_weight(b.pattern))
    else:
        block = basis.by_pattern[pattern]
    A, B = block.configs
    amp = state.data[block.slice]
    if r_cut is None:
        r_cut = min(_default_r_cut(basis.lattice), N - 2)

    ms = np.arange(-(N // 2), N - N // 2)
    Ks = 2.0 * np.pi * ms / N

    # per-momentum relative profiles (rows: modes, cols: separation r)
    rs = np.arange(r_cut + 1)
    mul = np.where(rs > 0, math.sqrt(2.0), 1.0)
    alphas = np.array(
        [
            doublon_shape(K if abs(K) > 1e-12 else 1e-9, basis.lattice, allow_degenerate=True).decay_factor
            for K in Ks
        ]
    )
    prof = mul[None, :] * np.power(
        np.maximum(alphas, 1e-300)[:, None], rs[None, :].astype(float)
    )
    prof[:, 0] = 1.0
    counts = (N - rs).astype(float)
    norms = np.sqrt(prof**2 @ counts)

    # raw overlaps a_m = <mode_m | psi> via one FFT per separation
    sep = B - A
    a = np.zeros(len(ms), dtype=complex)
    for r in rs:
        selection = sep == r
        if not np.any(selection):
            continue
        diag = np.zeros(N, dtype=complex)
        diag[A[selection]] = amp[selection]
        ft = np.roll(np.fft.fft(diag), N // 2)  # sum_n diag[n] e^{-i K n}
        a += prof[:, r] * np.exp(-1j * Ks * r / 2.0) * ft
    a /= norms

    # Gram matrix: G[m,m'] = sum_r prof_m(r) prof_m'(r) e^{i dK r/2} S(N-r, dK)
    gram = np.zeros((len(ms), len(ms)), dtype=complex)
    for r in rs:
        dm = np.arange(len(ms))
        dK = 2.0 * np.pi * dm / N
        with np.errstate(divide="ignore", invalid="ignore"):
            geo = np.where(
                dm == 0,
                counts[r],
                (1.0 - np.exp(1j * dK * counts[r])) / (1.0 - np.exp(1j * dK)),
            )
        row = np.exp(1j * dK * r / 2.0) * geo
        gram += np.outer(prof[:, r], prof[:, r]) * toeplitz(np.conj(row), row)
    gram /= np.outer(norms, norms)

    coeffs = np.linalg.solve(gram, a)
    weight = float(np.real(np.vdot(a, coeffs)))
    return Ks, coeffs, weight


def export_matrix_market(H: sp.spmatrix, path) -> None:
    """Debug export of the sparse operator in Matrix Market text format."""
    from scipy.io import mmwrite

    mmwrite(str(path), H)
