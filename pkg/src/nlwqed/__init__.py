"""Cascaded inelastic photon scattering in nonlinear waveguides.

A lattice of coupled Kerr cavities hosts bound photon pairs and triples
below the free band; far-detuned excited emitters convert an incident
photon up the ladder (single -> pair -> triple), sorting the output into
spatially separated components by group velocity. The package provides
the closed-form/numeric band structure, a sparse dynamics engine, the
analytic multi-point scattering solver, scenario runners, and a CLI.
"""

__version__ = "0.1.0"

from .errors import (
    BasisTooLarge,
    ConfigError,
    DegenerateMomentum,
    NoConvergence,
    OffResonant,
    PacketTooWide,
    PhysicsError,
    RegionOverlap,
    ResonanceMismatch,
    SingularSystem,
    StepRejected,
    TruncationNotConverged,
)
from .model import (
    BandModel,
    CouplingPoint,
    DoublonShape,
    EmitterSpec,
    LatticeSpec,
    WavepacketSpec,
    antisymmetric_three_point,
    build_wavepacket,
    doublon_energy,
    doublon_group_velocity,
    doublon_shape,
    resonant_doublon_momentum,
    resonant_triplon_momentum,
    single_photon_energy,
    single_photon_group_velocity,
    small_atom,
    symmetric_three_point,
    triplon_band,
)
from .hilbert import (
    PopulationReport,
    SectorBasis,
    StateVector,
    TruncationRule,
    assemble_hamiltonian,
    enumerate_basis,
    initial_state,
    photon_number_map,
    populations,
    project_onto_doublon_modes,
)
from .pga import (
    PgaKernel,
    ScatteringAmplitudes,
    build_kernel,
    flux_check,
    solve_momentum_space,
    solve_real_space,
    sweep_solve,
)
from .propagate import EvolutionConfig, estimate_spectral_bounds, evolve, iter_evolve
