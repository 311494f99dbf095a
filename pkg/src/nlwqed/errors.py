"""Exception hierarchy for physics-level failures.

Every error that a caller may want to branch on derives from PhysicsError
and carries a stable ``name`` used by the CLI exit-code contract.
"""

from __future__ import annotations


class PhysicsError(Exception):
    """Base class for recoverable physics/configuration failures."""

    @property
    def name(self) -> str:
        return type(self).__name__


class OffResonant(PhysicsError):
    """Target energy lies outside the relevant bound-state band."""


class DegenerateMomentum(PhysicsError):
    """Bound-state shape degenerates (localization length -> 0)."""


class PacketTooWide(PhysicsError):
    """Wavepacket violates its clearance preconditions."""


class BasisTooLarge(PhysicsError):
    """Estimated sector dimension exceeds the configured memory budget."""


class TruncationNotConverged(PhysicsError):
    """Increasing the relative-spread cutoff still shifts the result."""


class SingularSystem(PhysicsError):
    """Scattering linear system is too ill-conditioned to trust."""


class NoConvergence(PhysicsError):
    """Iterative estimate failed to converge within its iteration cap."""


class StepRejected(PhysicsError):
    """Propagator cannot meet the requested tolerance at this step size."""


class RegionOverlap(PhysicsError):
    """Outgoing packets still straddle the emitter region."""


class ResonanceMismatch(PhysicsError):
    """Cascade stage detuning misses the required bound-state band."""


class ConfigError(Exception):
    """Invalid run configuration (bad key, unparsable value, bad file)."""
