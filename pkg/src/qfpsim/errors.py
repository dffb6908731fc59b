"""Exception types shared across the package."""


class QfpError(Exception):
    """Base class for all qfpsim errors."""


class DimensionError(QfpError):
    """Invalid truncation dimension or mismatched operator shapes."""


class PotentialError(QfpError):
    """Invalid perturbation-potential specification."""


class ParameterError(QfpError):
    """Physical parameters outside the admissible domain."""


class TruncationError(QfpError):
    """The Fock truncation is too small for the requested computation."""


class StiffnessError(QfpError):
    """Adaptive integrator step size underflowed."""


class GridError(QfpError):
    """Phase-space grid too coarse, too small, or malformed."""


class GuardError(QfpError):
    """Argument exceeds a truncation-accuracy guard."""


class SteadyStateError(QfpError):
    """Steady-state solve failed (no near-null vector or degenerate kernel)."""


class ConfigError(QfpError):
    """Scenario configuration failed to parse or validate."""
