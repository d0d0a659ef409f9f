"""Exception hierarchy.

Every exception carries a stable ``code`` string; the command line prints it
on failure so scripts can match on it.
"""


class LrdError(Exception):
    code = "ERROR"


class ParameterError(LrdError, ValueError):
    code = "PARAMETER"


class IntegrabilityError(LrdError, ArithmeticError):
    code = "INTEGRABILITY"


class UnsupportedModelError(LrdError, ValueError):
    code = "UNSUPPORTED_MODEL"


class CoverageError(LrdError, IndexError):
    code = "COVERAGE"


class PairingError(LrdError, ValueError):
    code = "PAIRING"


class PlanError(LrdError, ValueError):
    code = "PLAN"


class FitError(LrdError, ValueError):
    code = "FIT"


class DegenerateSampleError(LrdError, ValueError):
    code = "DEGENERATE_SAMPLE"


class ConfigError(LrdError, ValueError):
    code = "CONFIG"


class SimulationError(LrdError, RuntimeError):
    code = "SIMULATION"


class ApproximationWarning(UserWarning):
    """Circulant embedding had to clip a noticeable share of negative eigenvalues."""
