"""Exception types shared across the package."""


class ExpchebError(Exception):
    """Base class for all package-specific errors."""


class DomainError(ExpchebError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class ConvergenceError(ExpchebError, RuntimeError):
    """An iterative solver failed to converge or a bracket did not straddle."""


class CutoffError(ExpchebError, RuntimeError):
    """A series cutoff could not be validated, so no certified bound exists."""


class PrecisionOverflowError(ExpchebError, RuntimeError):
    """A computation would require working precision above the hard ceiling."""


class CapacityError(ExpchebError, RuntimeError):
    """A requested computation exceeds the configured size/memory ceiling."""


class BitBudgetError(ExpchebError, RuntimeError):
    """Exact rational coefficients exceeded their per-degree bit allowance."""


class RemezError(ExpchebError, RuntimeError):
    """The exchange iteration failed to reach equioscillation."""


class SoundnessError(ExpchebError, RuntimeError):
    """An internal certified invariant was found violated; results untrusted."""
