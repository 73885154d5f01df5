"""Exception types shared across the toolkit."""


class ConeError(ValueError):
    """An eigenvalue tuple (or form spectrum) fails the required cone membership."""


class ApproximationError(RuntimeError):
    """A smoothing/approximation schedule could not be repaired into the cone."""


class StructuralError(ValueError):
    """A structural precondition fails (non-positive metric, shape mismatch)."""
