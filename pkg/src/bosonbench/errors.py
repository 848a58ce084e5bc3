"""Exception types raised across the package."""


class BosonBenchError(Exception):
    """Base class for all package errors."""


class DimensionError(BosonBenchError, ValueError):
    """Shapes of matrices, sequences or states do not fit together."""


class SizeGuardError(BosonBenchError, ValueError):
    """Input exceeds the size an exact method is allowed to handle."""


class ParameterError(BosonBenchError, ValueError):
    """A scalar parameter lies outside its documented range."""


class RangeError(ParameterError):
    """A bound was requested outside the regime in which it is claimed."""


class EnumerationCapError(SizeGuardError):
    """The sample space is larger than the enumeration cap."""

    def __init__(self, size, cap, hint=""):
        self.size = size
        self.cap = cap
        msg = f"sample space has {size} elements, exceeding the enumeration cap of {cap}"
        if hint:
            msg += f"; {hint}"
        super().__init__(msg)


class ZeroMassError(BosonBenchError, ValueError):
    """Post-selection onto a set carrying (numerically) zero probability."""


class NormalizationError(BosonBenchError, RuntimeError):
    """An exactly enumerated distribution failed to sum to one."""


class LabelError(BosonBenchError, ValueError):
    """A sample label lies outside the declared sample space."""


class ImpossibleSampleError(BosonBenchError, ValueError):
    """A sample has probability zero under every hypothesis."""


class StateError(BosonBenchError, ValueError):
    """A Gaussian state or channel violates a physical constraint."""
