"""Exception hierarchy shared by all modules."""


class BCInverseError(Exception):
    """Base class for toolkit errors."""


class InvalidGrid(BCInverseError, ValueError):
    pass


class NonFiniteValues(BCInverseError, ValueError):
    pass


class SingularSystem(BCInverseError, ArithmeticError):
    """A discretized second-kind operator is numerically singular."""


class DomainMismatch(BCInverseError, ValueError):
    pass


class InvalidControl(BCInverseError, ValueError):
    pass


class HorizonTooShort(BCInverseError, ValueError):
    pass


class HorizonExceeded(BCInverseError, ValueError):
    pass


class ConvergenceFailure(BCInverseError, RuntimeError):
    pass


class MismatchedTruncation(BCInverseError, ValueError):
    pass


class UnboundedSupport(BCInverseError, ValueError):
    pass


class ZeroJostFunction(BCInverseError, ArithmeticError):
    pass


class SearchGridTooCoarse(BCInverseError, RuntimeError):
    pass


class IncompleteData(BCInverseError, ValueError):
    pass


class TailNotNegligible(BCInverseError, ValueError):
    pass


class UnsupportedPreset(BCInverseError, ValueError):
    pass


class CFLViolation(BCInverseError, ValueError):
    pass


class SupportViolation(BCInverseError, ValueError):
    pass


class InsufficientDecay(BCInverseError, ValueError):
    pass


class PhaseNotDecayed(BCInverseError, ValueError):
    pass


class KernelUnavailable(BCInverseError, ValueError):
    pass


class TruncationTooShort(BCInverseError, ValueError):
    pass


class AllTracesVanish(BCInverseError, ArithmeticError):
    def __init__(self, message, node_index=None):
        super().__init__(message)
        self.node_index = node_index


class UnsupportedConversion(BCInverseError, ValueError):
    pass


class SchemaError(BCInverseError, ValueError):
    pass
