"""Exception types raised by the solvers."""


class PolyiterError(Exception):
    """Base class for all errors raised by this package."""


class InvalidInstance(PolyiterError, ValueError):
    """The game instance violates a structural invariant."""

    def __init__(self, report):
        self.report = report
        super().__init__(str(report))


class InstanceFormatError(PolyiterError, ValueError):
    """A serialized instance, trace or sidecar cannot be parsed."""


class CombinatorialOverflow(PolyiterError):
    """An enumeration would exceed the configured cap."""


class SingularSystem(PolyiterError, ArithmeticError):
    """A linear system has a (numerically) vanishing pivot."""


class MultichainDetected(SingularSystem):
    """The augmented eigen-system is singular: several final classes."""


class NonNegativeViolation(PolyiterError, ValueError):
    pass


class RadiusNotDominated(PolyiterError):
    """The requested rate does not dominate the hull spectral radius."""


class NoRenewalState(PolyiterError):
    """Some member matrix has a final class avoiding the renewal state."""


class Inconclusive(PolyiterError):
    pass


class NonPositivePhi(PolyiterError, ValueError):
    pass


class PhiCertificateViolated(PolyiterError, ValueError):
    pass


class NotContracting(PolyiterError):
    """Kernel row sums are not uniformly below one and no certificate was given."""


class DomainError(PolyiterError, ValueError):
    pass


class BoundExceeded(PolyiterError, AssertionError):
    """Internal invariant broken: more iterations than policies."""
