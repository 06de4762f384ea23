"""Exception and warning types raised by :mod:`archpmle`."""


class ArchError(Exception):
    """Base class for all package errors."""


class DomainError(ArchError, ValueError):
    """An argument lies outside the domain of the operation."""


class StabilityError(ArchError, ValueError):
    """The denominator polynomial ``b(z)`` has a root on or inside the unit circle."""


class PositivityError(ArchError, ValueError):
    """Some ARCH weight is not strictly positive."""

    def __init__(self, message: str, index: int | None = None) -> None:
        super().__init__(message)
        self.index = index


class SimulationOverflowError(ArchError, OverflowError):
    """The simulated conditional variance left the representable range."""

    def __init__(self, t: int) -> None:
        super().__init__(f"conditional variance overflowed at t={t}")
        self.t = t


class SingularHessian(ArchError, ArithmeticError):
    """The Hessian is not positive definite above the eigenvalue floor."""

    def __init__(self, eigenvalues) -> None:
        vals = ", ".join(f"{v:.6g}" for v in eigenvalues)
        super().__init__(f"Hessian not positive definite; eigenvalues: [{vals}]")
        self.eigenvalues = list(eigenvalues)


class NonConvergenceWarning(UserWarning):
    """The optimizer stopped before meeting its gradient tolerance."""


class BoundaryWarning(UserWarning):
    """An estimate lies on or next to the boundary of the parameter box."""


class StationarityWarning(UserWarning):
    """Simulation requested for weights summing to one or more."""
