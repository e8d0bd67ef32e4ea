"""Exception hierarchy shared by the solvers and condition routines."""


class RiccondError(Exception):
    """Base class for all errors raised by riccond."""


class DimensionError(RiccondError, ValueError):
    """Array shapes are incompatible with the requested operation."""


class StructureError(RiccondError, ValueError):
    """A matrix lacks the symmetry or definiteness the operation requires."""


class SingularOperatorError(RiccondError, ArithmeticError):
    """A Lyapunov/Stein operator (or its Kronecker matrix) is numerically singular."""


class NoStabilizingSolutionError(RiccondError):
    """The Riccati equation has no Hermitian stabilizing solution (numerically)."""


class ConvergenceError(RiccondError):
    """An iterative solver failed to converge within its iteration budget."""
