"""Exception hierarchy shared by every module."""


class DytwistError(Exception):
    """Base class for all library errors."""


class PoleProximity(DytwistError, ValueError):
    """An argument sits within the pole-guard radius of a singularity."""


class ZeroOrPole(PoleProximity):
    """A double sine argument sits on its zero/pole lattice."""


class QuadratureFailure(DytwistError, ArithmeticError):
    """Adaptive quadrature did not reach its tolerance within the panel budget."""


class NotRepresentable(DytwistError, ValueError):
    """The request has no counterpart in the evaluation representation (e.g. c != 0)."""
