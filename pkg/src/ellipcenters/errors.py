"""Exception types shared across the solver stack."""


class NumericalFailureError(RuntimeError):
    """A bracketing or bisection loop exceeded its iteration budget.

    This cannot happen for a genuinely smooth, strongly convex objective;
    it signals a bad objective or inconsistent constants.
    """


class DegeneratePlaneError(RuntimeError):
    """The two gradient directions are numerically parallel, so the 2x2
    plane system is singular.  Callers fall back to the segment step."""


class InnerStallError(RuntimeError):
    """The 2-D inner solver hit its iteration cap while still far from its
    gradient tolerance.  Outer loops abort rather than silently accept an
    inexact plane minimizer."""
