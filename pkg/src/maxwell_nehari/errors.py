"""Exception types shared across the solver modules."""


class RegimeError(ValueError):
    """The requested problem lies outside the regime the solver supports.

    The command line maps this to the controlled-refusal exit status.
    """


class AliasingError(ValueError):
    """A quadrature grid is too coarse for the requested transform."""

    def __init__(self, message, required=None):
        super().__init__(message)
        self.required = required


class StructureError(ValueError):
    """Coefficient arrays do not match the basis they are used with."""


class ConvergenceError(RuntimeError):
    """An iterative solve stopped before reaching its tolerance."""

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual
