"""Exception and warning types shared across the package."""


class DimensionError(ValueError):
    """Operand shapes are incompatible (mismatched product, non-square, ...)."""


class ConvergenceError(RuntimeError):
    """A LAPACK factorization failed to converge."""


class IllDeterminedRankError(ValueError):
    """The numerical rank sits inside a spectral gap that is too narrow to trust."""


class IllDeterminedRankWarning(UserWarning):
    pass


class NotEPError(ValueError):
    """An EP-only construction was requested for a non-EP operator."""


class PreconditionError(ValueError):
    """A theorem check was called on inputs that violate its hypotheses."""


class CutoffError(ValueError):
    pass


class UnsupportedCompositionError(TypeError):
    pass


class OperatorFileError(ValueError):
    """An operator file could not be parsed or failed validation."""
