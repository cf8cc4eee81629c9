"""Exception types shared across the package."""


class UndefinedRatioError(ValueError):
    """A diagonal ray has too few nonzero elements for a ratio test."""


class NoConvergenceError(ValueError):
    """A decay ratio >= 1 admits no finite efficiency threshold."""


class ExtrapolationError(ValueError):
    """A kernel was evaluated outside its tabulated range."""


class NumericalSanityError(RuntimeError):
    """A truncated state failed a normalization sanity check."""
