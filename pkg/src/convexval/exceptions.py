"""Exception hierarchy shared by all modules."""


class ConvexValError(ValueError):
    """Base class for invalid input or an operation outside its domain."""


class Unbounded(ConvexValError):
    pass


class EmptyInput(ConvexValError):
    pass


class DimensionMismatch(ConvexValError):
    pass


class NotCoercive(ConvexValError):
    pass


class NonConvexUnion(ConvexValError):
    pass


class NonPositiveLambda(ConvexValError):
    pass


class EuclideanNormNotPL(ConvexValError, NotImplementedError):
    pass


class SampleBudgetTooSmall(ConvexValError):
    pass


class NotComplete(ConvexValError):
    pass


class BadConfig(ConvexValError):
    pass


class IllConditioned(UserWarning):
    """Warning: a linear solve is badly scaled (tiny boxes in density recovery)."""
