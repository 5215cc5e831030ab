"""Exception types raised across the package."""


class MarkovSAError(Exception):
    """Base class."""


class DimensionError(MarkovSAError, ValueError):
    pass


class NotStochasticError(MarkovSAError, ValueError):
    pass


class NotRegularError(MarkovSAError, ValueError):
    pass


class BoundsUndefinedError(MarkovSAError, ValueError):
    pass


class PoleError(MarkovSAError, ValueError):
    """Spherical angle too close to a pole of tan/cot."""

    def __init__(self, i: int, a: int, msg: str = ""):
        self.i, self.a = i, a
        super().__init__(msg or f"spherical angle ({i}, {a}) is within the pole guard band")


class ScheduleError(MarkovSAError, ValueError):
    pass


class NonFiniteError(MarkovSAError, FloatingPointError):
    def __init__(self, iteration: int, msg: str = ""):
        self.iteration = iteration
        super().__init__(msg or f"non-finite iterate at iteration {iteration}")


class EstimatorError(MarkovSAError, RuntimeError):
    pass


class InfeasibleError(MarkovSAError, RuntimeError):
    pass
