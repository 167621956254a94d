class NumericalError(RuntimeError):
    """Base class for failures of a numerical kernel on valid input."""


class OverflowRangeError(NumericalError):
    pass


class PoleError(NumericalError):
    pass


class SingularPivotError(NumericalError):
    pass


class DegenerateError(NumericalError):
    pass


class ConvergenceError(NumericalError):
    def __init__(self, message: str, delta: float):
        super().__init__(f"{message} (achieved relative delta {delta:.3e})")
        self.delta = delta
