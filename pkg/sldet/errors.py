class SldetError(Exception):
    """Root of every error raised by sldet."""


# ----------------------
# Input errors (exit code 1)
# ----------------------
class InputError(SldetError, ValueError):
    """Invalid user input: spec files, parameters outside their domain."""


class PoleError(InputError):
    """Argument sits on a pole of a meromorphic function."""


class ExprSyntaxError(InputError):
    def __init__(self, message, position, expected=()):
        self.position = position
        self.expected = frozenset(expected)
        detail = f"{message} at offset {position}"
        if self.expected:
            detail += " (expected " + ", ".join(sorted(self.expected)) + ")"
        super().__init__(detail)


class ExprEvalError(InputError):
    def __init__(self, message, x):
        self.x = x
        super().__init__(f"{message} at x={x!r}")


# ----------------------
# Numerical failures (exit code 2)
# ----------------------
class NumericalError(SldetError, RuntimeError):
    """A numerical procedure failed to deliver the requested accuracy."""


class ConvergenceError(NumericalError):
    pass


class QuadratureError(NumericalError):
    pass


class ExpansionMismatchError(QuadratureError):
    """Expansion-subtracted remainder is not integrable."""


class ResonanceError(NumericalError):
    pass


class StepFailureError(NumericalError):
    pass


class BracketError(NumericalError):
    pass


class BesselOverflowError(NumericalError):
    pass
