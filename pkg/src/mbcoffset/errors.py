"""Exception types raised by the analysis pipeline.

Invalid arguments raise plain ``ValueError``; the classes below cover the
numerical failure modes callers may want to handle separately.
"""


class MBCError(Exception):
    """Base class for computation errors."""


class PoleEvaluationError(MBCError, ZeroDivisionError):
    def __init__(self, s, message=None):
        self.s = s
        super().__init__(message or f"evaluation at a pole, s = {s!r}")


class SingularMatrixError(MBCError, ValueError):
    def __init__(self, message, omega=None):
        self.omega = omega
        super().__init__(message)


class DegenerateModelError(MBCError, ValueError):
    pass


class SearchFailedError(MBCError):
    pass


class MarginalStabilityError(MBCError):
    def __init__(self, omega):
        self.omega = omega
        super().__init__(f"I + L(jw) is singular at w = {omega!r} rad/s")


class IllExcitationError(MBCError):
    def __init__(self, omega):
        self.omega = omega
        super().__init__(f"input auto-spectrum is rank deficient at w = {omega!r} rad/s")


class InstabilityError(MBCError):
    def __init__(self, time, value):
        self.time = time
        self.value = value
        super().__init__(f"simulation diverged at t = {time:.4f} s (|signal| = {value:.3e})")
