"""Exception types shared across the package."""


class DomainError(ValueError):
    """An argument lies outside the region where an operation is defined."""


class LogDomainError(ArithmeticError):
    """The argument of the one-loop logarithm became non-positive.

    This is how a truncated flow signals that it can no longer follow the
    running potential (e.g. the shallow double well).
    """

    def __init__(self, u0, m=None, g2=None):
        self.u0 = float(u0)
        self.m = m
        self.g2 = g2
        msg = f"log-domain violation: 1 + u(0) = {1.0 + self.u0:.6g} <= 0"
        if m is not None:
            msg += f" at mode m={m}"
        if g2 is not None:
            msg += f" (g2={g2:.6g})"
        super().__init__(msg)


class ConvergenceError(RuntimeError):
    """An iterative or adaptive procedure did not reach its tolerance."""

    def __init__(self, message, history=None):
        super().__init__(message)
        self.history = list(history) if history is not None else []
