"""Exception hierarchy shared across the package."""


class TdLabError(Exception):
    """Base class for all tdlab errors."""


class ConfigError(TdLabError):
    """Malformed or inconsistent configuration input."""


class NotIrreducible(TdLabError):
    """The policy-induced chain's transition graph is not strongly connected."""


class NotAperiodic(TdLabError):
    """The policy-induced chain has period greater than one."""


class SingularSystem(TdLabError):
    """A linear solve that should always succeed failed; internal error."""


class InvalidLambda(TdLabError):
    """gamma * lambda >= 1, or lambda >= 1 in the average-reward setting."""


class ZeroFeatureMatrix(TdLabError):
    """Feature matrix has numerical rank zero."""


class InconsistentSystem(TdLabError):
    """A w = -b admits no solution at the working tolerance.

    This signals a violated model assumption (the theory guarantees
    consistency for both TD systems) or a numerical-rank misjudgment,
    so it is surfaced loudly instead of silently returning a
    least-squares compromise.
    """


class NonFiniteUpdate(TdLabError):
    """A learner update produced NaN or infinity (divergence).

    Attributes carry the last finite state and the step index when the
    raising site knows them.
    """

    def __init__(self, message, step=None, state=None):
        super().__init__(message)
        self.step = step
        self.state = state


class EmptyWindow(TdLabError):
    """A rate-fit window selects no checkpoints."""
