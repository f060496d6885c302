"""Exception hierarchy shared by every module of the package."""

from __future__ import annotations


class SvcError(Exception):
    """Base class for all errors raised by svc_sim."""


class SingularModel(SvcError):
    """The (reduced) reactive sensitivity matrix cannot be inverted."""


class DegenerateAlignment(SvcError):
    """The participation-weighted pilot sensitivity is numerically zero."""


class NoActiveGenerator(SvcError):
    """An operation needs at least one connected / SVC-active generator."""


class NotReady(SvcError):
    """A sliding-window estimator was queried before its window filled."""


class NonFiniteInput(SvcError, ValueError):
    """A NaN or infinite value reached an arithmetic routine."""


class NonFiniteSample(NonFiniteInput):
    """A NaN or infinite sample was pushed into a differentiator."""


class DimensionMismatch(SvcError, ValueError):
    """Vector or matrix dimensions disagree with the generator count."""


class NotSettled(SvcError):
    """A series never stays inside the requested band."""


class EmptySeries(SvcError, ValueError):
    pass


class ScenarioError(SvcError):
    """Any failure inside a closed-loop run, annotated with the sim time."""

    def __init__(self, t: float, cause: Exception):
        super().__init__(f"at t={t:.3f} s: {type(cause).__name__}: {cause}")
        self.t = t
        self.cause = cause
