"""Exception hierarchy.

Every failure raised by the library derives from :class:`EcgError`, so
callers can catch the whole family in one place.  Errors raised inside
:func:`shorthrv.pipeline.process_recording` are re-raised as
:class:`StageError` carrying the name of the failing stage.
"""


class EcgError(Exception):
    """Base class for all library errors."""


# signal_io
class MalformedFile(EcgError, ValueError):
    pass


class NonFiniteSample(EcgError, ValueError):
    pass


class EmptySignal(EcgError, ValueError):
    pass


class BadSamplingRate(EcgError, ValueError):
    pass


class DuplicateSubject(EcgError, ValueError):
    pass


class ScoreOutOfRange(EcgError, ValueError):
    pass


class IoFailure(EcgError, OSError):
    pass


# preprocess
class TooShort(EcgError, ValueError):
    pass


class InvalidBand(EcgError, ValueError):
    pass


# rpeak / hrv
class NoPeaksFound(EcgError):
    pass


class TooFewIntervals(EcgError, ValueError):
    pass


class EmptySeries(EcgError, ValueError):
    pass


# stats / classify
class EmptyGroup(EcgError, ValueError):
    pass


class NonFiniteInput(EcgError, ValueError):
    pass


class SingleClassCohort(EcgError, ValueError):
    pass


class SingleClass(EcgError, ValueError):
    pass


class TooSmallCohort(EcgError, ValueError):
    pass


# synth
class InfeasibleSpec(EcgError, ValueError):
    pass


# pipeline
class EmptyCohort(EcgError):
    pass


class StageError(EcgError):
    """A stage failure inside the per-recording pipeline.

    Attributes
    ----------
    stage : str
        One of ``"preprocess"``, ``"rpeak"``, ``"nn"``, ``"hrv"`` (or
        ``"load"`` when raised while reading a cohort).
    cause : EcgError
        The original error.
    """

    def __init__(self, stage, cause):
        self.stage = stage
        self.cause = cause
        super().__init__(f"[{stage}] {type(cause).__name__}: {cause}")
