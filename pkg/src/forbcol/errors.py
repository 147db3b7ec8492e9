"""Exception hierarchy shared by every module."""


class ForbColError(Exception):
    """Base class for all library errors."""


class UniverseMismatch(ForbColError):
    pass


class GluingConflict(ForbColError):
    pass


class ColorClash(ForbColError):
    pass


class LoopCreated(ForbColError):
    pass


class BadIndex(ForbColError, IndexError):
    pass


class NotConnected(ForbColError):
    pass


class AlreadyOriented(ForbColError):
    pass


class PinConflict(ForbColError):
    pass


class TooLarge(ForbColError):
    pass


class NotUncolorable(ForbColError):
    pass


class LemmaCheckFailed(ForbColError):
    """A construction step did not pass its solver verification."""

    def __init__(self, message, query=None):
        super().__init__(message)
        self.query = query


class NoGroundGraph(ForbColError):
    pass


class IncompleteInputs(ForbColError):
    pass


class RemotenessFailed(ForbColError):
    pass


class UnverifiedGadget(ForbColError):
    pass


class HypothesisUnmet(ForbColError):
    pass


class FormatError(ForbColError, ValueError):
    """Malformed input document."""
