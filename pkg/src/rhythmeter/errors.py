"""Exception hierarchy shared by all rhythmeter modules."""


class RhythmeterError(Exception):
    """Base class for every error raised by this package."""


# audio I/O
class MissingFile(RhythmeterError, FileNotFoundError):
    pass


class UnsupportedEncoding(RhythmeterError, ValueError):
    pass


class CorruptHeader(RhythmeterError, ValueError):
    pass


class InvalidRate(RhythmeterError, ValueError):
    pass


class InvalidLength(RhythmeterError, ValueError):
    pass


class LengthMismatch(RhythmeterError, ValueError):
    pass


class RateMismatch(RhythmeterError, ValueError):
    pass


class EmptyInput(RhythmeterError, ValueError):
    pass


# front end
class WindowTooLarge(RhythmeterError, ValueError):
    pass


class InvalidBand(RhythmeterError, ValueError):
    pass


class TooFewFrames(RhythmeterError, ValueError):
    pass


# tracker
class InvalidConfig(RhythmeterError, ValueError):
    pass


class EnvelopeTooShort(RhythmeterError, ValueError):
    pass


# metrics
class NoQualifyingSamples(RhythmeterError):
    """Every sample was skipped, so the metric is undefined."""


class NoContentTracks(RhythmeterError, ValueError):
    pass


class EmptyErrorPool(RhythmeterError):
    """No reference beat found a match anywhere; CBD is undefined."""


# synthesis
class InvalidSpec(RhythmeterError, ValueError):
    pass


# harness
class NoSamplesFound(RhythmeterError):
    pass


class InsufficientSettings(RhythmeterError, ValueError):
    pass


class GridCellFailure(RhythmeterError):
    pass
