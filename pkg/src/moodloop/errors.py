"""Exception hierarchy shared across the toolkit."""


class MoodloopError(Exception):
    """Base class for all toolkit errors."""


class InvalidScoreError(MoodloopError):
    """A valence/arousal score is non-finite or outside [-5, 5]."""


class InvalidAnnotationError(MoodloopError):
    """A raw music annotation is outside the 1..9 crowd-label range."""


class InputTooShortError(MoodloopError):
    """Signal shorter than one analysis window."""


class RecordingUnusableError(MoodloopError):
    """Too many EEG channels rejected to continue."""


class NoCleanDataError(MoodloopError):
    """Every window of a recording was flagged as artifact."""


class WindowSizeError(MoodloopError):
    """An EEG window does not have the expected sample count."""


class MissingChannelError(MoodloopError):
    """A channel required for the feature set was rejected or absent."""

    def __init__(self, channel: str):
        super().__init__(f"required channel missing or rejected: {channel}")
        self.channel = channel


class InsufficientDataError(MoodloopError):
    """Not enough observations for the requested computation."""


class DegenerateLabelsError(MoodloopError):
    """A binary training task received only one class."""


class StratificationError(MoodloopError):
    """A class would be absent from some training fold."""


class NoCandidatesError(MoodloopError):
    """No song in the library matches the designated quadrant."""


class UndefinedScoreError(MoodloopError):
    """Instability score requested without any repeated song."""


class UndefinedCorrelationError(MoodloopError):
    """Pearson correlation requested on a zero-variance vector."""


class DimensionMismatchError(MoodloopError):
    """Vector length does not match the model or expected layout."""


class ManifestError(MoodloopError):
    """Song manifest failed validation."""


class EEGParseError(MoodloopError):
    """EEG CSV failed validation."""


class BundleFormatError(MoodloopError):
    """Model bundle file is malformed or has an incompatible version."""


class ChecksumError(BundleFormatError):
    """Model bundle content does not match its embedded checksum."""


class ProtocolOrderError(MoodloopError):
    """Session API called out of the mandated step order."""
