"""Exception hierarchy for the tislf engine.

The CLI maps these onto exit codes: ConfigError -> 2, InputError and
subclasses -> 3, anything else escaping a stage -> 4.
"""


class TislfError(Exception):
    """Base class for all engine errors."""


class ConfigError(TislfError):
    """Invalid, unknown, or out-of-range configuration."""


class InputError(TislfError):
    """Problems with user-supplied inputs (frames, targets, scripts)."""


class InputNotFound(InputError):
    """A required input path does not exist."""


class EmptySequence(InputNotFound):
    """The frame directory exists but contains no frames."""


class SequenceOrderError(InputError):
    """Duplicate or conflicting frame indices in the input directory."""


class FrameDecodeError(InputError):
    """A frame file could not be decoded."""

    def __init__(self, filename: str, reason: str = ""):
        self.filename = filename
        msg = f"cannot decode frame {filename!r}"
        if reason:
            msg += f": {reason}"
        super().__init__(msg)


class ScriptError(InputError):
    """A synthetic-video script is malformed or unrenderable."""


class InvalidResizeError(TislfError):
    """Requested output dimensions exceed the source dimensions."""


class ImageTooSmall(TislfError):
    """Image below the minimum size the feature detector supports."""


class SequenceTooShort(TislfError):
    """Fewer frames than the operation needs."""
