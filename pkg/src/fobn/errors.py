"""Exception types shared across the package."""


class FobnError(Exception):
    pass


class ParseError(FobnError):
    """Malformed DSL text.  ``line`` and ``column`` are 1-based when known."""

    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        self.message = message
        self.line = line
        self.column = column
        where = f"{line}:{column}: " if line is not None else ""
        super().__init__(where + message)


class SpecError(FobnError):
    """A network specification that is well-formed text but semantically invalid."""


class DecodeError(FobnError):
    """A bit string that is not in the image of the encoder."""


class ResourceLimitError(FobnError):
    """An exhaustive computation would exceed its configured cap."""


class MachineError(FobnError):
    """A machine description that cannot be normalized or run."""
