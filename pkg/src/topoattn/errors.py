"""Exception types shared across the package.

The CLI maps these onto exit codes: validation/parse errors exit 1,
OS-level I/O errors exit 2, anything else exits 3.
"""


class ValidationError(ValueError):
    """An argument or data value violates a documented precondition."""


class PgmParseError(ValidationError):
    """Malformed PGM input; `offset` is the byte position of the defect."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (byte {offset})")
        self.offset = offset


class TnsrFormatError(ValidationError):
    """Malformed TNSR tensor file."""
