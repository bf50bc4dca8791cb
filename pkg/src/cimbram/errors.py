"""Exception types shared across the package."""


class CimbramError(Exception):
    """Base class for all package errors."""


class RangeError(CimbramError):
    """A row, address, or numeric argument is outside its legal range."""


class EncodingError(CimbramError):
    """An instruction word violates the encoding rules."""


class ReservedAddressError(CimbramError):
    """The instruction-capture address was read in hybrid mode."""


class ModeError(CimbramError):
    """Operation not allowed in the block's current mode."""


class IllegalSelectError(CimbramError):
    """A data-input write select was used during compute."""


class ArityError(CimbramError):
    """Wrong number of inputs for a fixed-arity operation."""


class CapacityError(CimbramError):
    """Rows, columns, or blocks exhausted."""


class OverlapError(CimbramError):
    """Operand row ranges overlap where they must not."""


class WidthError(CimbramError):
    """Inconsistent operand bit widths."""


class FormatError(CimbramError):
    """Mismatched float formats."""


class ConsistencyError(CimbramError):
    """Static reference data failed an internal consistency check."""


class ConfigError(CimbramError):
    """Invalid benchmark or architecture configuration."""


class VerificationError(CimbramError):
    """Simulator output disagrees with the scalar reference."""


class ParseError(CimbramError):
    """A text program could not be parsed."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line
