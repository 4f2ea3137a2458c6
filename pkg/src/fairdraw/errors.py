"""Exception types shared across the package."""


class FairdrawError(Exception):
    """Base class for all package errors."""


class SpecError(FairdrawError):
    """A drawing specification or other input violates an invariant."""


class CryptoError(FairdrawError):
    """Malformed key or signature encoding (distinct from 'verification false')."""


class StateError(FairdrawError):
    """Operation attempted in the wrong protocol phase."""


class FormatError(FairdrawError):
    """A serialized document (transcript, message, spec file) cannot be parsed."""

    def __init__(self, message, offset=None):
        super().__init__(message if offset is None else f"{message} (at offset {offset})")
        self.offset = offset
