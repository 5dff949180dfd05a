"""Exception types raised across the package."""


class CipherError(Exception):
    """Base class for every error raised by ciicrypt."""


class DimensionMismatch(CipherError, ValueError):
    pass


class IndexOutOfRange(CipherError, IndexError):
    pass


class NonPositiveDistance(CipherError, ValueError):
    pass


class DepthNotConvertible(CipherError, ValueError):
    pass


class InvalidPixelIndex(CipherError, ValueError):
    pass


class ZeroSeed(CipherError, ValueError):
    pass


class ParamOutOfRange(CipherError, ValueError):
    pass


class LengthMismatch(CipherError, ValueError):
    pass


class NotABijection(CipherError, ValueError):
    pass


class FractionOutOfRange(CipherError, ValueError):
    pass


class KeyParseError(CipherError, ValueError):
    """Malformed key text. ``line`` and ``field`` locate the problem when known."""

    def __init__(self, message, line=None, field=None):
        self.line = line
        self.field = field
        where = []
        if line is not None:
            where.append(f"line {line}")
        if field is not None:
            where.append(f"field {field!r}")
        if where:
            message = f"{', '.join(where)}: {message}"
        super().__init__(message)


class ImageFormatError(CipherError, ValueError):
    pass


class UnsupportedFormat(ImageFormatError):
    pass


class CorruptHeader(ImageFormatError):
    pass
