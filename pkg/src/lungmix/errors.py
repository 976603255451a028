"""Exception hierarchy shared across the toolkit.

Every error carries a ``category`` used by the CLI to pick its exit code:
``config`` -> 2, ``data`` -> 3, ``io`` -> 4.
"""


class LungmixError(Exception):
    category = "data"


class InvalidConfig(LungmixError):
    category = "config"


class EmptyAudio(LungmixError):
    pass


class ShapeMismatch(LungmixError):
    pass


class RateMismatch(LungmixError):
    pass


class SchemaMismatch(LungmixError):
    pass


class UnknownLabel(LungmixError):
    pass


class ParseError(LungmixError):
    pass


class MissingAudio(LungmixError):
    category = "io"


class NumericalError(LungmixError):
    pass
