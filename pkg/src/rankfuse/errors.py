"""Exception types raised by the library.

Each error class carries the CLI exit code it maps to, so the command line
layer can translate failures without a lookup table of its own.
"""


class RankFuseError(Exception):
    exit_code = 2


class NonFiniteError(RankFuseError, ValueError):
    exit_code = 2


class MatrixParseError(RankFuseError, ValueError):
    exit_code = 2


class ZeroMatrixError(RankFuseError, ValueError):
    exit_code = 3


class DimensionMismatchError(RankFuseError, ValueError):
    exit_code = 4


class IndexOutOfRangeError(RankFuseError, IndexError):
    exit_code = 2


class InvalidArgumentError(RankFuseError, ValueError):
    exit_code = 2


class InvalidAlphaError(InvalidArgumentError):
    pass


class InvalidSpectrumError(InvalidArgumentError):
    pass


class InfeasibleConstructionError(RankFuseError, RuntimeError):
    exit_code = 5
