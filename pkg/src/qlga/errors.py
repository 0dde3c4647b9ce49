"""Exception hierarchy shared by the library and the command line runner."""


class QLGAError(Exception):
    """Base class for all errors raised by :mod:`qlga`."""

    exit_code = 1


class DimensionError(QLGAError, ValueError):
    """Lattice sizes of two interacting objects disagree."""

    exit_code = 3


class ConfigError(QLGAError, ValueError):
    """An experiment configuration is malformed or inconsistent."""

    exit_code = 3


class NumericContractError(QLGAError, ArithmeticError):
    """A unitarity or eigen-residual guarantee was violated."""

    exit_code = 4


class NonUnitaryError(NumericContractError):
    pass


class ConvergenceError(NumericContractError):
    """The eigensolver exhausted its iteration budget."""


class BandEdgeError(NumericContractError):
    """Group velocity requested at a band edge where no finite limit exists."""


class OutputError(QLGAError, OSError):
    """An output file or directory could not be written."""

    exit_code = 5
