"""Exception hierarchy shared by the library and the command line.

Each class carries the process exit code the CLI maps it to.
"""


class OSGError(Exception):
    exit_code = 1


class ConfigError(OSGError, ValueError):
    exit_code = 2


class InvalidIndexError(OSGError, IndexError):
    pass


class CutoffTooSmallError(OSGError):
    """The truncated Fock window holds less weight than the tolerance allows."""


class UnreachableToleranceError(OSGError):
    pass


class BudgetExceededError(OSGError):
    exit_code = 3


class GridIOError(OSGError, OSError):
    exit_code = 4


class InfeasibleSqueezeError(OSGError, ValueError):
    exit_code = 5


class DegenerateTargetError(OSGError, ValueError):
    pass


class EmptyRegionError(OSGError, ValueError):
    pass


class NotConvergedError(OSGError):
    pass


class TruncationLeakError(OSGError):
    pass


class GridAliasingError(OSGError):
    pass
