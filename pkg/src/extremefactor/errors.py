"""Exception types raised across the package.

All of them derive from ``ValueError`` so callers that only care about
"bad input" can catch that.
"""


class ExtremeFactorError(ValueError):
    pass


class InvalidBlockSize(ExtremeFactorError):
    pass


class InvalidSubset(ExtremeFactorError):
    pass


class ContractViolation(ExtremeFactorError):
    pass


class InvalidLoading(ExtremeFactorError):
    pass


class InvalidParameter(ExtremeFactorError):
    pass


class InvalidLength(ExtremeFactorError):
    pass


class InvalidInput(ExtremeFactorError):
    pass


class InvalidCluster(ExtremeFactorError):
    pass


class SolverDisagreement(RuntimeError):
    """Two clique solvers returned different sizes on the same graph."""
