class SslabError(Exception):
    """Base class for errors raised by sslab."""


class InvalidArgumentError(SslabError, ValueError):
    pass


class ContractViolationError(SslabError, ValueError):
    """A documented contract (constraint flag, admissibility, clearing) is broken."""


class InsufficientDataError(SslabError, ValueError):
    pass


class MarketClearingError(ContractViolationError):
    pass


class ConvergenceError(SslabError, RuntimeError):
    """Iterative solver ran out of budget.

    Args:
        message (str): What failed.
        diagnostics (dict, optional): Solver state at the last iteration.
    """

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


class ConfigError(InvalidArgumentError):
    """Invalid experiment configuration, one diagnostic per offending field."""

    def __init__(self, problems):
        self.problems = list(problems)
        super().__init__('invalid configuration: ' + '; '.join(self.problems))
