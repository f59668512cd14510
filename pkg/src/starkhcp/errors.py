"""Exception hierarchy; the CLI maps these to exit codes."""


class StarkHCPError(Exception):
    exit_code = 2


class ConfigError(StarkHCPError, ValueError):
    """Invalid configuration or user input."""

    exit_code = 1


class NumericalError(StarkHCPError, ArithmeticError):
    """A numerical routine failed or produced an untrustworthy result."""

    exit_code = 2


class DomainError(NumericalError):
    """A physical quantity was requested outside its domain of definition."""


class InternalError(StarkHCPError, RuntimeError):
    """Inconsistent internal state, such as mismatched bases."""

    exit_code = 2
