from core.types import ExitCode


class ToolkitError(Exception):
    exit_code: ExitCode = ExitCode.DOMAIN_ERROR


class InvalidArgumentError(ToolkitError, ValueError):
    pass


class DomainError(ToolkitError):
    pass


class UnsupportedError(ToolkitError):
    pass


class PreconditionError(ToolkitError):
    pass


class ConfigError(ToolkitError):
    exit_code = ExitCode.CONFIG_ERROR


class InputError(ConfigError):
    """Unreadable or inconsistent input files (matrix or state files)."""


class NumericalRefusalError(ToolkitError):
    exit_code = ExitCode.NUMERICAL_REFUSAL


class NearExceptionalPointError(NumericalRefusalError):
    pass


class DegeneracyError(NumericalRefusalError):
    pass


class RangeError(NumericalRefusalError):
    pass
