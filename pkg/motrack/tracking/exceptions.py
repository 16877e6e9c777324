from typing import Optional

from .constants import (EXIT_CONFIG_ERROR, EXIT_DATA_ERROR,
                        EXIT_INTERNAL_ERROR)


class TrackingError(Exception):
    exit_code = EXIT_INTERNAL_ERROR


class ConfigError(TrackingError):
    """Invalid configuration; keeps every violation found, not just one."""

    exit_code = EXIT_CONFIG_ERROR

    def __init__(self, violations):
        if isinstance(violations, str):
            violations = [violations]
        self.violations = list(violations)
        super().__init__('; '.join(self.violations))


class SynthSpecError(ConfigError):
    pass


class DataError(TrackingError):
    exit_code = EXIT_DATA_ERROR


class ParseError(DataError):

    def __init__(self, message: str, line: Optional[int] = None):
        self.line = line
        if line is not None:
            message = f'line {line}: {message}'
        super().__init__(message)


class BoxValidationError(ParseError):
    pass


class AlignmentError(DataError):
    pass


class ConsistencyError(DataError):
    pass


class SequencingError(DataError):
    pass


class ContractViolation(TrackingError):
    exit_code = EXIT_INTERNAL_ERROR
