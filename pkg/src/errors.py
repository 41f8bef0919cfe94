from typing import Optional


class FreqHopError(Exception):
    """Base class for every error raised by the simulator"""


class ConfigurationError(FreqHopError, ValueError):
    """
    Invalid experiment or element configuration

    Args:
        message: Human readable description
        key: Offending configuration key (optional)
        line: 1-based line in the config file where the key appears (optional)
    """

    def __init__(self, message: str, key: Optional[str] = None, line: Optional[int] = None):
        self.key = key
        self.line = line
        location = ""
        if key is not None and line is not None:
            location = f" (key '{key}', line {line})"
        elif key is not None:
            location = f" (key '{key}')"
        super().__init__(f"{message}{location}")


class DomainError(FreqHopError, ValueError):
    """Argument outside the domain of an operation"""


class DegenerateInputError(DomainError):
    """Input collapses to a zero vector or zero-length geometry"""


class UndefinedEstimateError(DomainError):
    """g2 estimate requested with zero singles or zero trials"""


class EmptyPostSelectionError(FreqHopError):
    """Post-selection condition has zero probability"""
