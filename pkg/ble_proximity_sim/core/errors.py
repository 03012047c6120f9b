"""
Exception hierarchy for the BLE proximity simulator
"""

from typing import Optional


class ProximitySimError(Exception):
    """Base class for every error raised by this package"""


class ConfigParseError(ProximitySimError):
    """Scenario file could not be read into domain objects"""

    def __init__(self, message: str, field: Optional[str] = None,
                 line: Optional[int] = None, column: Optional[int] = None):
        self.field = field
        self.line = line
        self.column = column
        location = []
        if line is not None:
            location.append(f"line {line}")
            if column is not None:
                location.append(f"column {column}")
        if field:
            location.append(f"field '{field}'")
        prefix = f"{', '.join(location)}: " if location else ""
        super().__init__(f"{prefix}{message}")


class ScenarioValidationError(ProximitySimError):
    """Scenario parsed but violates a semantic rule"""


class LogFormatError(ProximitySimError):
    """Detection log or graph file is malformed"""

    def __init__(self, message: str, line: Optional[int] = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


class ModelValidationError(ProximitySimError, ValueError):
    """Usage model or analysis input out of its domain"""
