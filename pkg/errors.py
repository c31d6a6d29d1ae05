"""
Exception hierarchy for copula evaluation, sampling and the CLI
"""
from typing import Optional


class CopulaError(Exception):
    """Base class for all errors raised by this package"""


class DomainError(CopulaError, ValueError):
    """An argument lies outside the domain of the operation"""


class DimensionError(DomainError):
    """Vector length does not match the copula dimension"""


class NumericalError(CopulaError, ArithmeticError):
    """A numerical routine failed (factorization, non-finite result)"""


class ConfigError(CopulaError, ValueError):
    """Invalid run configuration"""

    def __init__(self, message: str, field: Optional[str] = None):
        super().__init__(message)
        self.field = field

    def to_dict(self) -> dict:
        """Machine-readable form written to the error stream"""
        payload = {"error": str(self)}
        if self.field is not None:
            payload["field"] = self.field
        return payload
