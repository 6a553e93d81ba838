"""Error hierarchy; every error knows the CLI exit code it maps to"""
from typing import Any, Dict, Optional


class GConvexError(Exception):
    """Base class for all toolkit errors"""

    exit_code = 3

    def to_dict(self) -> Dict[str, Any]:
        return {
            "type": type(self).__name__,
            "message": str(self),
            "exit_code": self.exit_code,
        }


# ============================================================================
# INPUT ERRORS (exit 2)
# ============================================================================

class InputError(GConvexError):
    exit_code = 2


class ExpressionSyntaxError(InputError):
    """Malformed expression text; carries the offending character position"""

    def __init__(self, message: str, position: int, text: str = ""):
        self.position = position
        self.text = text
        super().__init__(f"{message} at position {position}")

    def to_dict(self) -> Dict[str, Any]:
        data = super().to_dict()
        data["position"] = self.position
        return data


class UnknownVariable(InputError):
    pass


class NonPolynomial(InputError):
    pass


class InvalidArgument(InputError):
    pass


class IndexOutOfRange(InputError):
    pass


class ZeroPolynomial(InputError):
    pass


class NotUnivariate(InputError):
    pass


class DegreeTooHigh(InputError):
    pass


class NotMonomial(InputError):
    pass


class DimensionMismatch(InputError):
    pass


# ============================================================================
# CONSTRUCTOR ERRORS (exit 4)
# ============================================================================

class NoConstructor(GConvexError):
    exit_code = 4


class HasCriticalPoint(NoConstructor):
    pass


class CriticalPointDetected(NoConstructor):
    pass


# ============================================================================
# POLE ERRORS (exit 5)
# ============================================================================

class PoleError(GConvexError):
    exit_code = 5


class PoleAtPoint(PoleError):
    pass


class PoleEncountered(PoleError):
    def __init__(self, message: str, time: Optional[float] = None):
        self.time = time
        super().__init__(message)


# ============================================================================
# NUMERICAL / INTERNAL ERRORS (exit 3)
# ============================================================================

class NumericalFailure(GConvexError):
    pass


class IterationCap(GConvexError):
    pass


class NonFinite(GConvexError):
    pass
