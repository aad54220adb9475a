from typing import Optional


class RepairForgeError(Exception):
    """Base class for every error raised by the repair pipeline."""


class _PositionedError(RepairForgeError):
    def __init__(self, message: str, line: Optional[int] = None, column: Optional[int] = None):
        self.message = message
        self.line = line
        self.column = column
        super().__init__(self.__str__())

    def __str__(self) -> str:
        if self.line is None:
            return self.message
        if self.column is None:
            return f"line {self.line}: {self.message}"
        return f"line {self.line}, column {self.column}: {self.message}"


class ParseError(_PositionedError):
    """Source text is not a well-formed MiniLang program."""


class TypeCheckError(_PositionedError):
    """Program is well-formed but refers to unknown names or mixes types."""


class LocationMismatch(RepairForgeError):
    """Patch does not match the expression found at its location (stale patch)."""


class ArityMismatch(RepairForgeError):
    """Test inputs do not match the number of function parameters."""


class InvalidInputFile(RepairForgeError):
    """A test suite, patch or constraint file could not be understood."""


class NoFailingTests(RepairForgeError):
    """Every test already passes; there is nothing to localize."""


class NoRepairableLocation(RepairForgeError):
    """No suspicious statement carries a repairable expression."""


class UnsupportedLocation(RepairForgeError):
    """The requested line holds no expression that can be replaced by a probe."""


class EvalBudgetExceeded(RepairForgeError):
    """A replay evaluated the probe more often than the configured bound."""


class InfeasibleLocation(RepairForgeError):
    """Some test cannot be made to pass by any valuation of the probe."""

    def __init__(self, message: str, test_name: Optional[str] = None):
        self.test_name = test_name
        super().__init__(message)


class SynthesisExhausted(RepairForgeError):
    """No expression within the size bound satisfies the repair constraint."""


class NoHeldOutTests(RepairForgeError):
    """Overfitting audit requested on a suite without held-out tests."""
