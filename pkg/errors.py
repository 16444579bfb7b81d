"""Exception hierarchy for the zeta engine.

Failures that are data (non-degeneracy witnesses, cancelled poles) are never
raised; these classes cover invalid input and refused work only.
"""
from typing import Optional


class ZetaError(Exception):
    """Base class for every error raised by this package."""


class ParseError(ZetaError):
    """Polynomial text could not be parsed."""

    def __init__(self, message: str, position: int, text: str = ""):
        self.message = message
        self.position = position  # 0-based column into the input text
        self.text = text
        super().__init__(f"{message} at position {position}")

    def pointer(self) -> str:
        """Render the offending text with a caret under the failing column."""
        if not self.text:
            return str(self)
        return f"{self.text}\n{' ' * self.position}^ {self.message}"


class DimensionMismatchError(ZetaError):
    """Vectors or polynomials of different arity were combined."""


class SpecValidationError(ZetaError):
    """A problem spec or mapping violates a precondition."""


class TriangulationError(ZetaError):
    """A ray list does not positively span the cone it was claimed to span."""


class BudgetExceededError(ZetaError):
    """An exhaustive enumeration would exceed its configured budget."""

    def __init__(self, what: str, size: int, budget: int, hint: Optional[str] = None):
        self.what = what
        self.size = size
        self.budget = budget
        message = f"{what}: {size} points exceeds budget {budget}"
        if hint:
            message += f" ({hint})"
        super().__init__(message)


class DegenerateMappingError(ZetaError):
    """The mapping failed the non-degeneracy check and no override was given."""

    def __init__(self, report):
        self.report = report
        first = report.witnesses[0] if report.witnesses else None
        detail = f"; first witness: {first.describe()}" if first else ""
        super().__init__(
            f"mapping is degenerate ({len(report.witnesses)} witnesses){detail}"
        )


class OracleRegionError(ZetaError):
    """The evaluation point lies outside the region where the integral converges."""
