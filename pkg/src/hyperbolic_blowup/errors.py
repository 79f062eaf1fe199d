"""
Exception types raised by hyperbolic-blowup.
"""


class HyperbolicBlowupError(Exception):
    """Base class for all package errors."""


class CoordinateDomainError(HyperbolicBlowupError, ValueError):
    """A point lies outside the open quadrant."""

    def __init__(self, field: str, value: float) -> None:
        super().__init__(f"{field} must be positive, got {value!r}")
        self.field = field
        self.value = value


class CoordinateRangeError(HyperbolicBlowupError, OverflowError):
    """A z-point maps outside the floating range."""


class ConfigValidationError(HyperbolicBlowupError, ValueError):
    """A scenario config violates one or more invariants."""

    def __init__(self, violations: list[str]) -> None:
        super().__init__("invalid config: " + "; ".join(violations))
        self.violations = list(violations)


class IntegrationError(HyperbolicBlowupError, ArithmeticError):
    """The solver state stopped being finite."""

    def __init__(self, message: str, node: int | None = None, t: float | None = None) -> None:
        self.node = node
        self.t = t
        self.detail = message
        super().__init__(self._render())

    def _render(self) -> str:
        parts = [self.detail]
        if self.node is not None:
            parts.append(f"node {self.node}")
        if self.t is not None:
            parts.append(f"t={self.t!r}")
        return ", ".join(parts)

    def at_time(self, t: float) -> "IntegrationError":
        """Return a copy annotated with the failure time."""
        return IntegrationError(self.detail, node=self.node, t=t)


class StepCollapseError(HyperbolicBlowupError):
    """The adaptive step size fell below dt_min."""

    def __init__(self, t: float, dt: float) -> None:
        super().__init__(f"step size {dt!r} below minimum at t={t!r}")
        self.t = t
        self.dt = dt


class BlowupFitError(HyperbolicBlowupError, ValueError):
    """A blow-up time cannot be fitted to the series."""


class GrowthFitError(HyperbolicBlowupError, ValueError):
    """A growth rate cannot be fitted to the series."""


class ShapeMismatchError(HyperbolicBlowupError, ValueError):
    """Two iterates are sampled on different grids."""
