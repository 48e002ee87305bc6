"""Semantic exceptions shared across the package."""


class CftrialError(Exception):
    """Base class for all package errors."""


class DomainError(CftrialError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class InvalidInputError(CftrialError, ValueError):
    """Inputs violate a declared invariant (counts, rates, fractions)."""


class InfeasibleScenarioError(CftrialError):
    """Scenario parameters are internally impossible (e.g. recent-test
    probability would reach or exceed 1)."""


class InfeasibleDesignError(CftrialError):
    """No trial size can reach the requested power.

    Carries ``limiting_power``: the power attainable as the trial grows
    without bound, which is what the variance floor of the counterfactual
    placebo estimate permits.
    """

    def __init__(self, message: str, limiting_power: float | None = None):
        super().__init__(message)
        self.limiting_power = limiting_power


class ConfigError(CftrialError, ValueError):
    """Scenario configuration failed validation. ``field_path`` names the
    offending key when known."""

    def __init__(self, message: str, field_path: str | None = None):
        if field_path:
            message = f"{field_path}: {message}"
        super().__init__(message)
        self.field_path = field_path
