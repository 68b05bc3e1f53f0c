"""Exception hierarchy shared across the package.

The CLI maps these onto exit codes: configuration problems exit 2,
runtime invariant violations exit 3, I/O failures exit 4.
"""

from __future__ import annotations


class ConfigError(ValueError):
    """Invalid scenario configuration (bad file, bad value, bad geometry)."""


class AssumptionError(ConfigError):
    """A model assumption failed on the loaded data.

    ``label`` names the violated assumption (e.g. "A6") so error messages
    can point at the specific requirement.
    """

    def __init__(self, label: str, message: str):
        super().__init__(f"{label}: {message}")
        self.label = label


class InvariantViolation(RuntimeError):
    """A runtime check (bound, nonnegativity, monotonicity, budget) failed."""


class StabilityError(InvariantViolation):
    """Time step exceeds a stability limit, or the state went non-finite."""


class ConvergenceError(RuntimeError):
    """An iterative computation did not reach its tolerance in time."""
