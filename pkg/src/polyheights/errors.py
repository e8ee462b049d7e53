"""Exception hierarchy shared by all modules.

The CLI maps these onto exit codes: input problems exit 2, resource caps
exit 3, verification failures exit 1.
"""


class PolyheightsError(Exception):
    """Base class for all library errors."""


class InputError(PolyheightsError):
    """Malformed or inconsistent user input (CLI exit code 2)."""


class BadReductionError(InputError):
    """The map does not have good reduction at the requested prime."""


class ResourceLimitError(PolyheightsError):
    """A configured resource cap was hit (CLI exit code 3)."""


class DegreeCapError(ResourceLimitError):
    """Iterating the map would exceed the configured degree cap."""

    def __init__(self, degree: int, cap: int):
        self.degree = degree
        self.cap = cap
        super().__init__(f"iterate degree {degree} exceeds cap {cap}")


class PrecisionCeilingError(ResourceLimitError):
    """Adaptive truncation precision reached its ceiling without resolving."""


class RootFindingError(PolyheightsError):
    """Simultaneous root iteration failed to meet its residual target.

    Carries the best iterates and their residuals for diagnosis.
    """

    def __init__(self, message, best_roots=None, residuals=None):
        super().__init__(message)
        self.best_roots = best_roots
        self.residuals = residuals


class DegenerateInputError(PolyheightsError):
    """An operation received input on which its value is undefined."""
