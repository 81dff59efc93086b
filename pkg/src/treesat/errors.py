"""Exception types shared across the package."""


class TreesatError(Exception):
    """Base class for all package-specific errors."""


class WeightDeficientError(TreesatError):
    """Vector weight is below one, so no weight-one trim exists."""


class WeightNotOneError(TreesatError):
    """Leaf-profile weight is not exactly one."""


class KTooSmallError(TreesatError):
    """Clause width below the minimum the operation supports."""


class ThresholdUnreachableError(TreesatError):
    """No admissible splice index: vector weight fell below the threshold."""


class CapExceededError(TreesatError):
    """Materialization would exceed the vertex cap."""

    def __init__(self, required, cap):
        super().__init__(f"materialization needs {required} vertices, cap is {cap}")
        self.required = required
        self.cap = cap


class NotAKdTreeError(TreesatError):
    """Input tree violates the leaf-distance or occurrence conditions."""


class InvalidTraceError(TreesatError):
    """Trace is unusable for plan extraction (bad status or side condition)."""


class LeafTooShallowError(TreesatError):
    """Tree has a leaf closer to the root than the clause width allows."""


class FormulaError(TreesatError):
    """Malformed CNF formula or DIMACS input."""


class BudgetExhaustedError(TreesatError):
    """Work limit hit before the computation could decide."""


class CertificateNotFoundError(TreesatError):
    """No certificate point passed the rigorous inequality check."""
