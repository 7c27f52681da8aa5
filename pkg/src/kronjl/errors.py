"""Exception types shared across the package."""


class KronjlError(Exception):
    """Base class for all package-specific errors."""


class IndexRangeError(KronjlError, ValueError):
    """A coordinate or flat index lies outside its declared range."""


class AxisConflictError(KronjlError, ValueError):
    """Axis sets overlap where they must be disjoint, or miss a required axis."""


class ShapeError(KronjlError, ValueError):
    """An array shape, vector length, or axis size violates a contract."""


class BudgetError(KronjlError, RuntimeError):
    """A combinatorial enumeration would exceed its configured budget."""


class ConfigError(KronjlError, ValueError):
    """An experiment configuration is missing or inconsistent."""
