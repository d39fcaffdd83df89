"""Exception hierarchy shared across the package.

The CLI maps these onto exit codes: usage errors exit 1, ``DataError``
(and subclasses) exit 2, anything else exits 3.
"""


class PoolforgeError(Exception):
    """Base class for all errors raised by this package."""


class DataError(PoolforgeError):
    """Input data violates a documented precondition or failed to parse."""


class CatalogError(DataError):
    """Unknown catalog id, download failure, or verification mismatch."""


class DegenerateBagError(PoolforgeError):
    """An instance bag cannot support the requested computation.

    Raised for single-class or too-small bags, and when the resampling
    guard exhausts its retry budget.
    """
