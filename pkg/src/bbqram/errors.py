"""Exception hierarchy shared by every stage of the pipeline."""


class BBQRAMError(Exception):
    """Base class for all errors raised by this package."""


class ZeroMatrixError(BBQRAMError, ValueError):
    pass


class NonFiniteError(BBQRAMError, ValueError):
    pass


class DimMismatchError(BBQRAMError, ValueError):
    pass


class OutOfRangeError(BBQRAMError, IndexError):
    pass


class FixedPointOverflowError(BBQRAMError, OverflowError):
    pass


class DirtyTreeError(BBQRAMError):
    """A query was started while some switch was not in the wait state."""


class PathMismatchError(BBQRAMError):
    """An ActivePaths handle does not belong to the tree's current route."""


class PreconditionError(BBQRAMError):
    """A register-level operation was applied outside its domain."""


class StaleAddressError(PreconditionError):
    """The address register changed between a retrieval and its uncompute."""


class NegativeDecodeError(BBQRAMError, ValueError):
    pass


class ZeroAngleError(BBQRAMError, ValueError):
    pass


class DisentanglementError(BBQRAMError):
    """Working registers did not end in a uniform basis state."""
