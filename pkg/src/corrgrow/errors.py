"""Exception types shared across the package."""


class CorrgrowError(Exception):
    """Base class for all package errors."""


class NotATree(CorrgrowError):
    """Edge list is disconnected, cyclic, or mislabeled."""


class InvalidSize(CorrgrowError):
    """Requested tree size is smaller than the seed."""


class InvalidTStar(CorrgrowError):
    """Correlation time outside [seed size, n]."""


class NotAnEdge(CorrgrowError):
    """Vertex pair is not an edge of the tree."""


class SizeMismatch(CorrgrowError):
    """The two trees of a pair have different vertex counts."""


class DegenerateZeroGap(CorrgrowError):
    """The two largest pendent subtree fractions are exactly equal,
    so the squared-gap statistic is zero and its inverse is undefined."""


class DegenerateRank(CorrgrowError):
    """A per-rank statistic has a zero denominator (should be impossible
    while subtree sizes are positive)."""


class OutOfSupport(CorrgrowError):
    """Probability mass requested outside the distribution's support."""
