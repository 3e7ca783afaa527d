"""Exception types raised across the package.

Everything inherits from TreelocateError so callers can catch broadly;
most classes also inherit ValueError because they signal invalid inputs.
"""


class TreelocateError(Exception):
    """Base class for all package errors."""


# ---------------------------------------------------------------- trees

class SelfLoopError(TreelocateError, ValueError):
    """An edge joins a node to itself."""


class DuplicateEdgeError(TreelocateError, ValueError):
    """The same undirected edge appears twice."""


class CycleError(TreelocateError, ValueError):
    """The edge list contains a cycle."""


class DisconnectedError(TreelocateError, ValueError):
    """The node set is not connected by the given edges."""


class NodeOutOfRangeError(TreelocateError, IndexError):
    """A node id falls outside 0..n-1."""


class TreeTooSmallError(TreelocateError, ValueError):
    """Fewer than two nodes requested."""


# --------------------------------------------- observations & reduction

class EmptyObserversError(TreelocateError, ValueError):
    """The observer set is empty."""


class ObserversCoverAllNodesError(TreelocateError, ValueError):
    """Every node is an observer; no candidate sources remain."""


class TiedMinimumError(TreelocateError, ValueError):
    """Two observers share the exact minimum infection time.

    Continuous delays make this a probability-zero event; a tie therefore
    signals degenerate input such as rounded timestamps.
    """


class NotAStarError(TreelocateError, RuntimeError):
    """Feasible class boundaries share no common observer (internal
    inconsistency: cannot happen for classes produced by feasible_classes)."""


# ------------------------------------------------ transforms & fitting

class CandidateIsObserverError(TreelocateError, ValueError):
    """A candidate source must not be an observer."""


class UnsupportedDelayModelError(TreelocateError, ValueError):
    """Conditional transforms require exponential edge delays."""


class DegenerateTimeError(TreelocateError, ValueError):
    """An observed infection time is non-positive or non-finite."""


class NoSamplesError(TreelocateError, ValueError):
    """The empirical transform needs at least one observation."""


class EmptyCandidatesError(TreelocateError, ValueError):
    """No candidate sources to minimize over."""


class DimensionMismatchError(TreelocateError, ValueError):
    """A vector has the wrong length for the declared dimension."""


# ------------------------------------------------------ numeric domains

class NegativeArgumentError(TreelocateError, ValueError):
    """Argument must be nonnegative."""


class NonpositiveArgumentError(TreelocateError, ValueError):
    """Argument must be strictly positive."""


class EmptyRatesError(TreelocateError, ValueError):
    """A hypoexponential needs at least one stage rate."""


# -------------------------------------------------------------- harness

class ConfigInvalidError(TreelocateError, ValueError):
    """An experiment configuration failed validation."""


class MalformedNetworkFileError(TreelocateError, ValueError):
    """A network/edge-list file could not be parsed."""


class NotEnoughLeavesError(TreelocateError, RuntimeError):
    """Could not draw a tree with enough leaves for the observer count."""
