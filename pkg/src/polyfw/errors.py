"""Exception hierarchy shared across the package."""


class PolyFWError(Exception):
    """Base class for all package-specific errors."""


class DimensionMismatch(PolyFWError):
    """Array shapes disagree with the problem dimension."""


class UnboundedOrEmpty(PolyFWError):
    """Vertex enumeration found no basic feasible solution."""


class EmptyVertexList(PolyFWError):
    """An operation needs the vertex list but it is empty."""


class Infeasible(PolyFWError):
    """The LP has no feasible point."""


class Unbounded(PolyFWError):
    """The LP is unbounded below (modeling error for a bounded polytope)."""


class InfeasiblePoint(PolyFWError):
    """A point violates a constraint beyond tolerance."""


class UnknownVertexId(PolyFWError):
    """A vertex id does not index the enumerated vertex list."""


class DegeneratePolytope(PolyFWError):
    """Every constraint is active at every vertex; phi is undefined."""


class DegenerateDirection(PolyFWError):
    """The chosen search direction is numerically zero."""


class NoConvergence(PolyFWError):
    """An iterative solve hit its iteration cap before reaching tolerance."""

    def __init__(self, message, achieved_gap=None):
        super().__init__(message)
        self.achieved_gap = achieved_gap


class MissingParam(PolyFWError):
    """A sample-size plan lacks a required named parameter."""


class NonpositiveDenominator(PolyFWError):
    """A planner formula denominator is zero or negative (e.g. p_g >= 1)."""


class NonpositiveS(PolyFWError):
    """A tail bound was requested at a nonpositive threshold."""


class EpsGOutOfRange(PolyFWError):
    """eps_g falls outside the open interval (0, 1/(4D))."""


class MalformedTrace(PolyFWError):
    """A run trace is missing fields the verifier needs."""


class DegenerateFit(PolyFWError):
    """Log-log regression has no spread in the abscissa."""


class ConfigError(PolyFWError):
    """Experiment configuration is invalid; carries the offending field path."""

    def __init__(self, path, message):
        super().__init__(f"{path}: {message}")
        self.path = path
