"""Exception hierarchy shared by every genlab module."""


class GenlabError(Exception):
    """Base class for all genlab errors."""


class DimensionMismatch(GenlabError, ValueError):
    pass


class MetricViolation(GenlabError, ValueError):
    """A distance matrix failed one of the metric axioms."""

    def __init__(self, axiom: str, indices: tuple, detail: str = ""):
        self.axiom = axiom
        self.indices = indices
        msg = f"metric axiom '{axiom}' violated at indices {indices}"
        if detail:
            msg += f": {detail}"
        super().__init__(msg)


class InvalidDistribution(GenlabError, ValueError):
    pass


class SolverFailure(GenlabError, RuntimeError):
    """The LP engine stopped without an optimal basis."""

    def __init__(self, message: str, iterations: int):
        self.iterations = iterations
        super().__init__(f"{message} (after {iterations} iterations)")


class SpaceTooLarge(GenlabError, ValueError):
    pass


class NonpositiveBound(GenlabError, ValueError):
    pass


class EnumerationCapExceeded(GenlabError, ValueError):
    def __init__(self, count: int, cap: int):
        self.count = count
        self.cap = cap
        super().__init__(f"enumeration needs {count} items, cap is {cap}")


class ZeroDistance(GenlabError, ValueError):
    """Distinct hypotheses at distance 0 carry different losses, so K is infinite."""


class NoPath(GenlabError, LookupError):
    pass


class ParseError(GenlabError, ValueError):
    pass
