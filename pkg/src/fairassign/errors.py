"""Exception hierarchy shared across the package."""


class FairAssignError(Exception):
    """Base class for all package errors."""


class GraphError(FairAssignError, ValueError):
    """Malformed attributed graph (dangling endpoints, self-loops, bad classes)."""


class EmptyMixingScope(FairAssignError, ValueError):
    def __init__(self, message="empty mixing scope"):
        super().__init__(message)


class DegenerateMixing(FairAssignError, ValueError):
    def __init__(self, message="degenerate mixing"):
        super().__init__(message)


class InstanceError(FairAssignError, ValueError):
    """Invalid assignment instance or matching."""


class IncompleteMatching(InstanceError):
    def __init__(self, missing=()):
        self.missing = tuple(missing)
        super().__init__(f"incomplete matching ({len(self.missing)} open positions unassigned)")


class Infeasible(FairAssignError):
    """No complete matching exists; ``blocking`` names a Hall-violating position set."""

    def __init__(self, message, blocking=()):
        self.blocking = tuple(blocking)
        if self.blocking:
            message = f"{message}: blocking positions {', '.join(self.blocking)}"
        super().__init__(message)


class NoCompleteMatching(Infeasible):
    def __init__(self, blocking=()):
        super().__init__("no complete matching", blocking)


class Stuck(Infeasible):
    def __init__(self, blocking=()):
        super().__init__("stuck: infeasible under qualification", blocking)


class ScaleExceeded(FairAssignError):
    def __init__(self, estimate, limit):
        self.estimate = estimate
        self.limit = limit
        super().__init__(f"oracle scale exceeded (estimate {estimate:.3g} > {limit:.3g})")


class MetricError(FairAssignError, ValueError):
    """Metric undefined or inconsistent for its inputs."""


class TargetUnreachable(FairAssignError):
    def __init__(self, target, best, graph=None):
        self.target = target
        self.best = best
        self.graph = graph
        super().__init__(f"target assortativity {target:+.4f} unreachable; best achieved {best:+.4f}")


class ExperimentError(FairAssignError):
    pass


class IngestError(FairAssignError, ValueError):
    """Parse or validation failure; ``problems`` lists every diagnostic found."""

    def __init__(self, problems):
        self.problems = list(problems)
        super().__init__("\n".join(self.problems))
