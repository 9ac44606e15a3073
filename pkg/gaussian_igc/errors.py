class IGCError(Exception):
    # basic toolkit exception
    code = 1
    description = "information geometric complexity toolkit error"
class ConfigError(IGCError):
    # bad run configuration, abort before computing anything
    code = 2
    description = "invalid configuration"
class InadmissibleCorrelationError(ConfigError):
    # rho outside the open interval on which the covariance template is positive definite
    code = 2
    description = "correlation coefficient outside the admissible interval"
class DegenerateCovarianceError(InadmissibleCorrelationError):
    # rho on an endpoint of the interval, or a singular covariance
    code = 2
    description = "degenerate covariance"
class PreconditionError(IGCError, ValueError):
    # an operation was called outside its domain
    code = 2
    description = "operation precondition violated"
class SingularMetricError(PreconditionError):
    code = 2
    description = "metric tensor is not invertible"
class DegenerateBasisError(PreconditionError):
    code = 2
    description = "tangent basis spans no 2-plane"
class ManifoldBoundaryError(IGCError):
    # sigma reached the floor while integrating the geodesic equations
    code = 3
    description = "geodesic left the parameter manifold"
class ConvergenceError(IGCError):
    # igc(tau) * tau failed the plateau test in the tail window
    code = 4
    description = "asymptotic coefficient did not converge"

    def __init__(self, message: str, spread: float = None) -> None:
        super().__init__(message)
        self.spread = spread
