from enum import Enum, IntEnum


### STATISTICAL MODELS ###
class CorrelationStructure(Enum):
    def __str__(self):
        return str(self.value)
    @classmethod
    def has_key(cls, name):
        return name in cls.__members__
    @classmethod
    def has_value(cls, value):
        return any(member.value == value for member in cls)
    MONO1 = 'mono1'    # n=1, only mu is a macro-variable (sigma pinned to 1)
    MONO2 = 'mono2'    # n=1, only sigma is a macro-variable (mu pinned to 0)
    MONO3 = 'mono3'    # n=1, both mu and sigma
    BIVARIATE_STRONG = 'bivariate-strong'
    TRIVARIATE_WEAK = 'trivariate-weak'                  # C1: one correlated pair
    TRIVARIATE_MILDLY_WEAK = 'trivariate-mildly-weak'    # C2: two correlated pairs
    TRIVARIATE_STRONG = 'trivariate-strong'              # C3: fully connected

# the structures in which rho is a free correlation coefficient, in figure1 column order
CORRELATED_STRUCTURES = (
    CorrelationStructure.BIVARIATE_STRONG,
    CorrelationStructure.TRIVARIATE_WEAK,
    CorrelationStructure.TRIVARIATE_MILDLY_WEAK,
    CorrelationStructure.TRIVARIATE_STRONG,
)

MONOVARIATE_STRUCTURES = (
    CorrelationStructure.MONO1,
    CorrelationStructure.MONO2,
    CorrelationStructure.MONO3,
)


class MacroVariable(Enum):
    def __str__(self):
        return str(self.value)
    MU = 'mu'
    SIGMA = 'sigma'


### GEOMETRY ###
class ChristoffelMethod(Enum):
    def __str__(self):
        return str(self.value)
    ANALYTIC = 'analytic'
    FINITE_DIFFERENCE = 'finite_difference'

# central stencil step for metric derivatives is this times max(sigma, 1)
METRIC_FD_SCALE = 1e-5
# five point stencil step for Christoffel derivatives (curvature tensor)
CHRISTOFFEL_FD_SCALE = 1e-3
CURVATURE_SIGMAS = (0.5, 1.0, 2.0, 5.0)
# relative spread of K over CURVATURE_SIGMAS below which the curvature counts as constant
CURVATURE_SPREAD_TOLERANCE = 1e-5


### GEODESIC FLOW ###
SIGMA_FLOOR = 1e-12
DEFAULT_STEP = 1e-3
DEFAULT_HORIZON = 10.0
RESIDUAL_FD_STEP = 1e-4


### COMPLEXITY ###
class VolumeMode(Enum):
    def __str__(self):
        return str(self.value)
    @classmethod
    def has_value(cls, value):
        return any(member.value == value for member in cls)
    PAPER_SEPARABLE = 'paper-separable'              # endpoint value of the separable antiderivative
    RECTANGLE_QUADRATURE = 'rectangle-quadrature'    # literal box integral over the swept coordinates


class Growth(Enum):
    def __str__(self):
        return str(self.value)
    BOUNDED = 'bounded'
    LINEAR = 'linear'
    EXPONENTIAL = 'exponential'
    DECAYING = 'decaying'    # IGC ~ c / tau


SIMPSON_PANELS = 4096
TAIL_START = 20.0        # tail window for c in IGC ~ c/tau is [TAIL_START/a, TAIL_END/a]
TAIL_END = 40.0
TAIL_POINTS = 11
PLATEAU_TOLERANCE = 1e-3
LINEAR_TAIL = (1e3, 2e3)
PEAK_MIN_SAMPLES = 400
PEAK_XTOL = 1e-8


### COMMAND LINE ###
class OutputFormat(Enum):
    def __str__(self):
        return str(self.value)
    @classmethod
    def has_value(cls, value):
        return any(member.value == value for member in cls)
    CSV = 'csv'
    JSON = 'json'


class ExitCode(IntEnum):
    SUCCESS = 0
    CONFIG = 2
    INTEGRATION = 3
    CONVERGENCE = 4


RHO_INSET = 1e-3
DEFAULT_RHO_COUNT = 401
