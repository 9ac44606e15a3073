"""Gaussian statistical models on the (mu, sigma) parameter manifold.

Every micro-variable shares the mean mu and the standard deviation sigma; the
correlation structure decides which pairs carry the off-diagonal rho * sigma**2
entry. Covariance inversion is done in closed form (adjugate over determinant),
the matrices never exceed 3 x 3.
"""
import logging
import math
from dataclasses import dataclass
from typing import NamedTuple, Tuple

import numpy as np
from scipy.special import roots_legendre

from .constants import CorrelationStructure, MacroVariable, MONOVARIATE_STRUCTURES
from .errors import (DegenerateCovarianceError, InadmissibleCorrelationError,
                     PreconditionError)

logger = logging.getLogger(__name__)

_MICRO_DIMENSION = {
    CorrelationStructure.MONO1: 1,
    CorrelationStructure.MONO2: 1,
    CorrelationStructure.MONO3: 1,
    CorrelationStructure.BIVARIATE_STRONG: 2,
    CorrelationStructure.TRIVARIATE_WEAK: 3,
    CorrelationStructure.TRIVARIATE_MILDLY_WEAK: 3,
    CorrelationStructure.TRIVARIATE_STRONG: 3,
}


class OpenInterval(NamedTuple):
    lower: float
    upper: float

    def contains(self, value: float) -> bool:
        return self.lower < value < self.upper

    def is_endpoint(self, value: float) -> bool:
        return value == self.lower or value == self.upper

    def inset(self, margin: float) -> Tuple[float, float]:
        return self.lower + margin, self.upper - margin


def admissible_rho_interval(structure: CorrelationStructure) -> OpenInterval:
    """Open interval of rho on which the correlation template is positive definite.

    Monovariate structures carry no correlation; they get the empty interval (0, 0)
    and ModelSpec pins their rho to 0."""
    if structure in MONOVARIATE_STRUCTURES:
        return OpenInterval(0.0, 0.0)
    if structure in (CorrelationStructure.BIVARIATE_STRONG, CorrelationStructure.TRIVARIATE_WEAK):
        return OpenInterval(-1.0, 1.0)
    if structure is CorrelationStructure.TRIVARIATE_MILDLY_WEAK:
        half_root_two = math.sqrt(2.0) / 2.0
        return OpenInterval(-half_root_two, half_root_two)
    if structure is CorrelationStructure.TRIVARIATE_STRONG:
        return OpenInterval(-0.5, 1.0)
    raise PreconditionError(f"admissible_rho_interval: unknown structure {structure!r}")


def micro_dimension(structure: CorrelationStructure) -> int:
    return _MICRO_DIMENSION[structure]


def macro_variables(structure: CorrelationStructure) -> Tuple[MacroVariable, ...]:
    if structure is CorrelationStructure.MONO1:
        return (MacroVariable.MU,)
    if structure is CorrelationStructure.MONO2:
        return (MacroVariable.SIGMA,)
    return (MacroVariable.MU, MacroVariable.SIGMA)


def correlation_template(structure: CorrelationStructure, rho: float) -> np.ndarray:
    """The covariance divided by sigma**2 (the C1, C2, C3 patterns for n = 3)."""
    n = micro_dimension(structure)
    template = np.eye(n)
    if structure is CorrelationStructure.BIVARIATE_STRONG:
        template[0, 1] = template[1, 0] = rho
    elif structure is CorrelationStructure.TRIVARIATE_WEAK:
        template[0, 1] = template[1, 0] = rho
    elif structure is CorrelationStructure.TRIVARIATE_MILDLY_WEAK:
        template[0, 1] = template[1, 0] = rho
        template[0, 2] = template[2, 0] = rho
    elif structure is CorrelationStructure.TRIVARIATE_STRONG:
        template[np.triu_indices(3, 1)] = rho
        template[np.tril_indices(3, -1)] = rho
    return template


def is_admissible(structure: CorrelationStructure, rho: float) -> bool:
    if structure in MONOVARIATE_STRUCTURES:
        return rho == 0.0
    return admissible_rho_interval(structure).contains(rho)


@dataclass(frozen=True)
class ThetaPoint:
    mu: float
    sigma: float

    def __post_init__(self) -> None:
        if not (self.sigma > 0.0 and math.isfinite(self.sigma)):
            raise PreconditionError(f"ThetaPoint: sigma must be a positive finite number, got {self.sigma}")
        if not math.isfinite(self.mu):
            raise PreconditionError(f"ThetaPoint: mu must be finite, got {self.mu}")


@dataclass(frozen=True)
class ModelSpec:
    structure: CorrelationStructure
    rho: float = 0.0

    def __post_init__(self) -> None:
        if not isinstance(self.structure, CorrelationStructure):
            raise PreconditionError(f"ModelSpec: structure must be a CorrelationStructure, got {self.structure!r}")
        if self.structure in MONOVARIATE_STRUCTURES:
            if self.rho != 0.0:
                raise InadmissibleCorrelationError(
                    f"ModelSpec: {self.structure} has no correlated pairs, rho must be 0 (got {self.rho})")
            return
        interval = admissible_rho_interval(self.structure)
        if interval.is_endpoint(self.rho):
            raise DegenerateCovarianceError(
                f"ModelSpec: rho={self.rho} is an endpoint of {tuple(interval)} for {self.structure}")
        if not interval.contains(self.rho):
            raise InadmissibleCorrelationError(
                f"ModelSpec: rho={self.rho} outside {tuple(interval)} for {self.structure}")

    @property
    def n(self) -> int:
        return micro_dimension(self.structure)

    @property
    def macro_variables(self) -> Tuple[MacroVariable, ...]:
        return macro_variables(self.structure)

    @property
    def m(self) -> int:
        return len(self.macro_variables)


def effective_theta(spec: ModelSpec, theta: ThetaPoint) -> ThetaPoint:
    """Pin the coordinate that is not a macro-variable: sigma = 1 for Mono1, mu = 0 for Mono2."""
    if spec.structure is CorrelationStructure.MONO1:
        return ThetaPoint(theta.mu, 1.0)
    if spec.structure is CorrelationStructure.MONO2:
        return ThetaPoint(0.0, theta.sigma)
    return theta


def mean_vector(spec: ModelSpec, theta: ThetaPoint) -> np.ndarray:
    return np.full(spec.n, effective_theta(spec, theta).mu)


def covariance_matrix(spec: ModelSpec, theta: ThetaPoint) -> np.ndarray:
    sigma = effective_theta(spec, theta).sigma
    return sigma ** 2 * correlation_template(spec.structure, spec.rho)


def inverse_and_determinant(matrix: np.ndarray) -> Tuple[np.ndarray, float]:
    """Closed-form inverse (adjugate / determinant) of a 1x1, 2x2 or 3x3 matrix."""
    a = np.asarray(matrix, dtype=float)
    n = a.shape[0]
    if n == 1:
        det = a[0, 0]
        adjugate = np.ones((1, 1))
    elif n == 2:
        det = a[0, 0] * a[1, 1] - a[0, 1] * a[1, 0]
        adjugate = np.array([[a[1, 1], -a[0, 1]],
                             [-a[1, 0], a[0, 0]]])
    elif n == 3:
        cofactor = np.empty((3, 3))
        for i in range(3):
            for j in range(3):
                rows = [r for r in range(3) if r != i]
                cols = [c for c in range(3) if c != j]
                minor = a[rows[0], cols[0]] * a[rows[1], cols[1]] - a[rows[0], cols[1]] * a[rows[1], cols[0]]
                cofactor[i, j] = (-1) ** (i + j) * minor
        det = float(a[0] @ cofactor[0])
        adjugate = cofactor.T
    else:
        raise PreconditionError(f"inverse_and_determinant: only n <= 3 supported, got {n}")
    if det <= 0.0:
        raise DegenerateCovarianceError(f"inverse_and_determinant: determinant {det} is not positive")
    return adjugate / det, float(det)


def _log_density_rows(spec: ModelSpec, theta: ThetaPoint, points: np.ndarray) -> np.ndarray:
    precision, det = inverse_and_determinant(covariance_matrix(spec, theta))
    centred = points - mean_vector(spec, theta)
    quadratic = np.einsum('...i,ij,...j->...', centred, precision, centred)
    return -0.5 * (spec.n * math.log(2.0 * math.pi) + math.log(det) + quadratic)


def log_density(spec: ModelSpec, theta: ThetaPoint, x) -> float:
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if x.shape != (spec.n,):
        raise PreconditionError(f"log_density: expected a {spec.n}-vector, got shape {x.shape}")
    return float(_log_density_rows(spec, theta, x))


def density_normalisation(spec: ModelSpec, theta: ThetaPoint, half_width: float = 10.0, nodes: int = 96) -> float:
    """Tensor Gauss-Legendre quadrature of the density over the box mu +- half_width * sigma."""
    centre = effective_theta(spec, theta)
    abscissae, weights = roots_legendre(nodes)
    scale = half_width * centre.sigma
    axis = centre.mu + scale * abscissae
    grids = np.meshgrid(*([axis] * spec.n), indexing='ij')
    points = np.stack(grids, axis=-1)
    weight_grid = np.ones([nodes] * spec.n)
    for dim in range(spec.n):
        shape = [1] * spec.n
        shape[dim] = nodes
        weight_grid = weight_grid * (scale * weights).reshape(shape)
    total = float(np.sum(weight_grid * np.exp(_log_density_rows(spec, theta, points))))
    logger.debug(f"density_normalisation: {spec.structure} rho={spec.rho} -> {total!r}")
    return total
