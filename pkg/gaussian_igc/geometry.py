"""Fisher-Rao metric, Levi-Civita connection and sectional curvature on (mu, sigma).

Every implemented metric is diagonal, independent of mu and of the form
diag(alpha, beta) / sigma**2, so the manifolds are scaled hyperbolic planes.
Index convention for arrays: gamma[k, i, j] is Gamma^k_ij, riemann[i, j, k, l] is
R_ijkl = g_lh R^h_ijk.
"""
import logging
import math
from dataclasses import dataclass
from typing import NamedTuple, Optional, Sequence, Tuple

import numpy as np

from .constants import (CHRISTOFFEL_FD_SCALE, CURVATURE_SIGMAS, CURVATURE_SPREAD_TOLERANCE, METRIC_FD_SCALE,
                        ChristoffelMethod, CorrelationStructure, MacroVariable)
from .errors import DegenerateBasisError, PreconditionError, SingularMetricError
from .model import ModelSpec, ThetaPoint, covariance_matrix, effective_theta, mean_vector
from .moments import gaussian_expectation, score_polynomial
from .reports import Discrepancy

logger = logging.getLogger(__name__)


def _frozen(array) -> np.ndarray:
    array = np.array(array, dtype=float)
    array.setflags(write=False)
    return array


@dataclass(frozen=True, eq=False)
class MetricTensor:
    components: np.ndarray

    def __post_init__(self) -> None:
        object.__setattr__(self, 'components', _frozen(self.components))
        if not np.allclose(self.components, self.components.T, rtol=1e-12, atol=0.0):
            raise PreconditionError("MetricTensor: components are not symmetric")

    @property
    def dim(self) -> int:
        return self.components.shape[0]

    def inverse(self) -> np.ndarray:
        det = float(np.linalg.det(self.components))
        if not det > 0.0:
            raise SingularMetricError(f"MetricTensor: determinant {det} is not positive")
        return np.linalg.inv(self.components)


@dataclass(frozen=True, eq=False)
class ChristoffelSymbols:
    gamma: np.ndarray

    def __post_init__(self) -> None:
        object.__setattr__(self, 'gamma', _frozen(self.gamma))

    def symmetry_residual(self) -> float:
        return float(np.max(np.abs(self.gamma - np.transpose(self.gamma, (0, 2, 1))), initial=0.0))


@dataclass(frozen=True, eq=False)
class CurvatureReport:
    riemann: np.ndarray
    sectional: float
    flat: bool = False

    def __post_init__(self) -> None:
        object.__setattr__(self, 'riemann', _frozen(self.riemann))

    def antisymmetry_residuals(self) -> Tuple[float, float]:
        """Relative residuals of R_ijkl = -R_jikl and R_ijkl = -R_ijlk."""
        scale = float(np.max(np.abs(self.riemann), initial=0.0))
        if scale == 0.0:
            return 0.0, 0.0
        first = np.max(np.abs(self.riemann + np.transpose(self.riemann, (1, 0, 2, 3))))
        last = np.max(np.abs(self.riemann + np.transpose(self.riemann, (0, 1, 3, 2))))
        return float(first / scale), float(last / scale)


class CurvatureConstancy(NamedTuple):
    first: float
    second: float
    difference: float


def metric_profile(spec: ModelSpec) -> Tuple[float, float]:
    """(alpha, beta) with g = diag(alpha, beta) / sigma**2 for the two-macro-variable models."""
    rho = spec.rho
    structure = spec.structure
    if structure is CorrelationStructure.MONO3:
        return 1.0, 2.0
    if structure is CorrelationStructure.BIVARIATE_STRONG:
        return 2.0 / (1.0 + rho), 4.0
    if structure is CorrelationStructure.TRIVARIATE_WEAK:
        return (3.0 + rho) / (1.0 + rho), 6.0
    if structure is CorrelationStructure.TRIVARIATE_MILDLY_WEAK:
        return (3.0 - 4.0 * rho) / (1.0 - 2.0 * rho ** 2), 6.0
    if structure is CorrelationStructure.TRIVARIATE_STRONG:
        return 3.0 / (1.0 + 2.0 * rho), 6.0
    raise PreconditionError(f"metric_profile: {structure} has a single macro-variable")


def fisher_closed_form(spec: ModelSpec, theta: ThetaPoint) -> MetricTensor:
    sigma = effective_theta(spec, theta).sigma
    if spec.structure is CorrelationStructure.MONO1:
        return MetricTensor([[1.0]])
    if spec.structure is CorrelationStructure.MONO2:
        return MetricTensor([[2.0 / sigma ** 2]])
    alpha, beta = metric_profile(spec)
    return MetricTensor(np.diag([alpha, beta]) / sigma ** 2)


def fisher_numeric(spec: ModelSpec, theta: ThetaPoint) -> MetricTensor:
    """g_ij = E[score_i * score_j], each expectation through the moment operator."""
    mean = mean_vector(spec, theta)
    covariance = covariance_matrix(spec, theta)
    scores = [score_polynomial(spec, theta, i) for i in range(spec.m)]
    components = np.empty((spec.m, spec.m))
    for i in range(spec.m):
        for j in range(i, spec.m):
            components[i, j] = components[j, i] = gaussian_expectation(scores[i] * scores[j], mean, covariance)
    return MetricTensor(components)


def metric_derivative(spec: ModelSpec, theta: ThetaPoint) -> np.ndarray:
    """dg[l, i, j] = d g_ij / d theta^l from the closed form (nothing depends on mu)."""
    metric = fisher_closed_form(spec, theta).components
    sigma = effective_theta(spec, theta).sigma
    derivative = np.zeros((spec.m,) * 3)
    for l, variable in enumerate(spec.macro_variables):
        if variable is MacroVariable.SIGMA:
            derivative[l] = -2.0 * metric / sigma
    return derivative


def shifted(spec: ModelSpec, theta: ThetaPoint, variable: MacroVariable, delta: float) -> ThetaPoint:
    if variable is MacroVariable.MU:
        return ThetaPoint(theta.mu + delta, theta.sigma)
    return ThetaPoint(theta.mu, theta.sigma + delta)


def metric_derivative_fd(spec: ModelSpec, theta: ThetaPoint) -> np.ndarray:
    """Central differences of the closed-form metric."""
    step = METRIC_FD_SCALE * max(theta.sigma, 1.0)
    derivative = np.zeros((spec.m,) * 3)
    for l, variable in enumerate(spec.macro_variables):
        forward = fisher_closed_form(spec, shifted(spec, theta, variable, step)).components
        backward = fisher_closed_form(spec, shifted(spec, theta, variable, -step)).components
        derivative[l] = (forward - backward) / (2.0 * step)
    return derivative


def _christoffel_from_derivative(metric: MetricTensor, derivative: np.ndarray) -> np.ndarray:
    inverse = metric.inverse()
    # d_i g_lj + d_j g_il - d_l g_ij, laid out as [l, i, j]
    combined = np.einsum('ilj->lij', derivative) + np.einsum('jil->lij', derivative) - derivative
    return 0.5 * np.einsum('kl,lij->kij', inverse, combined)


def christoffel(spec: ModelSpec, theta: ThetaPoint,
                method: ChristoffelMethod = ChristoffelMethod.ANALYTIC) -> ChristoffelSymbols:
    metric = fisher_closed_form(spec, theta)
    if method is ChristoffelMethod.FINITE_DIFFERENCE:
        return ChristoffelSymbols(_christoffel_from_derivative(metric, metric_derivative_fd(spec, theta)))
    g = metric.components
    if np.any(np.diag(g) <= 0.0):
        raise SingularMetricError(f"christoffel: metric {g.tolist()} is not invertible")
    derivative = metric_derivative(spec, theta)
    gamma = np.zeros((spec.m,) * 3)
    if spec.m == 1:
        gamma[0, 0, 0] = derivative[0, 0, 0] / (2.0 * g[0, 0])
        return ChristoffelSymbols(gamma)
    d_sigma = derivative[1]
    gamma[0, 0, 1] = gamma[0, 1, 0] = d_sigma[0, 0] / (2.0 * g[0, 0])
    gamma[1, 0, 0] = -d_sigma[0, 0] / (2.0 * g[1, 1])
    gamma[1, 1, 1] = d_sigma[1, 1] / (2.0 * g[1, 1])
    return ChristoffelSymbols(gamma)


def _christoffel_derivative(spec: ModelSpec, theta: ThetaPoint) -> np.ndarray:
    """d_gamma[l, k, i, j] = d Gamma^k_ij / d theta^l by a five point stencil."""
    step = CHRISTOFFEL_FD_SCALE * theta.sigma
    derivative = np.zeros((spec.m,) * 4)
    for l, variable in enumerate(spec.macro_variables):
        values = [christoffel(spec, shifted(spec, theta, variable, s * step)).gamma for s in (-2, -1, 1, 2)]
        derivative[l] = (values[0] - 8.0 * values[1] + 8.0 * values[2] - values[3]) / (12.0 * step)
    return derivative


def inner_product(metric: MetricTensor, u: Sequence[float], v: Sequence[float]) -> float:
    return float(np.asarray(u, dtype=float) @ metric.components @ np.asarray(v, dtype=float))


def volume_element(metric: MetricTensor) -> float:
    return math.sqrt(float(np.linalg.det(metric.components)))


def flat_report(spec: ModelSpec) -> CurvatureReport:
    return CurvatureReport(np.zeros((spec.m,) * 4), 0.0, flat=True)


def sectional_curvature(spec: ModelSpec, theta: ThetaPoint,
                        xi: Optional[Sequence[float]] = None,
                        eta: Optional[Sequence[float]] = None) -> CurvatureReport:
    if spec.m == 1:
        return flat_report(spec)
    xi = np.array([1.0, 0.0]) if xi is None else np.asarray(xi, dtype=float)
    eta = np.array([0.0, 1.0]) if eta is None else np.asarray(eta, dtype=float)
    metric = fisher_closed_form(spec, theta)
    gram = inner_product(metric, xi, xi) * inner_product(metric, eta, eta) - inner_product(metric, xi, eta) ** 2
    if not gram > 0.0:
        raise DegenerateBasisError(f"sectional_curvature: Gram determinant {gram} for xi={xi}, eta={eta}")

    gamma = christoffel(spec, theta).gamma
    d_gamma = _christoffel_derivative(spec, theta)
    # R^h_ijk = d_i G^h_jk - d_j G^h_ik + G^l_jk G^h_il - G^l_ik G^h_jl
    derivative_part = np.einsum('ihjk->hijk', d_gamma) - np.einsum('jhik->hijk', d_gamma)
    product_part = np.einsum('ljk,hil->hijk', gamma, gamma) - np.einsum('lik,hjl->hijk', gamma, gamma)
    riemann_up = derivative_part + product_part
    riemann = np.einsum('lh,hijk->ijkl', metric.components, riemann_up)
    sectional = float(np.einsum('ijkl,i,j,k,l->', riemann, xi, eta, eta, xi)) / gram
    logger.debug(f"sectional_curvature: {spec.structure} rho={spec.rho} sigma={theta.sigma} K={sectional!r}")
    return CurvatureReport(riemann, sectional)


def curvature_constancy(spec: ModelSpec, first: ThetaPoint, second: ThetaPoint) -> CurvatureConstancy:
    k_first = sectional_curvature(spec, first).sectional
    k_second = sectional_curvature(spec, second).sectional
    return CurvatureConstancy(k_first, k_second, k_second - k_first)


def curvature_discrepancies(spec: ModelSpec,
                            sigmas: Sequence[float] = CURVATURE_SIGMAS) -> Tuple[Discrepancy, ...]:
    """The measured K against what is published about it: a negative function that is not
    constant, with the unsquared |xi|^2 |eta|^2 - <xi, eta> as denominator."""
    if spec.m == 1:
        return ()
    label = f"{spec.structure} rho={spec.rho!r}"
    values = np.array([sectional_curvature(spec, ThetaPoint(0.0, sigma)).sectional for sigma in sigmas])
    mean = float(np.mean(values))
    spread = float((np.max(values) - np.min(values)) / abs(mean))
    found = [
        Discrepancy('sectional_curvature', None, mean, bool(np.all(values < 0.0)),
                    f"{label}: published as a negative function"),
        Discrepancy('curvature_spread', None, spread, spread > CURVATURE_SPREAD_TOLERANCE,
                    f"{label}: published as not constant; K at sigma in {tuple(sigmas)} is {values.tolist()}"),
    ]
    # a non-orthogonal basis, where the two denominators differ
    theta = ThetaPoint(0.0, 2.0)
    xi, eta = np.array([1.0, 0.0]), np.array([1.0, 1.0])
    metric = fisher_closed_form(spec, theta)
    gram = inner_product(metric, xi, xi) * inner_product(metric, eta, eta) - inner_product(metric, xi, eta) ** 2
    unsquared = inner_product(metric, xi, xi) * inner_product(metric, eta, eta) - inner_product(metric, xi, eta)
    derived = sectional_curvature(spec, theta, xi, eta).sectional
    printed = derived * gram / unsquared
    found.append(Discrepancy('curvature_denominator', printed, derived,
                             math.isclose(printed, derived, rel_tol=1e-9),
                             f"{label}: K on xi={xi.tolist()}, eta={eta.tolist()} at sigma={theta.sigma}"))
    for item in found:
        if not item.agrees:
            logger.warning(f"curvature_discrepancies: {item.quantity} printed {item.printed!r}, "
                           f"derived {item.derived!r} ({item.note})")
    return tuple(found)
