"""Geodesic flow on the Gaussian statistical manifolds.

Closed forms are the half-circle geodesics of the scaled hyperbolic plane,
sigma(tau) = sigma0 sech(a tau) with mu relaxing to 0, plus the straight line
(Mono1) and the exponential (Mono2) of the one-dimensional models. Numerical
solutions use the classical fixed-step fourth order Runge-Kutta scheme.
"""
import logging
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence, Tuple

import numpy as np
from scipy.special import expit

from .constants import DEFAULT_HORIZON, DEFAULT_STEP, RESIDUAL_FD_STEP, SIGMA_FLOOR, CorrelationStructure
from .errors import ManifoldBoundaryError, PreconditionError
from .geometry import christoffel, fisher_closed_form, metric_profile
from .model import ModelSpec, ThetaPoint

logger = logging.getLogger(__name__)

State = Tuple[ThetaPoint, np.ndarray]


@dataclass(frozen=True)
class GeodesicConstants:
    sigma0: float = 1.0
    a1: float = 1.0
    a2: float = 1.0

    def __post_init__(self) -> None:
        if not self.sigma0 > 0.0:
            raise PreconditionError(f"GeodesicConstants: sigma0 must be positive, got {self.sigma0}")
        if not (self.a1 > 0.0 and self.a2 > 0.0):
            raise PreconditionError(f"GeodesicConstants: A1 and A2 must be positive, got {self.a1}, {self.a2}")


@dataclass(frozen=True, eq=False)
class GeodesicTrajectory:
    times: np.ndarray
    points: Tuple[ThetaPoint, ...]
    velocities: np.ndarray

    def __post_init__(self) -> None:
        times = np.array(self.times, dtype=float)
        velocities = np.array(self.velocities, dtype=float)
        times.setflags(write=False)
        velocities.setflags(write=False)
        object.__setattr__(self, 'times', times)
        object.__setattr__(self, 'velocities', velocities)
        object.__setattr__(self, 'points', tuple(self.points))
        if not (len(times) == len(self.points) == len(velocities)):
            raise PreconditionError("GeodesicTrajectory: times, points and velocities differ in length")
        if len(times) and (times[0] != 0.0 or np.any(np.diff(times) <= 0.0)):
            raise PreconditionError("GeodesicTrajectory: times must increase strictly from 0")

    @property
    def mu(self) -> np.ndarray:
        return np.array([point.mu for point in self.points])

    @property
    def sigma(self) -> np.ndarray:
        return np.array([point.sigma for point in self.points])


@dataclass(frozen=True)
class RateFunction:
    structure: CorrelationStructure
    value: float

    def __post_init__(self) -> None:
        if not self.value > 0.0:
            raise PreconditionError(f"RateFunction: decay rate must be positive, got {self.value}")


def _require_two_macro_variables(spec: ModelSpec, operation: str) -> None:
    if spec.m != 2:
        raise PreconditionError(f"{operation}: {spec.structure} has a single macro-variable")


def squared_rate_constant(spec: ModelSpec, constants: GeodesicConstants) -> float:
    """The case expression A(rho) = A1**2 * alpha / beta (e.g. A1**2 (3+rho) / (6 (1+rho)) for C1)."""
    alpha, beta = metric_profile(spec)
    return constants.a1 ** 2 * alpha / beta


def rate_function(spec: ModelSpec, constants: GeodesicConstants) -> RateFunction:
    _require_two_macro_variables(spec, 'rate_function')
    return RateFunction(spec.structure, constants.sigma0 * math.sqrt(squared_rate_constant(spec, constants)))


def mu_scale(spec: ModelSpec, constants: GeodesicConstants) -> float:
    """2 sigma0 A1 / sqrt(A(rho)); 2 sqrt(2) sigma0 for Mono3, 2 sigma0 sqrt(2 (1+rho)) bivariate."""
    return 2.0 * constants.sigma0 * constants.a1 / math.sqrt(squared_rate_constant(spec, constants))


def closed_form_arrays(spec: ModelSpec, constants: GeodesicConstants, taus) -> Tuple[np.ndarray, ...]:
    """(mu, sigma, mu_dot, sigma_dot) of the closed-form geodesic, vectorised over tau."""
    taus = np.asarray(taus, dtype=float)
    if spec.structure is CorrelationStructure.MONO1:
        mu = constants.a1 * taus + constants.a2
        return mu, np.ones_like(taus), np.full_like(taus, constants.a1), np.zeros_like(taus)
    if spec.structure is CorrelationStructure.MONO2:
        sigma = constants.a1 * np.exp(constants.a2 * taus)
        return np.zeros_like(taus), sigma, np.zeros_like(taus), constants.a2 * sigma
    rate = rate_function(spec, constants).value
    scale = mu_scale(spec, constants)
    x = rate * taus
    decay = np.exp(-np.abs(x))
    sech = 2.0 * decay / (1.0 + decay ** 2)
    logistic = expit(-2.0 * x)    # 1 / (1 + exp(2 a tau))
    sigma = constants.sigma0 * sech
    mu = -scale * logistic
    sigma_dot = -rate * sigma * np.tanh(x)
    mu_dot = 2.0 * rate * scale * logistic * (1.0 - logistic)
    return mu, sigma, mu_dot, sigma_dot


def closed_form_geodesic(spec: ModelSpec, constants: GeodesicConstants, tau: float) -> ThetaPoint:
    mu, sigma, _, _ = closed_form_arrays(spec, constants, tau)
    return ThetaPoint(float(mu), float(sigma))


def _coordinates(spec: ModelSpec, mu, sigma, mu_dot, sigma_dot) -> Tuple[np.ndarray, np.ndarray]:
    if spec.structure is CorrelationStructure.MONO1:
        return np.array([mu]), np.array([mu_dot])
    if spec.structure is CorrelationStructure.MONO2:
        return np.array([sigma]), np.array([sigma_dot])
    return np.array([mu, sigma]), np.array([mu_dot, sigma_dot])


def closed_form_velocity(spec: ModelSpec, constants: GeodesicConstants, tau: float) -> np.ndarray:
    mu, sigma, mu_dot, sigma_dot = (float(v) for v in closed_form_arrays(spec, constants, tau))
    return _coordinates(spec, mu, sigma, mu_dot, sigma_dot)[1]


def initial_state(spec: ModelSpec, constants: GeodesicConstants) -> State:
    """Point and analytic velocity of the closed form at tau = 0."""
    return closed_form_geodesic(spec, constants, 0.0), closed_form_velocity(spec, constants, 0.0)


def _point(spec: ModelSpec, coordinates: np.ndarray) -> ThetaPoint:
    if spec.structure is CorrelationStructure.MONO1:
        return ThetaPoint(float(coordinates[0]), 1.0)
    if spec.structure is CorrelationStructure.MONO2:
        sigma = float(coordinates[0])
        mu = 0.0
    else:
        mu, sigma = float(coordinates[0]), float(coordinates[1])
    if not sigma > SIGMA_FLOOR:
        raise ManifoldBoundaryError(f"geodesic reached sigma={sigma!r} below the floor {SIGMA_FLOOR}")
    return ThetaPoint(mu, sigma)


@lru_cache(maxsize=None)
def _unit_connection(spec: ModelSpec) -> np.ndarray:
    """Christoffel symbols at sigma = 1; the metric is homogeneous of degree -2 in sigma,
    so Gamma(sigma) = Gamma(1) / sigma for every implemented model."""
    return christoffel(spec, ThetaPoint(0.0, 1.0)).gamma


def geodesic_rhs(spec: ModelSpec, state: State) -> np.ndarray:
    """Acceleration -Gamma^k_ij v^i v^j at the given point and velocity."""
    point, velocity = state
    if not point.sigma > SIGMA_FLOOR:
        raise ManifoldBoundaryError(f"geodesic_rhs: sigma={point.sigma!r} below the floor {SIGMA_FLOOR}")
    velocity = np.asarray(velocity, dtype=float).reshape(spec.m)
    return -np.einsum('kij,i,j->k', _unit_connection(spec), velocity, velocity) / point.sigma


def integrate_geodesic(spec: ModelSpec, initial: State, t_end: float = DEFAULT_HORIZON,
                       step: float = DEFAULT_STEP) -> GeodesicTrajectory:
    if not (step > 0.0 and t_end > 0.0):
        raise PreconditionError(f"integrate_geodesic: step and t_end must be positive, got {step}, {t_end}")
    point, velocity = initial
    velocity = np.asarray(velocity, dtype=float).reshape(spec.m)
    coordinates, _ = _coordinates(spec, point.mu, point.sigma, 0.0, 0.0)
    m = spec.m

    def rhs(y: np.ndarray) -> np.ndarray:
        return np.concatenate((y[m:], geodesic_rhs(spec, (_point(spec, y[:m]), y[m:]))))

    n_steps = max(1, int(math.ceil(t_end / step - 1e-9)))
    h = t_end / n_steps
    times = np.linspace(0.0, t_end, n_steps + 1)
    y = np.concatenate((coordinates, velocity))
    states = np.empty((n_steps + 1, 2 * m))
    states[0] = y
    logger.debug(f"integrate_geodesic: {spec.structure} rho={spec.rho} steps={n_steps} h={h!r}")
    for i in range(n_steps):
        k1 = rhs(y)
        k2 = rhs(y + 0.5 * h * k1)
        k3 = rhs(y + 0.5 * h * k2)
        k4 = rhs(y + h * k3)
        y = y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        states[i + 1] = y
    points = [_point(spec, row[:m]) for row in states]
    return GeodesicTrajectory(times, points, states[:, m:])


def speed(spec: ModelSpec, point: ThetaPoint, velocity: Sequence[float]) -> float:
    """g_ij v^i v^j."""
    velocity = np.asarray(velocity, dtype=float)
    return float(velocity @ fisher_closed_form(spec, point).components @ velocity)


def conserved_momentum(spec: ModelSpec, point: ThetaPoint, velocity: Sequence[float]) -> float:
    """g_11 * mu_dot; mu never enters the metric, so this is a constant of the motion."""
    if spec.structure is CorrelationStructure.MONO2:
        raise PreconditionError("conserved_momentum: mu is not a coordinate of mono2")
    return float(fisher_closed_form(spec, point).components[0, 0] * np.asarray(velocity, dtype=float)[0])


def max_relative_drift(values: Sequence[float]) -> float:
    values = np.asarray(values, dtype=float)
    return float(np.max(np.abs(values - values[0])) / abs(values[0]))


def speed_series(spec: ModelSpec, trajectory: GeodesicTrajectory) -> np.ndarray:
    return np.array([speed(spec, p, v) for p, v in zip(trajectory.points, trajectory.velocities)])


def momentum_series(spec: ModelSpec, trajectory: GeodesicTrajectory) -> np.ndarray:
    return np.array([conserved_momentum(spec, p, v) for p, v in zip(trajectory.points, trajectory.velocities)])


def max_deviation(spec: ModelSpec, constants: GeodesicConstants, trajectory: GeodesicTrajectory) -> float:
    mu, sigma, _, _ = closed_form_arrays(spec, constants, trajectory.times)
    return float(max(np.max(np.abs(trajectory.mu - mu)), np.max(np.abs(trajectory.sigma - sigma))))


def geodesic_residual(spec: ModelSpec, constants: GeodesicConstants, tau_grid: Sequence[float]) -> float:
    """Max norm of d2theta/dtau2 + Gamma theta_dot theta_dot along the closed form (central differences)."""
    h = RESIDUAL_FD_STEP
    worst = 0.0
    for tau in tau_grid:
        samples = [closed_form_arrays(spec, constants, tau + s * h) for s in (-1.0, 0.0, 1.0)]
        coords = [_coordinates(spec, float(mu), float(sigma), 0.0, 0.0)[0] for mu, sigma, _, _ in samples]
        velocity = (coords[2] - coords[0]) / (2.0 * h)
        acceleration = (coords[2] - 2.0 * coords[1] + coords[0]) / h ** 2
        point = _point(spec, coords[1])
        gamma = christoffel(spec, point).gamma
        residual = acceleration + np.einsum('kij,i,j->k', gamma, velocity, velocity)
        worst = max(worst, float(np.max(np.abs(residual))))
    logger.debug(f"geodesic_residual: {spec.structure} rho={spec.rho} -> {worst!r}")
    return worst
