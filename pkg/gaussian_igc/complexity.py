"""Statistical volumes, information geometric complexity and the complexity ratios.

The volume of an m=2 model is computed two ways. PAPER_SEPARABLE evaluates the
separable antiderivative F(sigma) * mu at the endpoint of the geodesic, which is
what produces the exponentially decaying volumes; RECTANGLE_QUADRATURE integrates
sqrt(det g) over the (mu, sigma) box swept by the geodesic, which grows instead.
"""
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np
from scipy.integrate import dblquad, simpson
from scipy.interpolate import CubicSpline
from scipy.optimize import minimize_scalar

from .constants import (LINEAR_TAIL, PEAK_MIN_SAMPLES, PEAK_XTOL, PLATEAU_TOLERANCE, SIMPSON_PANELS,
                        TAIL_END, TAIL_POINTS, TAIL_START, CorrelationStructure, Growth, VolumeMode)
from .errors import ConvergenceError, ManifoldBoundaryError, PreconditionError
from .geodesics import GeodesicConstants, closed_form_arrays, mu_scale, rate_function
from .geometry import metric_profile
from .model import ModelSpec
from .reports import ComplexityReport, Discrepancy, JacobiSolution, RatioCurve

logger = logging.getLogger(__name__)

# box integrals are expensive, the igc of the literal box uses a coarser grid
RECTANGLE_PANELS = 64
BOX_SAMPLES = 257
JACOBI_SAMPLES = 201
REPORT_SAMPLES = 101


def _require_two_macro_variables(spec: ModelSpec, operation: str) -> None:
    if spec.m != 2:
        raise PreconditionError(f"{operation}: {spec.structure} has a single macro-variable")


def _require_monovariate_case(spec: ModelSpec, operation: str) -> None:
    if spec.structure not in (CorrelationStructure.MONO1, CorrelationStructure.MONO2):
        raise PreconditionError(f"{operation}: expected mono1 or mono2, got {spec.structure}")


def volume_density(spec: ModelSpec) -> float:
    """The constant sqrt(alpha * beta) in sqrt(det g) = sqrt(alpha * beta) / sigma**2."""
    alpha, beta = metric_profile(spec)
    return math.sqrt(alpha * beta)


def separable_volumes(spec: ModelSpec, constants: GeodesicConstants, taus) -> np.ndarray:
    """|F(sigma(tau)) * mu(tau)| with F(sigma) = -sqrt(alpha beta) / sigma, vectorised over tau.

    Both factors vanish exponentially, so the product is formed in log space."""
    _require_two_macro_variables(spec, 'separable_volumes')
    x = rate_function(spec, constants).value * np.asarray(taus, dtype=float)
    log_sigma = math.log(constants.sigma0) + math.log(2.0) - np.abs(x) - np.log1p(np.exp(-2.0 * np.abs(x)))
    log_mu = math.log(mu_scale(spec, constants)) - np.logaddexp(0.0, 2.0 * x)
    return volume_density(spec) * np.exp(log_mu - log_sigma)


def rectangle_volume(spec: ModelSpec, constants: GeodesicConstants, tau: float) -> float:
    if tau == 0.0:
        return 0.0
    mu, sigma, _, _ = closed_form_arrays(spec, constants, np.linspace(0.0, tau, BOX_SAMPLES))
    mu_low, mu_high = float(np.min(mu)), float(np.max(mu))
    sigma_low, sigma_high = float(np.min(sigma)), float(np.max(sigma))
    if not sigma_low > 0.0:
        raise ManifoldBoundaryError(f"rectangle_volume: sigma({tau!r}) = {sigma_low!r} underflowed")
    if mu_high == mu_low or sigma_high == sigma_low:
        return 0.0
    density = volume_density(spec)
    value, error = dblquad(lambda s, m: density / s ** 2, mu_low, mu_high, sigma_low, sigma_high)
    logger.debug(f"rectangle_volume: {spec.structure} tau={tau!r} -> {value!r} (+- {error!r})")
    return float(value)


def volume(spec: ModelSpec, constants: GeodesicConstants, tau: float,
           mode: VolumeMode = VolumeMode.PAPER_SEPARABLE) -> float:
    _require_two_macro_variables(spec, 'volume')
    if not tau >= 0.0:
        raise PreconditionError(f"volume: tau must be non-negative, got {tau}")
    if mode is VolumeMode.RECTANGLE_QUADRATURE:
        return rectangle_volume(spec, constants, tau)
    return float(separable_volumes(spec, constants, tau))


def monovariate_volumes(spec: ModelSpec, constants: GeodesicConstants, taus) -> np.ndarray:
    """Mono1: A1 tau + A2 (flat line element). Mono2: sqrt(2) log(A1 exp(A2 tau))."""
    _require_monovariate_case(spec, 'monovariate_volumes')
    taus = np.asarray(taus, dtype=float)
    if spec.structure is CorrelationStructure.MONO1:
        return constants.a1 * taus + constants.a2
    return math.sqrt(2.0) * (math.log(constants.a1) + constants.a2 * taus)


def volume_series(spec: ModelSpec, constants: GeodesicConstants, taus,
                  mode: VolumeMode = VolumeMode.PAPER_SEPARABLE) -> np.ndarray:
    taus = np.asarray(taus, dtype=float)
    if spec.m == 1:
        return monovariate_volumes(spec, constants, taus)
    if mode is VolumeMode.RECTANGLE_QUADRATURE:
        return np.array([rectangle_volume(spec, constants, float(t)) for t in taus])
    return separable_volumes(spec, constants, taus)


def _time_average(values: np.ndarray, taus: np.ndarray) -> float:
    return float(simpson(values, x=taus) / taus[-1])


def monovariate_igc(spec: ModelSpec, constants: GeodesicConstants, tau: float) -> float:
    _require_monovariate_case(spec, 'monovariate_igc')
    if not tau > 0.0:
        raise PreconditionError(f"monovariate_igc: tau must be positive, got {tau}")
    taus = np.linspace(0.0, tau, SIMPSON_PANELS + 1)
    return _time_average(monovariate_volumes(spec, constants, taus), taus)


def igc(spec: ModelSpec, constants: GeodesicConstants, tau: float,
        mode: VolumeMode = VolumeMode.PAPER_SEPARABLE) -> float:
    """(1/tau) * integral of the volume over [0, tau], composite Simpson on a uniform grid."""
    if not tau > 0.0:
        raise PreconditionError(f"igc: tau must be positive, got {tau}")
    if spec.m == 1:
        return monovariate_igc(spec, constants, tau)
    panels = RECTANGLE_PANELS if mode is VolumeMode.RECTANGLE_QUADRATURE else SIMPSON_PANELS
    taus = np.linspace(0.0, tau, panels + 1)
    return _time_average(volume_series(spec, constants, taus, mode), taus)


def tail_grid(spec: ModelSpec, constants: GeodesicConstants) -> np.ndarray:
    """[20/a, 40/a] for m=2; for mono1/mono2 a window far enough out that the offset is negligible."""
    if spec.m == 2:
        rate = rate_function(spec, constants).value
        return np.linspace(TAIL_START / rate, TAIL_END / rate, TAIL_POINTS)
    if spec.structure is CorrelationStructure.MONO1:
        scale = max(1.0, constants.a2 / constants.a1)
    else:
        scale = max(1.0, abs(math.log(constants.a1)) / constants.a2)
    return np.linspace(LINEAR_TAIL[0] * scale, LINEAR_TAIL[1] * scale, TAIL_POINTS)


def asymptotic_coefficient(spec: ModelSpec, constants: GeodesicConstants,
                           mode: VolumeMode = VolumeMode.PAPER_SEPARABLE) -> float:
    """c in igc(tau) ~ c / tau, the mean of igc * tau over the tail once it has plateaued."""
    _require_two_macro_variables(spec, 'asymptotic_coefficient')
    taus = tail_grid(spec, constants)
    products = np.array([igc(spec, constants, float(t), mode) * t for t in taus])
    mean = float(np.mean(products))
    spread = float((np.max(products) - np.min(products)) / abs(mean)) if mean != 0.0 else math.inf
    if not spread < PLATEAU_TOLERANCE:
        raise ConvergenceError(
            f"asymptotic_coefficient: igc*tau for {spec.structure} rho={spec.rho} ({mode}) "
            f"spreads by {spread!r} over the tail [{taus[0]!r}, {taus[-1]!r}]", spread=spread)
    logger.debug(f"asymptotic_coefficient: {spec.structure} rho={spec.rho} -> {mean!r} (spread {spread!r})")
    return mean


def fit_tail_exponent(spec: ModelSpec, constants: GeodesicConstants,
                      mode: VolumeMode = VolumeMode.PAPER_SEPARABLE) -> float:
    """p in igc ~ tau**p, the slope of a least squares line through the log-log tail."""
    taus = tail_grid(spec, constants)
    values = np.array([igc(spec, constants, float(t), mode) for t in taus])
    slope, _ = np.polyfit(np.log(taus), np.log(values), 1)
    return float(slope)


def linear_growth_coefficient(spec: ModelSpec, constants: GeodesicConstants) -> float:
    """Slope of igc against tau in the tail: A1/2 for mono1, sqrt(2) A2 / 2 for mono2."""
    _require_monovariate_case(spec, 'linear_growth_coefficient')
    taus = tail_grid(spec, constants)
    values = np.array([monovariate_igc(spec, constants, float(t)) for t in taus])
    slope, _ = np.polyfit(taus, values, 1)
    return float(slope)


def closed_form_ratio(structure: CorrelationStructure, rho: float) -> float:
    if structure is CorrelationStructure.BIVARIATE_STRONG:
        return math.sqrt(1.0 + rho)
    if structure is CorrelationStructure.TRIVARIATE_WEAK:
        return math.sqrt(3.0) * math.sqrt((1.0 + rho) / (3.0 + rho))
    if structure is CorrelationStructure.TRIVARIATE_MILDLY_WEAK:
        return math.sqrt(3.0) * math.sqrt((1.0 - 2.0 * rho ** 2) / (3.0 - 4.0 * rho))
    if structure is CorrelationStructure.TRIVARIATE_STRONG:
        return math.sqrt(1.0 + 2.0 * rho)
    raise PreconditionError(f"closed_form_ratio: {structure} has no correlation coefficient")


def amplification_ratio(rho: float) -> float:
    """R_trivariate_strong / R_bivariate_strong = sqrt((1 + 2 rho) / (1 + rho)); rho = 1 is the limit."""
    if not -0.5 < rho <= 1.0:
        raise PreconditionError(f"amplification_ratio: rho must lie in (-1/2, 1], got {rho}")
    return math.sqrt((1.0 + 2.0 * rho) / (1.0 + rho))


def _coefficient_at(args: Tuple[CorrelationStructure, float, GeodesicConstants, VolumeMode]) -> float:
    structure, rho, constants, mode = args
    return asymptotic_coefficient(ModelSpec(structure, rho), constants, mode)


def ratio_curve(structure: CorrelationStructure, rho_samples: Sequence[float],
                constants: GeodesicConstants = None, mode: VolumeMode = VolumeMode.PAPER_SEPARABLE,
                workers: int = 1, detect_peak: bool = True) -> RatioCurve:
    """Fitted R(rho) = c(rho) / c(0) next to the closed form, with the interior peak if there is one.

    The rho = 0 normalisation is always its own run. With workers > 1 the grid points are
    evaluated in a process pool; results keep the order of `rho_samples`. The peak is refined
    on the fitted coefficient itself."""
    constants = constants or GeodesicConstants()
    rhos = [float(rho) for rho in rho_samples]
    for rho in rhos:
        ModelSpec(structure, rho)
    reference = _coefficient_at((structure, 0.0, constants, mode))
    jobs = [(structure, rho, constants, mode) for rho in rhos]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            coefficients = list(pool.map(_coefficient_at, jobs))
    else:
        coefficients = [_coefficient_at(job) for job in jobs]
    samples = tuple((rho, c / reference) for rho, c in zip(rhos, coefficients))
    closed_form = tuple((rho, closed_form_ratio(structure, rho)) for rho in rhos)
    curve = RatioCurve(structure, samples, closed_form)
    logger.info(f"ratio_curve: {structure} sampled at {len(rhos)} points")
    if not detect_peak:
        return curve

    def fitted_ratio(rho: float) -> float:
        return _coefficient_at((structure, rho, constants, mode)) / reference

    return RatioCurve(structure, samples, closed_form, find_ratio_peak(curve, fitted_ratio))


def find_ratio_peak(curve: RatioCurve,
                    ratio: Optional[Callable[[float], float]] = None) -> Optional[Tuple[float, float]]:
    """Interior maximiser of the sampled R, refined by golden section around the best sample.

    `ratio` evaluates R between the samples; without it the samples are interpolated by a
    cubic spline. Returns None when the best sample is an end point of the grid (monotone curve)."""
    if len(curve.samples) < PEAK_MIN_SAMPLES:
        logger.warning(f"find_ratio_peak: {curve.structure} has {len(curve.samples)} samples, "
                       f"peak detection expects at least {PEAK_MIN_SAMPLES}")
    if len(curve.samples) < 3:
        return None
    samples = sorted(curve.samples)
    rhos = np.array([rho for rho, _ in samples])
    values = np.array([value for _, value in samples])
    best = int(np.argmax(values))
    if best == 0 or best == len(values) - 1:
        return None
    if ratio is None:
        spline = CubicSpline(rhos, values)

        def ratio(rho: float) -> float:
            return float(spline(rho))

    def objective(rho: float) -> float:
        return -ratio(rho)

    lower, middle, upper = rhos[best - 1], rhos[best], rhos[best + 1]
    try:
        result = minimize_scalar(objective, bracket=(lower, middle, upper), method='golden',
                                 options={'xtol': PEAK_XTOL})
    except ValueError:
        result = minimize_scalar(objective, bounds=(lower, upper), method='bounded',
                                 options={'xatol': PEAK_XTOL})
    peak = float(result.x)
    logger.info(f"find_ratio_peak: {curve.structure} peaks at rho={peak!r}")
    return peak, ratio(peak)


def classify_growth(curvature: float) -> Growth:
    if curvature > 0.0:
        return Growth.BOUNDED
    if curvature < 0.0:
        return Growth.EXPONENTIAL
    return Growth.LINEAR


def jacobi_closed_form(curvature: float, initial: Tuple[float, float], taus) -> Tuple[np.ndarray, np.ndarray]:
    """J and its analytic second derivative for J'' + K J = 0."""
    j0, j_dot0 = initial
    taus = np.asarray(taus, dtype=float)
    if curvature > 0.0:
        omega = math.sqrt(curvature)
        cos, sin = np.cos(omega * taus), np.sin(omega * taus)
        return j0 * cos + (j_dot0 / omega) * sin, -omega ** 2 * j0 * cos - omega * j_dot0 * sin
    if curvature < 0.0:
        lam = math.sqrt(-curvature)
        cosh, sinh = np.cosh(lam * taus), np.sinh(lam * taus)
        return j0 * cosh + (j_dot0 / lam) * sinh, lam ** 2 * j0 * cosh + lam * j_dot0 * sinh
    return j0 + j_dot0 * taus, np.zeros_like(taus)


def jacobi_deviation(curvature: float, initial: Tuple[float, float] = (1.0, 0.0), tau_end: float = 10.0,
                     samples: int = JACOBI_SAMPLES) -> JacobiSolution:
    taus = np.linspace(0.0, tau_end, samples)
    values, _ = jacobi_closed_form(curvature, initial, taus)
    return JacobiSolution(float(curvature), tuple(zip(taus.tolist(), values.tolist())),
                          (float(initial[0]), float(initial[1])), classify_growth(curvature))


def jacobi_residual(solution: JacobiSolution) -> float:
    """max |J'' + K J| / (1 + |K J| + |J''|) over the samples."""
    taus = np.array([tau for tau, _ in solution.samples])
    values, second = jacobi_closed_form(solution.curvature, solution.initial, taus)
    residual = np.abs(second + solution.curvature * values)
    return float(np.max(residual / (1.0 + np.abs(solution.curvature * values) + np.abs(second)), initial=0.0))


def paper_prefactors(spec: ModelSpec, constants: GeodesicConstants) -> Tuple[float, float]:
    """(volume prefactor, asymptotic coefficient) in their published closed forms."""
    _require_two_macro_variables(spec, 'paper_prefactors')
    rho = spec.rho
    scale = constants.sigma0 * constants.a1
    structure = spec.structure
    if structure is CorrelationStructure.MONO3:
        return math.sqrt(2.0), 2.0 / scale
    if structure is CorrelationStructure.BIVARIATE_STRONG:
        return 4.0, 4.0 * math.sqrt(2.0) * math.sqrt(1.0 + rho) / scale
    if structure is CorrelationStructure.TRIVARIATE_WEAK:
        return 6.0, 6.0 * math.sqrt(6.0) * math.sqrt((1.0 + rho) / (3.0 + rho)) / scale
    if structure is CorrelationStructure.TRIVARIATE_MILDLY_WEAK:
        return 6.0, 6.0 * math.sqrt(6.0) * math.sqrt((1.0 - 2.0 * rho ** 2) / (3.0 - 4.0 * rho)) / scale
    return 6.0 * math.sqrt(2.0), 12.0 * math.sqrt(1.0 + 2.0 * rho) / scale


def derived_prefactors(spec: ModelSpec, constants: GeodesicConstants) -> Tuple[float, float]:
    """The separable volume is beta * exp(-a tau), hence c = beta / a."""
    _, beta = metric_profile(spec)
    return beta, beta / rate_function(spec, constants).value


def _compare(quantity: str, printed: float, derived: float, note: str) -> Discrepancy:
    return Discrepancy(quantity, printed, derived, math.isclose(printed, derived, rel_tol=1e-9), note)


def discrepancies(spec: ModelSpec, constants: GeodesicConstants) -> Tuple[Discrepancy, ...]:
    """Printed constants against the derived ones; disagreements are logged as warnings."""
    printed_volume, printed_coefficient = paper_prefactors(spec, constants)
    derived_volume, derived_coefficient = derived_prefactors(spec, constants)
    label = f"{spec.structure} rho={spec.rho!r}"
    found = [
        _compare('volume_prefactor', printed_volume, derived_volume, f"{label}: vol(0) of the separable volume"),
        _compare('asymptotic_coefficient', printed_coefficient, derived_coefficient,
                 f"{label}: c in igc ~ c / tau"),
    ]
    if spec.structure is CorrelationStructure.TRIVARIATE_WEAK:
        rho = spec.rho
        # the printed integrand is the one of the mildly weak structure
        found.append(_compare('volume_integrand', math.sqrt(6.0 * (3.0 - 4.0 * rho) / (1.0 - 2.0 * rho ** 2)),
                              volume_density(spec), f"{label}: sigma**2 * sqrt(det g)"))
    for item in found:
        if not item.agrees:
            logger.warning(f"discrepancies: {item.quantity} printed {item.printed!r}, "
                           f"derived {item.derived!r} ({item.note})")
    return tuple(found)


def complexity_report(spec: ModelSpec, constants: GeodesicConstants,
                      mode: VolumeMode = VolumeMode.PAPER_SEPARABLE, tau: float = 10.0,
                      samples: int = REPORT_SAMPLES) -> ComplexityReport:
    """Volumes on [0, tau], igc on (0, tau], the asymptotic law and the discrepancy flags."""
    if not tau > 0.0:
        raise PreconditionError(f"complexity_report: tau must be positive, got {tau}")
    taus = np.linspace(0.0, tau, samples)
    volumes = volume_series(spec, constants, taus, mode)
    if spec.m == 1:
        coefficient = linear_growth_coefficient(spec, constants)
        decay_rate = None
        growth = Growth.LINEAR
        flags: Tuple[Discrepancy, ...] = ()
    else:
        coefficient = asymptotic_coefficient(spec, constants, mode)
        decay_rate = rate_function(spec, constants).value
        growth = Growth.DECAYING
        flags = discrepancies(spec, constants)
    averages: List[Tuple[float, float]] = [(float(t), igc(spec, constants, float(t), mode)) for t in taus[1:]]
    return ComplexityReport(
        structure=spec.structure,
        rho=float(spec.rho),
        mode=mode,
        volumes=tuple(zip(taus.tolist(), np.asarray(volumes, dtype=float).tolist())),
        igc=tuple(averages),
        asymptotic_coefficient=coefficient,
        decay_rate=decay_rate,
        growth=growth,
        tail_exponent=fit_tail_exponent(spec, constants, mode),
        discrepancies=flags,
    )
