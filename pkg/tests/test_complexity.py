import logging
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gaussian_igc import complexity
from gaussian_igc.complexity import (amplification_ratio, asymptotic_coefficient, classify_growth,
                                     closed_form_ratio, complexity_report, derived_prefactors, discrepancies,
                                     find_ratio_peak, fit_tail_exponent, igc, jacobi_deviation, jacobi_residual,
                                     linear_growth_coefficient, monovariate_igc, paper_prefactors, ratio_curve,
                                     rectangle_volume, separable_volumes, volume)
from gaussian_igc.constants import CORRELATED_STRUCTURES, CorrelationStructure, Growth, VolumeMode
from gaussian_igc.errors import ConvergenceError, InadmissibleCorrelationError, PreconditionError
from gaussian_igc.geodesics import GeodesicConstants, closed_form_arrays, rate_function
from gaussian_igc.model import ModelSpec, admissible_rho_interval
from gaussian_igc.reports import RatioCurve

from .helpers import PROFILES, TWO_MACRO_STRUCTURES, rho_samples, spec_grid

MILD = CorrelationStructure.TRIVARIATE_MILDLY_WEAK
HALF_ROOT_TWO = math.sqrt(2.0) / 2.0


def closed_form_curve(structure, count=401):
    lower, upper = admissible_rho_interval(structure)
    rhos = np.linspace(lower + 1e-3, upper - 1e-3, count)
    pairs = tuple((float(rho), closed_form_ratio(structure, float(rho))) for rho in rhos)
    return RatioCurve(structure, pairs, pairs)


def test_bivariate_volume(unit_constants):
    spec = ModelSpec(CorrelationStructure.BIVARIATE_STRONG, 0.3)
    for tau in (0.0, 1.0, 5.0):
        expected = 4.0 * math.exp(-tau / math.sqrt(2.0 * 1.3))
        assert volume(spec, unit_constants, tau) == pytest.approx(expected, rel=1e-12)


@pytest.mark.parametrize("structure, rho", spec_grid(TWO_MACRO_STRUCTURES, count=3))
def test_separable_volume_decays_at_the_geodesic_rate(structure, rho):
    spec = ModelSpec(structure, rho)
    constants = GeodesicConstants(sigma0=1.4, a1=0.6)
    taus = np.linspace(0.0, 20.0, 41)
    volumes = separable_volumes(spec, constants, taus)
    assert volumes[0] == pytest.approx(PROFILES[structure](rho)[1], rel=1e-12)
    assert np.all(np.diff(volumes) < 0.0)
    slope, _ = np.polyfit(taus, np.log(volumes), 1)
    assert slope == pytest.approx(-rate_function(spec, constants).value, abs=1e-6)


def test_separable_volume_is_the_endpoint_product(unit_constants):
    spec = ModelSpec(CorrelationStructure.TRIVARIATE_WEAK, -0.3)
    alpha, beta = PROFILES[spec.structure](-0.3)
    mu, sigma, _, _ = closed_form_arrays(spec, unit_constants, 2.0)
    assert volume(spec, unit_constants, 2.0) == pytest.approx(abs(math.sqrt(alpha * beta) / sigma * mu), rel=1e-12)


def test_rectangle_volume(unit_constants):
    spec = ModelSpec(CorrelationStructure.MONO3)
    assert volume(spec, unit_constants, 0.0, VolumeMode.RECTANGLE_QUADRATURE) == 0.0
    values = []
    for tau in (0.5, 2.0):
        mu, sigma, _, _ = closed_form_arrays(spec, unit_constants, [0.0, tau])
        box = math.sqrt(2.0) * (mu[1] - mu[0]) * (1.0 / sigma[1] - 1.0 / sigma[0])
        values.append(rectangle_volume(spec, unit_constants, tau))
        assert values[-1] == pytest.approx(box, rel=1e-7)
    assert values[1] > values[0]


def test_volume_preconditions(unit_constants):
    with pytest.raises(PreconditionError):
        volume(ModelSpec(CorrelationStructure.MONO1), unit_constants, 1.0)
    with pytest.raises(PreconditionError):
        volume(ModelSpec(CorrelationStructure.MONO3), unit_constants, -1.0)
    with pytest.raises(PreconditionError):
        igc(ModelSpec(CorrelationStructure.MONO3), unit_constants, 0.0)


@pytest.mark.parametrize("structure, rho", spec_grid(TWO_MACRO_STRUCTURES, count=3))
def test_igc_matches_the_time_average(structure, rho, unit_constants):
    spec = ModelSpec(structure, rho)
    beta = PROFILES[structure](rho)[1]
    rate = rate_function(spec, unit_constants).value
    for tau in (0.5, 3.0, 30.0):
        expected = beta * (1.0 - math.exp(-rate * tau)) / (rate * tau)
        assert igc(spec, unit_constants, tau) == pytest.approx(expected, rel=1e-10)


@pytest.mark.parametrize("structure, rho, expected", [
    (CorrelationStructure.BIVARIATE_STRONG, 0.0, 4.0 * math.sqrt(2.0)),
    (CorrelationStructure.TRIVARIATE_WEAK, 0.0, 6.0 * math.sqrt(6.0) * math.sqrt(1.0 / 3.0)),
    (CorrelationStructure.TRIVARIATE_WEAK, 0.5, 6.0 * math.sqrt(6.0) * math.sqrt(1.5 / 3.5)),
    (CorrelationStructure.TRIVARIATE_MILDLY_WEAK, 0.5, 6.0 * math.sqrt(6.0) * math.sqrt(0.5)),
    (CorrelationStructure.MONO3, 0.0, 2.0 * math.sqrt(2.0)),
    (CorrelationStructure.TRIVARIATE_STRONG, 0.0, 6.0 * math.sqrt(2.0)),
])
def test_asymptotic_coefficient(structure, rho, expected, unit_constants):
    assert asymptotic_coefficient(ModelSpec(structure, rho), unit_constants) == pytest.approx(expected, rel=1e-6)


@pytest.mark.parametrize("structure", TWO_MACRO_STRUCTURES)
def test_doubling_sigma0_halves_the_coefficient(structure):
    spec = ModelSpec(structure, 0.0)
    base = asymptotic_coefficient(spec, GeodesicConstants(sigma0=1.0))
    doubled = asymptotic_coefficient(spec, GeodesicConstants(sigma0=2.0))
    assert doubled == pytest.approx(base / 2.0, rel=1e-9)


def test_plateau_failure_is_raised(monkeypatch, unit_constants):
    monkeypatch.setattr(complexity, 'igc', lambda spec, constants, tau, mode: 1.0)
    with pytest.raises(ConvergenceError) as error:
        asymptotic_coefficient(ModelSpec(CorrelationStructure.MONO3), unit_constants)
    assert error.value.code == 4
    assert error.value.spread > 1e-3


@pytest.mark.parametrize("structure", TWO_MACRO_STRUCTURES)
def test_decaying_tail_exponent(structure, unit_constants):
    for rho in rho_samples(structure, count=3):
        assert fit_tail_exponent(ModelSpec(structure, rho), unit_constants) == pytest.approx(-1.0, abs=0.01)


@pytest.mark.parametrize("structure", [CorrelationStructure.MONO1, CorrelationStructure.MONO2])
@pytest.mark.parametrize("constants", [GeodesicConstants(a1=2.0, a2=1.0), GeodesicConstants(a1=0.3, a2=5.0)])
def test_linear_tail_exponent(structure, constants):
    assert fit_tail_exponent(ModelSpec(structure), constants) == pytest.approx(1.0, abs=0.01)


def test_monovariate_growth_coefficients():
    mono1, mono2 = ModelSpec(CorrelationStructure.MONO1), ModelSpec(CorrelationStructure.MONO2)
    assert linear_growth_coefficient(mono1, GeodesicConstants(a1=2.0)) == pytest.approx(1.0, rel=1e-9)
    assert linear_growth_coefficient(mono2, GeodesicConstants(a2=math.sqrt(2.0))) == pytest.approx(1.0, rel=1e-9)
    assert monovariate_igc(mono1, GeodesicConstants(a1=2.0, a2=3.0), 1e-6) == pytest.approx(3.0, rel=1e-6)
    assert igc(mono1, GeodesicConstants(a1=2.0, a2=3.0), 4.0) == pytest.approx(7.0, rel=1e-12)
    with pytest.raises(PreconditionError):
        monovariate_igc(ModelSpec(CorrelationStructure.MONO3), GeodesicConstants(), 1.0)
    with pytest.raises(PreconditionError):
        linear_growth_coefficient(ModelSpec(CorrelationStructure.MONO3), GeodesicConstants())


@pytest.mark.parametrize("structure", CORRELATED_STRUCTURES)
def test_fitted_ratios_match_the_closed_forms(structure, unit_constants):
    curve = ratio_curve(structure, rho_samples(structure), unit_constants)
    for (rho, fitted), (_, closed) in zip(curve.samples, curve.closed_form):
        assert abs(fitted - closed) <= 1e-3
        if rho == 0.0:
            assert fitted == 1.0
            assert closed == pytest.approx(1.0, abs=1e-15)


def test_ratio_curve_rejects_inadmissible_samples(unit_constants):
    with pytest.raises(InadmissibleCorrelationError):
        ratio_curve(CorrelationStructure.TRIVARIATE_STRONG, [-0.6], unit_constants)


def test_ratio_curve_workers_keep_order(unit_constants):
    rhos = [0.4, -0.2, 0.0, 0.1]
    serial = ratio_curve(CorrelationStructure.BIVARIATE_STRONG, rhos, unit_constants)
    parallel = ratio_curve(CorrelationStructure.BIVARIATE_STRONG, rhos, unit_constants, workers=2)
    assert parallel == serial
    assert [rho for rho, _ in parallel.samples] == rhos


def test_closed_form_ratio_values():
    assert closed_form_ratio(MILD, 0.5) == pytest.approx(math.sqrt(1.5), rel=1e-14)
    assert closed_form_ratio(MILD, 0.5) == pytest.approx(closed_form_ratio(CorrelationStructure.BIVARIATE_STRONG, 0.5),
                                                         abs=1e-12)
    assert closed_form_ratio(CorrelationStructure.TRIVARIATE_STRONG, -0.49) == pytest.approx(math.sqrt(0.02))
    with pytest.raises(PreconditionError):
        closed_form_ratio(CorrelationStructure.MONO3, 0.0)


def test_mildly_weak_ratio_vanishes_at_the_endpoints():
    assert closed_form_ratio(MILD, -(HALF_ROOT_TWO - 1e-6)) < 2e-3
    # on the upper side R ~ 7 sqrt(delta), so the approach has to be closer
    assert closed_form_ratio(MILD, HALF_ROOT_TWO - 1e-8) < 1e-3


@pytest.mark.parametrize("structure", [CorrelationStructure.BIVARIATE_STRONG, CorrelationStructure.TRIVARIATE_WEAK,
                                       CorrelationStructure.TRIVARIATE_STRONG])
def test_monotone_ratio_curves(structure):
    curve = closed_form_curve(structure)
    values = np.array([value for _, value in curve.samples])
    assert np.all(np.diff(values) >= 0.0)
    assert find_ratio_peak(curve) is None


def test_mildly_weak_peak_on_closed_form_samples():
    curve = closed_form_curve(MILD)
    values = np.array([value for _, value in curve.samples])
    best = int(np.argmax(values))
    assert np.all(np.diff(values[:best + 1]) > 0.0)
    assert np.all(np.diff(values[best:]) < 0.0)
    rho_peak, value = find_ratio_peak(curve)
    assert rho_peak == pytest.approx(0.5, abs=1e-6)
    assert value == pytest.approx(math.sqrt(1.5), abs=1e-6)
    assert value == pytest.approx(closed_form_ratio(CorrelationStructure.BIVARIATE_STRONG, rho_peak), abs=1e-6)


def test_mildly_weak_peak_from_fitted_curve(unit_constants):
    lower, upper = admissible_rho_interval(MILD)
    curve = ratio_curve(MILD, np.linspace(lower + 1e-3, upper - 1e-3, 401), unit_constants)
    assert curve.peak is not None
    assert curve.peak[0] == pytest.approx(0.5, abs=1e-6)
    assert curve.peak[1] == pytest.approx(math.sqrt(1.5), abs=1e-6)


def test_peak_follows_the_samples():
    rhos = np.linspace(-0.7, 0.7, 401)
    samples = tuple((float(rho), 1.0 - (float(rho) - 0.3) ** 2) for rho in rhos)
    curve = RatioCurve(MILD, samples)
    rho_peak, value = find_ratio_peak(curve)
    assert rho_peak == pytest.approx(0.3, abs=1e-7)
    assert value == pytest.approx(1.0, abs=1e-12)


def test_peak_refinement_uses_the_given_ratio():
    curve = closed_form_curve(MILD)
    calls = []

    def ratio(rho):
        calls.append(rho)
        return closed_form_ratio(MILD, rho)

    rho_peak, value = find_ratio_peak(curve, ratio)
    assert calls
    assert rho_peak == pytest.approx(0.5, abs=1e-7)
    assert value == closed_form_ratio(MILD, rho_peak)


def test_sparse_curves_are_flagged(caplog):
    curve = closed_form_curve(MILD, count=21)
    with caplog.at_level(logging.WARNING, logger='gaussian_igc.complexity'):
        peak = find_ratio_peak(curve)
    assert 'at least 400' in caplog.text
    assert peak is not None


def test_amplification_ratio():
    assert amplification_ratio(0.0) == 1.0
    assert amplification_ratio(1.0) == pytest.approx(math.sqrt(1.5))
    assert all(amplification_ratio(rho) < 1.0 for rho in np.linspace(-0.49, -0.01, 25))
    assert all(amplification_ratio(rho) > 1.0 for rho in np.linspace(0.01, 0.99, 25))
    for rho in (-0.5, 1.2):
        with pytest.raises(PreconditionError):
            amplification_ratio(rho)


def test_jacobi_closed_forms():
    taus = np.linspace(0.0, 10.0, 201)
    bounded = jacobi_deviation(1.0, (1.0, 0.0), 10.0)
    assert np.allclose([j for _, j in bounded.samples], np.cos(taus), atol=1e-14)
    growing = jacobi_deviation(-1.0, (1.0, 0.0), 10.0)
    assert np.allclose([j for _, j in growing.samples], np.cosh(taus), rtol=1e-14)
    free = jacobi_deviation(0.0, (0.0, 1.0), 10.0)
    assert np.allclose([j for _, j in free.samples], taus, atol=1e-14)
    assert (bounded.growth, growing.growth, free.growth) == (Growth.BOUNDED, Growth.EXPONENTIAL, Growth.LINEAR)


@settings(max_examples=100, deadline=None)
@given(st.floats(-4.0, 4.0), st.floats(-3.0, 3.0), st.floats(-3.0, 3.0))
def test_jacobi_residual_and_growth(curvature, j0, j_dot0):
    solution = jacobi_deviation(curvature, (j0, j_dot0), 5.0)
    assert jacobi_residual(solution) <= 1e-10
    assert solution.growth is classify_growth(curvature)
    values = np.abs([j for _, j in solution.samples])
    if curvature > 0.0:
        envelope = math.hypot(j0, j_dot0 / math.sqrt(curvature))
        assert np.all(values <= envelope * (1.0 + 1e-12) + 1e-12)


def test_negative_curvature_separates_geodesics():
    solution = jacobi_deviation(-1.0 / 6.0, (0.0, 1.0), 30.0)
    values = np.array([j for _, j in solution.samples])
    assert np.all(np.diff(values) > 0.0)
    assert values[-1] > 100.0


def test_printed_and_derived_prefactors(unit_constants):
    mono3 = ModelSpec(CorrelationStructure.MONO3)
    assert paper_prefactors(mono3, unit_constants) == pytest.approx((math.sqrt(2.0), 2.0))
    assert derived_prefactors(mono3, unit_constants) == pytest.approx((2.0, 2.0 * math.sqrt(2.0)))
    bivariate = ModelSpec(CorrelationStructure.BIVARIATE_STRONG, 0.4)
    printed, derived = paper_prefactors(bivariate, unit_constants), derived_prefactors(bivariate, unit_constants)
    assert printed == pytest.approx(derived, rel=1e-12)


def test_discrepancies_are_flagged(unit_constants, caplog):
    with caplog.at_level(logging.WARNING, logger='gaussian_igc.complexity'):
        flags = {item.quantity: item for item in discrepancies(ModelSpec(CorrelationStructure.TRIVARIATE_STRONG, 0.2),
                                                               unit_constants)}
    assert not flags['volume_prefactor'].agrees
    assert flags['volume_prefactor'].printed == pytest.approx(6.0 * math.sqrt(2.0))
    assert flags['volume_prefactor'].derived == pytest.approx(6.0)
    assert not flags['asymptotic_coefficient'].agrees
    assert 'volume_prefactor' in caplog.text
    weak = {item.quantity: item for item in discrepancies(ModelSpec(CorrelationStructure.TRIVARIATE_WEAK, 0.3),
                                                          unit_constants)}
    assert weak['asymptotic_coefficient'].agrees
    assert not weak['volume_integrand'].agrees
    assert weak['volume_integrand'].derived == pytest.approx(math.sqrt(6.0 * 3.3 / 1.3))


def test_complexity_report_for_a_decaying_model(unit_constants):
    spec = ModelSpec(CorrelationStructure.BIVARIATE_STRONG, 0.2)
    report = complexity_report(spec, unit_constants, tau=10.0, samples=21)
    assert report.growth is Growth.DECAYING
    assert report.decay_rate == pytest.approx(1.0 / math.sqrt(2.4))
    assert report.asymptotic_coefficient == pytest.approx(4.0 * math.sqrt(2.0) * math.sqrt(1.2), rel=1e-6)
    assert report.tail_exponent == pytest.approx(-1.0, abs=0.01)
    assert len(report.volumes) == 21 and len(report.igc) == 20
    assert all(vol > 0.0 for _, vol in report.volumes)
    assert report.volumes[0] == (0.0, pytest.approx(4.0))


def test_complexity_report_for_mono1():
    report = complexity_report(ModelSpec(CorrelationStructure.MONO1), GeodesicConstants(a1=3.0), samples=11)
    assert report.growth is Growth.LINEAR
    assert report.asymptotic_coefficient == pytest.approx(1.5, rel=1e-9)
    assert report.decay_rate is None
    assert report.discrepancies == ()
