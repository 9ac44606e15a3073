import io
import json
import logging

import pytest

from gaussian_igc.adapters import CsvOutputAdapter, JsonOutputAdapter, adapter_for, format_cell
from gaussian_igc.constants import CorrelationStructure, Growth, OutputFormat, VolumeMode
from gaussian_igc.errors import ConfigError
from gaussian_igc.reports import (ComplexityReport, Discrepancy, JacobiSolution, RatioCurve, ToolkitReport,
                                  emit, parse)

from .helpers import read_csv

HEADERS = ('tau', 'volume', 'igc')
ROWS = [{'tau': 0.0, 'volume': 4.0, 'igc': None}, {'tau': 0.1, 'volume': 3.7, 'igc': 1.0 / 3.0}]


def sample_report():
    complexity = ComplexityReport(
        structure=CorrelationStructure.TRIVARIATE_STRONG, rho=0.25, mode=VolumeMode.PAPER_SEPARABLE,
        volumes=((0.0, 6.0), (1.0, 2.5)), igc=((1.0, 4.1),), asymptotic_coefficient=10.392304845413264,
        decay_rate=0.5773502691896258, growth=Growth.DECAYING, tail_exponent=-1.0000000002,
        discrepancies=(Discrepancy('volume_prefactor', 8.48528137423857, 6.0, False, 'vol(0)'),))
    curves = (
        RatioCurve(CorrelationStructure.TRIVARIATE_MILDLY_WEAK, ((0.0, 1.0), (0.5, 1.2247448713915887)),
                   ((0.0, 1.0), (0.5, 1.224744871391589)), (0.5000000001, 1.224744871391589)),
        RatioCurve(CorrelationStructure.BIVARIATE_STRONG, ((0.1, 1.0488088481701516),)),
    )
    return ToolkitReport(complexity, curves, ((0.0, 1.0), (1.0, 1.224744871391589)),
                         complexity.discrepancies, (('rho', 0.25), ('out', None), ('structure', 'trivariate-strong')))


def test_format_cell():
    assert format_cell(None) == ''
    assert format_cell(0.1) == '0.1'
    assert format_cell(1.0 / 3.0) == '0.3333333333333333'
    assert format_cell(True) == 'True'
    assert format_cell('mono3') == 'mono3'


def test_csv_table():
    stream = io.StringIO()
    CsvOutputAdapter(stream).write_table(HEADERS, ROWS, {'max_deviation': 1e-9, 'momentum_drift': None})
    text = stream.getvalue()
    assert text.splitlines()[0] == 'tau,volume,igc'
    assert text.splitlines()[1] == '0.0,4.0,'
    rows, footer = read_csv(text)
    assert float(rows[1]['igc']) == 1.0 / 3.0
    assert footer == {'max_deviation': '1e-09', 'momentum_drift': ''}


def test_csv_adapter_refuses_reports():
    with pytest.raises(ConfigError):
        CsvOutputAdapter(io.StringIO()).write_report(sample_report())


def test_json_table():
    stream = io.StringIO()
    JsonOutputAdapter(stream).write_table(HEADERS, ROWS)
    document = json.loads(stream.getvalue())
    assert document['columns'] == list(HEADERS)
    assert document['rows'][0] == [0.0, 4.0, None]
    assert 'footer' not in document


def test_closed_stream_is_skipped(caplog):
    stream = io.StringIO()
    stream.close()
    with caplog.at_level(logging.WARNING, logger='gaussian_igc.adapters'):
        CsvOutputAdapter(stream).write_table(HEADERS, ROWS)
    assert 'output stream is closed' in caplog.text


def test_adapter_for():
    assert isinstance(adapter_for(OutputFormat.JSON, io.StringIO()), JsonOutputAdapter)
    assert isinstance(adapter_for(OutputFormat.CSV, io.StringIO()), CsvOutputAdapter)


def test_report_text_is_stable():
    report = sample_report()
    text = emit(report)
    again = parse(text)
    assert emit(again) == text
    assert again.complexity == report.complexity
    assert again.ratio_curves == report.ratio_curves
    document = json.loads(text)
    assert document['peaks'] == {'trivariate-mildly-weak': [0.5000000001, 1.224744871391589],
                                 'bivariate-strong': None}
    assert document['settings']['out'] is None


def test_json_adapter_writes_reports():
    stream = io.StringIO()
    JsonOutputAdapter(stream).write_report(sample_report())
    assert stream.getvalue() == emit(sample_report())


def test_non_finite_values_are_rejected():
    curve = RatioCurve(CorrelationStructure.BIVARIATE_STRONG, ((0.0, float('nan')),))
    with pytest.raises(ValueError):
        emit(curve)


def test_jacobi_solution_round_trip():
    solution = JacobiSolution(-0.25, ((0.0, 1.0), (1.0, 1.1276259652063807)), (1.0, 0.0), Growth.EXPONENTIAL)
    assert parse(emit(solution), JacobiSolution) == solution


def test_qualitative_discrepancy_round_trip():
    flag = Discrepancy('curvature_spread', None, 3.2e-9, False, 'published as not constant')
    assert json.loads(emit(flag))['printed'] is None
    assert parse(emit(flag), Discrepancy) == flag
