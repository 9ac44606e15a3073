from logging import Logger, getLogger
from functools import wraps
from typing import Any, Dict, List, NamedTuple, Optional, Tuple

import numpy as np

from .adapters import OutputAdapter
from .complexity import amplification_ratio, complexity_report, discrepancies, igc, ratio_curve, volume_series
from .configuration import RunConfig
from .constants import *
from .errors import *
from .geodesics import (GeodesicConstants, closed_form_arrays, geodesic_residual,
                        initial_state, integrate_geodesic, max_deviation, max_relative_drift, momentum_series,
                        speed_series)
from .geometry import (curvature_constancy, curvature_discrepancies, fisher_closed_form, fisher_numeric,
                       sectional_curvature)
from .model import ModelSpec, ThetaPoint, is_admissible
from .reports import ToolkitReport

__version__ = '0.1.0'

# rho values closer to 0 than this are written as 0.0
RHO_SNAP = 1e-12


class Table(NamedTuple):
    headers: Tuple[str, ...]
    rows: List[Dict[str, Any]]
    footer: Optional[Dict[str, Any]] = None


def require_output_adapter(f):
    @wraps(f)
    def assert_adapter(self, *args, **kwargs):
        if not isinstance(self._adapter, OutputAdapter):
            self._logger.info(f"{self.__class__.__name__}.{f.__name__}: no output adapter, aborting")
        else:
            return f(self, *args, **kwargs)
    return assert_adapter


def _metric_cells(prefix: str, components: np.ndarray) -> Dict[str, Optional[float]]:
    cells = {f'{prefix}11': float(components[0, 0]), f'{prefix}12': None, f'{prefix}22': None}
    if components.shape[0] == 2:
        cells[f'{prefix}12'] = float(components[0, 1])
        cells[f'{prefix}22'] = float(components[1, 1])
    return cells


class EntropicMotionToolkit(object):
    """Runs the metric, curvature, geodesic and complexity computations of one RunConfig
    and hands the resulting tables to an OutputAdapter."""

    def __init__(self, config: RunConfig, adapter: OutputAdapter = None, logger: Logger = None) -> None:
        self._logger = logger or getLogger('EntropicMotionToolkit')
        self._adapter = None
        RunConfig.sanity_check_configs(config)
        self.config = config
        if adapter is not None:
            self.set_adapter(adapter)

    def set_adapter(self, adapter: OutputAdapter) -> None:
        self._adapter = adapter

    def set_logger(self, logger: Logger) -> None:
        self._logger = logger

    @property
    def spec(self) -> ModelSpec:
        return self.config.model_spec()

    @property
    def constants(self) -> GeodesicConstants:
        return GeodesicConstants(self.config.sigma0, self.config.a1, self.config.a2)

    @property
    def theta(self) -> ThetaPoint:
        return ThetaPoint(self.config.mu, self.config.sigma)

    def metric_table(self) -> Table:
        spec, theta = self.spec, self.theta
        closed = fisher_closed_form(spec, theta).components
        numeric = fisher_numeric(spec, theta).components
        row = {'structure': str(spec.structure), 'rho': spec.rho, 'mu': theta.mu, 'sigma': theta.sigma}
        row.update(_metric_cells('g', closed))
        row.update(_metric_cells('numeric_g', numeric))
        row['max_difference'] = float(np.max(np.abs(closed - numeric)))
        row['curvature'] = sectional_curvature(spec, theta).sectional
        headers = ('structure', 'rho', 'mu', 'sigma', 'g11', 'g12', 'g22',
                   'numeric_g11', 'numeric_g12', 'numeric_g22', 'max_difference', 'curvature')
        return Table(headers, [row])

    def curvature_table(self) -> Table:
        spec = self.spec
        reference = ThetaPoint(self.config.mu, 1.0)
        rows = []
        for sigma in sorted(set(CURVATURE_SIGMAS) | {self.config.sigma}):
            point = ThetaPoint(self.config.mu, sigma)
            report = sectional_curvature(spec, point)
            first, last = report.antisymmetry_residuals()
            rows.append({
                'structure': str(spec.structure), 'rho': spec.rho, 'sigma': sigma,
                'curvature': report.sectional, 'flat': report.flat,
                'antisymmetry_first_pair': first, 'antisymmetry_last_pair': last,
                'constancy_difference': curvature_constancy(spec, reference, point).difference,
            })
        headers = ('structure', 'rho', 'sigma', 'curvature', 'flat', 'antisymmetry_first_pair',
                   'antisymmetry_last_pair', 'constancy_difference')
        return Table(headers, rows)

    def geodesic_table(self) -> Table:
        spec, constants = self.spec, self.constants
        trajectory = integrate_geodesic(spec, initial_state(spec, constants), self.config.tau, self.config.step)
        mu_closed, sigma_closed, _, _ = closed_form_arrays(spec, constants, trajectory.times)
        speeds = speed_series(spec, trajectory)
        momenta = None
        if spec.structure is not CorrelationStructure.MONO2:
            momenta = momentum_series(spec, trajectory)
        rows = []
        for i, tau in enumerate(trajectory.times):
            point = trajectory.points[i]
            rows.append({
                'tau': float(tau), 'mu_numeric': point.mu, 'sigma_numeric': point.sigma,
                'mu_closed': float(mu_closed[i]), 'sigma_closed': float(sigma_closed[i]),
                'speed': float(speeds[i]), 'conserved_momentum': None if momenta is None else float(momenta[i]),
            })
        footer = {
            'max_residual': geodesic_residual(spec, constants, np.linspace(0.0, self.config.tau, 101)),
            'max_deviation': max_deviation(spec, constants, trajectory),
            'speed_drift': max_relative_drift(speeds),
            'momentum_drift': None if momenta is None else max_relative_drift(momenta),
        }
        self._logger.info(f"geodesic_table: {spec.structure} max deviation {footer['max_deviation']!r}")
        headers = ('tau', 'mu_numeric', 'sigma_numeric', 'mu_closed', 'sigma_closed', 'speed', 'conserved_momentum')
        return Table(headers, rows, footer)

    def igc_table(self, samples: int = 101) -> Table:
        spec, constants, mode = self.spec, self.constants, self.config.mode
        taus = np.linspace(0.0, self.config.tau, samples)
        volumes = volume_series(spec, constants, taus, mode)
        rows = []
        for tau, vol in zip(taus.tolist(), volumes.tolist()):
            average = igc(spec, constants, tau, mode) if tau > 0.0 else None
            rows.append({'tau': tau, 'volume': vol, 'igc': average,
                         'igc_tau': None if average is None else average * tau})
        return Table(('tau', 'volume', 'igc', 'igc_tau'), rows)

    def figure1_table(self) -> Table:
        """Closed-form and fitted R(rho) of the correlated structures on one shared rho grid;
        cells outside a structure's admissible interval stay empty."""
        grid = [0.0 if abs(rho) < RHO_SNAP else float(rho) for rho in self.config.rho_grid()]
        rows = [{'rho': rho} for rho in grid]
        for structure in CORRELATED_STRUCTURES:
            indices = [i for i, rho in enumerate(grid) if is_admissible(structure, rho)]
            curve = ratio_curve(structure, [grid[i] for i in indices], self.constants, self.config.mode,
                                self.config.workers, detect_peak=False)
            for i, (_, fitted), (_, closed) in zip(indices, curve.samples, curve.closed_form):
                rows[i][f'R_{structure.name.lower()}'] = closed
                rows[i][f'R_{structure.name.lower()}_fit'] = fitted
        headers = ('rho',) + tuple(f'R_{s.name.lower()}' for s in CORRELATED_STRUCTURES) \
            + tuple(f'R_{s.name.lower()}_fit' for s in CORRELATED_STRUCTURES)
        return Table(headers, rows)

    def report(self) -> ToolkitReport:
        spec, constants, mode = self.spec, self.constants, self.config.mode
        complexity = complexity_report(spec, constants, mode, self.config.tau)
        curves = tuple(ratio_curve(structure, self.config.rho_grid(structure), constants, mode, self.config.workers)
                       for structure in CORRELATED_STRUCTURES)
        amplification = tuple((float(rho), amplification_ratio(float(rho)))
                               for rho in self.config.rho_grid(CorrelationStructure.TRIVARIATE_STRONG))
        flags = []
        for structure in (CorrelationStructure.MONO3,) + CORRELATED_STRUCTURES:
            rho = self.config.rho if is_admissible(structure, self.config.rho) else 0.0
            model = ModelSpec(structure, rho)
            flags.extend(discrepancies(model, constants))
            flags.extend(curvature_discrepancies(model))
        return ToolkitReport(complexity, curves, amplification, tuple(flags),
                             tuple(sorted(self.config.as_dict().items())))

    @require_output_adapter
    def run(self, command: str) -> None:
        """Compute `command` ('metric', 'curvature', 'geodesic', 'igc', 'figure1' or 'report') and write it."""
        tables = {
            'metric': self.metric_table,
            'curvature': self.curvature_table,
            'geodesic': self.geodesic_table,
            'igc': self.igc_table,
            'figure1': self.figure1_table,
        }
        self._logger.info(f"run: {command} for {self.config.structure} rho={self.config.rho}")
        try:
            if command == 'report':
                self._adapter.write_report(self.report())
            elif command in tables:
                table = tables[command]()
                self._adapter.write_table(table.headers, table.rows, table.footer)
            else:
                raise ConfigError(f"run: unknown command {command!r}")
        except IGCError as error:
            self._logger.error(f"run: {command} failed with {type(error).__name__} {error.args}")
            raise error
        self._adapter.flush()
