from configparser import ConfigParser, Error as ConfigParserError
import json
import logging
import math
import os
from types import SimpleNamespace
from typing import Any, Dict, Mapping

import numpy as np

from .constants import (CORRELATED_STRUCTURES, DEFAULT_HORIZON, DEFAULT_RHO_COUNT, DEFAULT_STEP, RHO_INSET,
                        CorrelationStructure, OutputFormat, VolumeMode)
from .errors import ConfigError
from .model import ModelSpec, admissible_rho_interval

SECTION = 'run'
LOG_LEVELS = ('CRITICAL', 'ERROR', 'WARNING', 'INFO', 'DEBUG')

# key -> (coercion, default); None defaults fall back to the admissible interval or stdout
_FIELDS = {
    'structure': (CorrelationStructure, CorrelationStructure.BIVARIATE_STRONG),
    'rho': (float, 0.0),
    'rho_min': (float, None),
    'rho_max': (float, None),
    'rho_count': (int, DEFAULT_RHO_COUNT),
    'sigma': (float, 1.0),
    'mu': (float, 0.0),
    'sigma0': (float, 1.0),
    'a1': (float, 1.0),
    'a2': (float, 1.0),
    'tau': (float, DEFAULT_HORIZON),
    'step': (float, DEFAULT_STEP),
    'mode': (VolumeMode, VolumeMode.PAPER_SEPARABLE),
    'format': (OutputFormat, OutputFormat.CSV),
    'out': (str, None),
    'workers': (int, 1),
    'log_level': (str, 'WARNING'),
}


def _coerce(key: str, value: Any) -> Any:
    kind, _ = _FIELDS[key]
    if value is None or isinstance(value, kind):
        return value
    try:
        if kind is int and isinstance(value, float) and not value.is_integer():
            raise ValueError(value)
        if kind is int:
            return int(value)
        return kind(value.strip() if isinstance(value, str) else value)
    except (TypeError, ValueError) as error:
        raise ConfigError(f"RunConfig: bad value {value!r} for '{key}'") from error


class RunConfig(SimpleNamespace):
    """Settings of one command-line run. Precedence: defaults < config file < flags."""

    @staticmethod
    def defaults() -> 'RunConfig':
        return RunConfig(**{key: default for key, (_, default) in _FIELDS.items()})

    @staticmethod
    def from_mapping(mapping: Mapping[str, Any], base: 'RunConfig' = None) -> 'RunConfig':
        config = RunConfig(**vars(base or RunConfig.defaults()))
        for key, value in mapping.items():
            key = key.replace('-', '_')
            if key not in _FIELDS:
                raise ConfigError(f"RunConfig: unknown key '{key}'")
            setattr(config, key, _coerce(key, value))
        return config

    @staticmethod
    def parse_json(file_path: str, base: 'RunConfig' = None) -> 'RunConfig':
        try:
            with open(file_path, 'r') as cfg:
                parsed = json.load(cfg, object_hook=lambda d: SimpleNamespace(**d))
        except (OSError, json.JSONDecodeError) as error:
            raise ConfigError(f"RunConfig.parse_json: cannot read {file_path}: {error}") from error
        if not isinstance(parsed, SimpleNamespace):
            raise ConfigError(f"RunConfig.parse_json: {file_path} must hold a JSON object")
        return RunConfig.from_mapping(vars(parsed), base)

    @staticmethod
    def parse_key_value(file_path: str, base: 'RunConfig' = None) -> 'RunConfig':
        """Plain key=value lines; '#' and ';' start comments."""
        parser = ConfigParser(inline_comment_prefixes=('#', ';'))
        try:
            with open(file_path, 'r') as cfg:
                parser.read_string(f"[{SECTION}]\n" + cfg.read(), source=file_path)
        except (OSError, ConfigParserError) as error:
            raise ConfigError(f"RunConfig.parse_key_value: cannot read {file_path}: {error}") from error
        return RunConfig.from_mapping(dict(parser.items(SECTION)), base)

    @staticmethod
    def parse_file(file_path: str, base: 'RunConfig' = None) -> 'RunConfig':
        if os.path.splitext(file_path)[1].lower() == '.json':
            return RunConfig.parse_json(file_path, base)
        return RunConfig.parse_key_value(file_path, base)

    def as_dict(self) -> Dict[str, Any]:
        """JSON-native view, enum members by value."""
        return {key: (str(value) if key in ('structure', 'mode', 'format') else value)
                for key, value in sorted(vars(self).items())}

    def model_spec(self) -> ModelSpec:
        return ModelSpec(self.structure, self.rho)

    def rho_grid(self, structure: CorrelationStructure = None) -> np.ndarray:
        """rho_count points over [rho_min, rho_max]. Without `structure` unset bounds default to
        the union (-1, 1) of the correlated structures; with it the bounds are clipped into its
        admissible interval. Interval ends are inset by RHO_INSET."""
        if structure is None:
            lower = min(admissible_rho_interval(s).lower for s in CORRELATED_STRUCTURES) + RHO_INSET
            upper = max(admissible_rho_interval(s).upper for s in CORRELATED_STRUCTURES) - RHO_INSET
            lower = self.rho_min if self.rho_min is not None else lower
            upper = self.rho_max if self.rho_max is not None else upper
            return np.linspace(lower, upper, self.rho_count)
        interval = admissible_rho_interval(structure)
        lower, upper = interval.lower + RHO_INSET, interval.upper - RHO_INSET
        if self.rho_min is not None:
            lower = max(lower, self.rho_min)
        if self.rho_max is not None:
            upper = min(upper, self.rho_max)
        if not lower < upper:
            raise ConfigError(f"RunConfig: [{self.rho_min}, {self.rho_max}] misses the admissible "
                              f"interval {tuple(interval)} of {structure}")
        logging.getLogger(__name__).debug(f"rho_grid: {structure} sampled over [{lower}, {upper}]")
        return np.linspace(lower, upper, self.rho_count)

    @staticmethod
    def sanity_check_configs(config: 'RunConfig') -> None:
        for req in _FIELDS:
            if not hasattr(config, req):
                raise ConfigError(f"RunConfig: missing '{req}'")
        for key in ('structure', 'mode', 'format'):
            kind, _ = _FIELDS[key]
            if not isinstance(getattr(config, key), kind):
                raise ConfigError(f"RunConfig: '{key}' must be one of {[str(m) for m in kind]}")
        for key in ('rho', 'sigma', 'mu', 'sigma0', 'a1', 'a2', 'tau', 'step'):
            if not math.isfinite(getattr(config, key)):
                raise ConfigError(f"RunConfig: '{key}' must be finite, got {getattr(config, key)}")
        for key in ('sigma', 'sigma0', 'a1', 'a2', 'tau', 'step'):
            if not getattr(config, key) > 0.0:
                raise ConfigError(f"RunConfig: '{key}' must be positive, got {getattr(config, key)}")
        if config.step > config.tau:
            raise ConfigError(f"RunConfig: step {config.step} exceeds the horizon tau={config.tau}")
        if config.rho_count < 2:
            raise ConfigError(f"RunConfig: rho_count must be at least 2, got {config.rho_count}")
        if config.rho_min is not None and config.rho_max is not None and not config.rho_min < config.rho_max:
            raise ConfigError(f"RunConfig: rho_min {config.rho_min} must be below rho_max {config.rho_max}")
        if config.workers < 1:
            raise ConfigError(f"RunConfig: workers must be at least 1, got {config.workers}")
        if str(config.log_level).upper() not in LOG_LEVELS:
            raise ConfigError(f"RunConfig: log_level must be one of {LOG_LEVELS}, got {config.log_level}")
        # raises InadmissibleCorrelationError / DegenerateCovarianceError
        config.model_spec()
        logging.getLogger(__name__).debug(f"sanity_check_configs: {config.as_dict()}")
