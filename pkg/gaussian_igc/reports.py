"""Immutable result values and their plain-dict form.

`to_dict` produces only JSON-native values (str, float, int, None, lists, dicts);
`from_dict` inverts it exactly, so parse(emit(report)) == report.
"""
import json
from dataclasses import dataclass, field
from typing import Any, Dict, Optional, Tuple

from .constants import CorrelationStructure, Growth, VolumeMode

Pairs = Tuple[Tuple[float, float], ...]


def _pairs(values) -> Pairs:
    return tuple((float(a), float(b)) for a, b in values)


def _optional_pair(value) -> Optional[Tuple[float, float]]:
    return None if value is None else (float(value[0]), float(value[1]))


@dataclass(frozen=True)
class Discrepancy:
    """A published closed-form constant next to the value this toolkit derives.

    `printed` is None when the published statement is qualitative; `agrees` then says
    whether the derived value bears it out."""
    quantity: str
    printed: Optional[float]
    derived: float
    agrees: bool
    note: str = ''

    def to_dict(self) -> Dict[str, Any]:
        return {'quantity': self.quantity, 'printed': self.printed, 'derived': self.derived,
                'agrees': self.agrees, 'note': self.note}

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'Discrepancy':
        printed = data['printed']
        return cls(data['quantity'], None if printed is None else float(printed), float(data['derived']),
                   bool(data['agrees']), data.get('note', ''))


@dataclass(frozen=True)
class ComplexityReport:
    structure: CorrelationStructure
    rho: float
    mode: VolumeMode
    volumes: Pairs
    igc: Pairs
    asymptotic_coefficient: float
    decay_rate: Optional[float]
    growth: Growth
    tail_exponent: float
    discrepancies: Tuple[Discrepancy, ...] = ()

    def to_dict(self) -> Dict[str, Any]:
        return {
            'structure': str(self.structure),
            'rho': self.rho,
            'mode': str(self.mode),
            'volumes': [list(pair) for pair in self.volumes],
            'igc': [list(pair) for pair in self.igc],
            'asymptotic_coefficient': self.asymptotic_coefficient,
            'decay_rate': self.decay_rate,
            'growth': str(self.growth),
            'tail_exponent': self.tail_exponent,
            'discrepancies': [d.to_dict() for d in self.discrepancies],
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'ComplexityReport':
        decay_rate = data.get('decay_rate')
        return cls(
            structure=CorrelationStructure(data['structure']),
            rho=float(data['rho']),
            mode=VolumeMode(data['mode']),
            volumes=_pairs(data['volumes']),
            igc=_pairs(data['igc']),
            asymptotic_coefficient=float(data['asymptotic_coefficient']),
            decay_rate=None if decay_rate is None else float(decay_rate),
            growth=Growth(data['growth']),
            tail_exponent=float(data['tail_exponent']),
            discrepancies=tuple(Discrepancy.from_dict(d) for d in data.get('discrepancies', ())),
        )


@dataclass(frozen=True)
class RatioCurve:
    """R(rho) = c(rho) / c(0) sampled on a rho grid; `samples` are fitted, `closed_form` printed."""
    structure: CorrelationStructure
    samples: Pairs
    closed_form: Pairs = ()
    peak: Optional[Tuple[float, float]] = None

    def to_dict(self) -> Dict[str, Any]:
        return {
            'structure': str(self.structure),
            'samples': [list(pair) for pair in self.samples],
            'closed_form': [list(pair) for pair in self.closed_form],
            'peak': None if self.peak is None else list(self.peak),
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'RatioCurve':
        return cls(CorrelationStructure(data['structure']), _pairs(data['samples']),
                   _pairs(data.get('closed_form', ())), _optional_pair(data.get('peak')))


@dataclass(frozen=True)
class JacobiSolution:
    curvature: float
    samples: Pairs
    initial: Tuple[float, float] = (1.0, 0.0)
    growth: Growth = Growth.BOUNDED

    def to_dict(self) -> Dict[str, Any]:
        return {'curvature': self.curvature, 'samples': [list(pair) for pair in self.samples],
                'initial': list(self.initial), 'growth': str(self.growth)}

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'JacobiSolution':
        return cls(float(data['curvature']), _pairs(data['samples']),
                   _optional_pair(data['initial']), Growth(data['growth']))


@dataclass(frozen=True)
class ToolkitReport:
    """Everything `report` emits: the configured model plus the four ratio curves."""
    complexity: ComplexityReport
    ratio_curves: Tuple[RatioCurve, ...] = ()
    amplification: Pairs = ()
    discrepancies: Tuple[Discrepancy, ...] = ()
    settings: Tuple[Tuple[str, Any], ...] = field(default=())

    def to_dict(self) -> Dict[str, Any]:
        return {
            'complexity': self.complexity.to_dict(),
            'ratio_curves': [curve.to_dict() for curve in self.ratio_curves],
            'peaks': {str(curve.structure): None if curve.peak is None else list(curve.peak)
                      for curve in self.ratio_curves},
            'amplification': [list(pair) for pair in self.amplification],
            'discrepancies': [d.to_dict() for d in self.discrepancies],
            'settings': {key: value for key, value in self.settings},
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'ToolkitReport':
        return cls(
            complexity=ComplexityReport.from_dict(data['complexity']),
            ratio_curves=tuple(RatioCurve.from_dict(curve) for curve in data.get('ratio_curves', ())),
            amplification=_pairs(data.get('amplification', ())),
            discrepancies=tuple(Discrepancy.from_dict(d) for d in data.get('discrepancies', ())),
            settings=tuple(sorted(data.get('settings', {}).items())),
        )


def emit(report) -> str:
    """Sorted keys and shortest round-trip floats, so equal reports give identical text."""
    return json.dumps(report.to_dict(), sort_keys=True, indent=2, allow_nan=False) + '\n'


def parse(text: str, kind: type = ToolkitReport):
    return kind.from_dict(json.loads(text))
