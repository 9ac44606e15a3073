import csv
import io

import numpy as np

from gaussian_igc.constants import CORRELATED_STRUCTURES, CorrelationStructure, MONOVARIATE_STRUCTURES
from gaussian_igc.model import admissible_rho_interval

SIGMAS = (0.5, 1.0, 2.0, 5.0)
TWO_MACRO_STRUCTURES = (CorrelationStructure.MONO3,) + CORRELATED_STRUCTURES

# g = diag(alpha, beta) / sigma**2
PROFILES = {
    CorrelationStructure.MONO3: lambda rho: (1.0, 2.0),
    CorrelationStructure.BIVARIATE_STRONG: lambda rho: (2.0 / (1.0 + rho), 4.0),
    CorrelationStructure.TRIVARIATE_WEAK: lambda rho: ((3.0 + rho) / (1.0 + rho), 6.0),
    CorrelationStructure.TRIVARIATE_MILDLY_WEAK: lambda rho: ((3.0 - 4.0 * rho) / (1.0 - 2.0 * rho ** 2), 6.0),
    CorrelationStructure.TRIVARIATE_STRONG: lambda rho: (3.0 / (1.0 + 2.0 * rho), 6.0),
}


def rho_samples(structure, count=9, margin=0.05):
    """`count` admissible rho values, including 0, kept `margin` away from the endpoints."""
    if structure in MONOVARIATE_STRUCTURES:
        return [0.0]
    lower, upper = admissible_rho_interval(structure)
    values = set(np.linspace(lower + margin, upper - margin, count - 1).round(12).tolist())
    return sorted(values | {0.0})


def spec_grid(structures=tuple(CorrelationStructure), count=9):
    return [(structure, rho) for structure in structures for rho in rho_samples(structure, count)]


def read_csv(text):
    """(rows as dicts, footer as dict) of a table written by CsvOutputAdapter."""
    lines = text.splitlines()
    footer = dict(line[2:].split(',', 1) for line in lines if line.startswith('# '))
    body = [line for line in lines if not line.startswith('#')]
    return list(csv.DictReader(io.StringIO('\n'.join(body)))), footer
