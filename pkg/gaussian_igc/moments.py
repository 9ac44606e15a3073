"""Exact Gaussian expectations of polynomials.

The main path applies the differential operator exp[1/2 sum c_hk d_h d_k] to the
polynomial and evaluates at the mean; the series stops after deg/2 passes. An
independent Isserlis (Wick) pairing evaluation is kept as an oracle.
"""
import logging
import math
from dataclasses import dataclass
from itertools import product
from typing import Dict, Iterator, List, Sequence, Tuple, Union

import numpy as np

from .constants import MacroVariable
from .errors import PreconditionError
from .model import ModelSpec, ThetaPoint, correlation_template, effective_theta, inverse_and_determinant

logger = logging.getLogger(__name__)

PRUNE_THRESHOLD = 1e-30
ORACLE_MAX_DEGREE = 6
ORACLE_MAX_VARS = 3

MultiIndex = Tuple[int, ...]


def _pruned(terms: Dict[MultiIndex, float]) -> Dict[MultiIndex, float]:
    return {index: coef for index, coef in terms.items() if abs(coef) >= PRUNE_THRESHOLD}


@dataclass(frozen=True)
class Polynomial:
    """Multivariate polynomial over x_1..x_n with float coefficients.

    `terms` is a sorted tuple of (multi-index, coefficient) pairs; no stored
    coefficient is zero."""
    nvars: int
    terms: Tuple[Tuple[MultiIndex, float], ...] = ()

    @classmethod
    def from_terms(cls, terms: Dict[MultiIndex, float], nvars: int) -> 'Polynomial':
        for index in terms:
            if len(index) != nvars or any(power < 0 for power in index):
                raise PreconditionError(f"Polynomial: bad multi-index {index} for {nvars} variables")
        cleaned = _pruned({tuple(int(p) for p in index): float(coef) for index, coef in terms.items()})
        return cls(nvars, tuple(sorted(cleaned.items())))

    @classmethod
    def constant(cls, value: float, nvars: int) -> 'Polynomial':
        return cls.from_terms({(0,) * nvars: value}, nvars)

    @classmethod
    def variable(cls, i: int, nvars: int) -> 'Polynomial':
        if not 0 <= i < nvars:
            raise PreconditionError(f"Polynomial.variable: index {i} out of range for {nvars} variables")
        index = tuple(1 if j == i else 0 for j in range(nvars))
        return cls.from_terms({index: 1.0}, nvars)

    def as_dict(self) -> Dict[MultiIndex, float]:
        return dict(self.terms)

    @property
    def degree(self) -> int:
        if not self.terms:
            return 0
        return max(sum(index) for index, _ in self.terms)

    def is_zero(self) -> bool:
        return not self.terms

    def _check(self, other: 'Polynomial') -> None:
        if self.nvars != other.nvars:
            raise PreconditionError(f"Polynomial: mismatched nvars {self.nvars} != {other.nvars}")

    def __add__(self, other: Union['Polynomial', float]) -> 'Polynomial':
        if not isinstance(other, Polynomial):
            other = Polynomial.constant(other, self.nvars)
        self._check(other)
        terms = self.as_dict()
        for index, coef in other.terms:
            terms[index] = terms.get(index, 0.0) + coef
        return Polynomial.from_terms(terms, self.nvars)

    __radd__ = __add__

    def __neg__(self) -> 'Polynomial':
        return self.scale(-1.0)

    def __sub__(self, other: Union['Polynomial', float]) -> 'Polynomial':
        return self + (-other)

    def __rsub__(self, other: float) -> 'Polynomial':
        return (-self) + other

    def scale(self, factor: float) -> 'Polynomial':
        return Polynomial.from_terms({index: factor * coef for index, coef in self.terms}, self.nvars)

    def __mul__(self, other: Union['Polynomial', float]) -> 'Polynomial':
        if not isinstance(other, Polynomial):
            return self.scale(float(other))
        self._check(other)
        terms: Dict[MultiIndex, float] = {}
        for left, a in self.terms:
            for right, b in other.terms:
                index = tuple(p + q for p, q in zip(left, right))
                terms[index] = terms.get(index, 0.0) + a * b
        return Polynomial.from_terms(terms, self.nvars)

    __rmul__ = __mul__

    def __pow__(self, exponent: int) -> 'Polynomial':
        if exponent < 0:
            raise PreconditionError("Polynomial: negative powers are not polynomials")
        result = Polynomial.constant(1.0, self.nvars)
        for _ in range(exponent):
            result = result * self
        return result

    def derivative(self, i: int) -> 'Polynomial':
        terms: Dict[MultiIndex, float] = {}
        for index, coef in self.terms:
            if index[i] == 0:
                continue
            lowered = index[:i] + (index[i] - 1,) + index[i + 1:]
            terms[lowered] = terms.get(lowered, 0.0) + coef * index[i]
        return Polynomial.from_terms(terms, self.nvars)

    def evaluate(self, x: Sequence[float]) -> float:
        x = np.asarray(x, dtype=float).reshape(self.nvars)
        total = 0.0
        for index, coef in self.terms:
            total += coef * float(np.prod([x[j] ** p for j, p in enumerate(index)]))
        return total

    def shift(self, offset: Sequence[float]) -> 'Polynomial':
        """The polynomial y -> f(y + offset)."""
        offset = np.asarray(offset, dtype=float).reshape(self.nvars)
        terms: Dict[MultiIndex, float] = {}
        for index, coef in self.terms:
            for lowered in product(*(range(p + 1) for p in index)):
                factor = coef
                for j, (p, k) in enumerate(zip(index, lowered)):
                    factor *= math.comb(p, k) * offset[j] ** (p - k)
                terms[lowered] = terms.get(lowered, 0.0) + factor
        return Polynomial.from_terms(terms, self.nvars)

    def isclose(self, other: 'Polynomial', rel_tol: float = 1e-12, abs_tol: float = 1e-12) -> bool:
        self._check(other)
        mine, theirs = self.as_dict(), other.as_dict()
        return all(math.isclose(mine.get(index, 0.0), theirs.get(index, 0.0), rel_tol=rel_tol, abs_tol=abs_tol)
                   for index in set(mine) | set(theirs))


def poly_arith(a: Polynomial, b: Polynomial, op: str) -> Polynomial:
    if op == 'add':
        return a + b
    if op == 'mul':
        return a * b
    raise PreconditionError(f"poly_arith: unsupported op {op!r}")


def second_derivative_operator(f: Polynomial, covariance: np.ndarray) -> Polynomial:
    """One application of sum_hk c_hk d_h d_k."""
    result = Polynomial(f.nvars)
    for h in range(f.nvars):
        first = f.derivative(h)
        if first.is_zero():
            continue
        for k in range(f.nvars):
            if covariance[h, k] != 0.0:
                result = result + first.derivative(k).scale(covariance[h, k])
    return result


def _validate(f: Polynomial, mu, covariance) -> Tuple[np.ndarray, np.ndarray]:
    mu = np.atleast_1d(np.asarray(mu, dtype=float))
    covariance = np.atleast_2d(np.asarray(covariance, dtype=float))
    if mu.shape != (f.nvars,) or covariance.shape != (f.nvars, f.nvars):
        raise PreconditionError(
            f"expected mean of shape ({f.nvars},) and covariance ({f.nvars}, {f.nvars}), "
            f"got {mu.shape} and {covariance.shape}")
    return mu, covariance


def gaussian_expectation(f: Polynomial, mu, covariance) -> float:
    mu, covariance = _validate(f, mu, covariance)
    total = f.evaluate(mu)
    term = f
    for k in range(1, f.degree // 2 + 1):
        # (1/2)^k / k! accumulated one pass at a time
        term = second_derivative_operator(term, covariance).scale(0.5 / k)
        if term.is_zero():
            break
        total += term.evaluate(mu)
    return total


def pair_partitions(elements: List[int]) -> Iterator[List[Tuple[int, int]]]:
    """Iterate over all partitions of a list into pairs."""
    if not elements:
        yield []
        return
    pivot = elements[0]
    for i in range(1, len(elements)):
        partner = elements[i]
        remaining = elements[1:i] + elements[i + 1:]
        for rest in pair_partitions(remaining):
            yield [(pivot, partner)] + rest


def central_moment(index: MultiIndex, covariance: np.ndarray) -> float:
    """E[prod y_j^index_j] for y ~ N(0, covariance), by enumerating pairings."""
    labels = [j for j, power in enumerate(index) for _ in range(power)]
    if len(labels) % 2:
        return 0.0
    return sum(math.prod(covariance[a, b] for a, b in pairing) for pairing in pair_partitions(labels))


def isserlis_oracle(f: Polynomial, mu, covariance) -> float:
    mu, covariance = _validate(f, mu, covariance)
    if f.degree > ORACLE_MAX_DEGREE or f.nvars > ORACLE_MAX_VARS:
        raise PreconditionError(
            f"isserlis_oracle: supports degree <= {ORACLE_MAX_DEGREE} and n <= {ORACLE_MAX_VARS}, "
            f"got degree {f.degree} with n={f.nvars}")
    centred = f.shift(mu)
    return sum(coef * central_moment(index, covariance) for index, coef in centred.terms)


def _macro_variable(spec: ModelSpec, i: Union[int, MacroVariable]) -> MacroVariable:
    variables = spec.macro_variables
    if isinstance(i, MacroVariable):
        if i not in variables:
            raise PreconditionError(f"score_polynomial: {i} is not a macro-variable of {spec.structure}")
        return i
    if isinstance(i, (int, np.integer)) and 0 <= i < len(variables):
        return variables[int(i)]
    raise PreconditionError(f"score_polynomial: index {i!r} out of range for {spec.structure}")


def score_polynomial(spec: ModelSpec, theta: ThetaPoint, i: Union[int, MacroVariable]) -> Polynomial:
    """d/d(theta_i) log p(x | theta) as a polynomial in x (degree <= 2)."""
    variable = _macro_variable(spec, i)
    point = effective_theta(spec, theta)
    n, sigma = spec.n, point.sigma
    precision, _ = inverse_and_determinant(correlation_template(spec.structure, spec.rho))
    centred = [Polynomial.variable(j, n) - point.mu for j in range(n)]
    if variable is MacroVariable.MU:
        weights = precision.sum(axis=1)
        score = Polynomial(n)
        for j in range(n):
            score = score + centred[j].scale(weights[j] / sigma ** 2)
        return score
    quadratic = Polynomial(n)
    for j in range(n):
        for k in range(n):
            if precision[j, k] != 0.0:
                quadratic = quadratic + (centred[j] * centred[k]).scale(precision[j, k])
    return quadratic.scale(1.0 / sigma ** 3) - n / sigma
