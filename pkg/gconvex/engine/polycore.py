"""Exact sparse multivariate polynomials, rational-function expressions and the expression parser"""
import math
import re
from fractions import Fraction
from functools import reduce
from typing import Dict, Iterator, List, Optional, Sequence, Tuple, Union

import numpy as np

from gconvex.exceptions import (
    ExpressionSyntaxError,
    IndexOutOfRange,
    NonPolynomial,
    PoleAtPoint,
    UnknownVariable,
)
from gconvex.utils import format_rational

Exponent = Tuple[int, ...]
Scalar = Union[int, Fraction]


def _grlex_key(exponent: Exponent) -> Tuple[int, Exponent]:
    return (sum(exponent), exponent)


# ============================================================================
# POLYNOMIAL
# ============================================================================

class Polynomial:
    """
    Immutable polynomial in ``nvars`` variables with Fraction coefficients

    Terms map dense exponent tuples to nonzero coefficients; the zero
    polynomial has no terms.
    """

    __slots__ = ("nvars", "_terms", "_hash")

    def __init__(self, nvars: int, terms: Optional[Dict[Exponent, Scalar]] = None):
        clean: Dict[Exponent, Fraction] = {}
        for exponent, coeff in (terms or {}).items():
            exponent = tuple(int(e) for e in exponent)
            if len(exponent) != nvars or any(e < 0 for e in exponent):
                raise ValueError(f"Bad exponent {exponent} for {nvars} variables")
            coeff = Fraction(coeff)
            if coeff:
                clean[exponent] = clean.get(exponent, Fraction(0)) + coeff
                if not clean[exponent]:
                    del clean[exponent]
        self.nvars = nvars
        self._terms = clean
        self._hash = None

    @classmethod
    def _from_clean(cls, nvars: int, terms: Dict[Exponent, Fraction]) -> "Polynomial":
        poly = cls.__new__(cls)
        poly.nvars = nvars
        poly._terms = terms
        poly._hash = None
        return poly

    @classmethod
    def zero(cls, nvars: int) -> "Polynomial":
        return cls._from_clean(nvars, {})

    @classmethod
    def constant(cls, nvars: int, value: Scalar) -> "Polynomial":
        value = Fraction(value)
        if not value:
            return cls.zero(nvars)
        return cls._from_clean(nvars, {(0,) * nvars: value})

    @classmethod
    def variable(cls, nvars: int, index: int) -> "Polynomial":
        if not 0 <= index < nvars:
            raise IndexOutOfRange(f"Variable index {index} out of range for {nvars} variables")
        exponent = tuple(1 if i == index else 0 for i in range(nvars))
        return cls._from_clean(nvars, {exponent: Fraction(1)})

    @classmethod
    def from_coefficients(cls, coefficients: Sequence[Scalar]) -> "Polynomial":
        """Univariate polynomial from coefficients listed from degree 0 upwards"""
        return cls(1, {(k,): c for k, c in enumerate(coefficients) if c})

    # ------------------------------------------------------------------
    # Inspection
    # ------------------------------------------------------------------

    @property
    def terms(self) -> Dict[Exponent, Fraction]:
        return dict(self._terms)

    def items(self) -> Iterator[Tuple[Exponent, Fraction]]:
        return iter(self._terms.items())

    def sorted_terms(self) -> List[Tuple[Exponent, Fraction]]:
        """Terms in graded-lexicographic order, highest first"""
        return sorted(self._terms.items(), key=lambda t: _grlex_key(t[0]), reverse=True)

    def __len__(self) -> int:
        return len(self._terms)

    def is_zero(self) -> bool:
        return not self._terms

    def is_constant(self) -> bool:
        return all(not any(e) for e in self._terms)

    @property
    def constant_term(self) -> Fraction:
        return self._terms.get((0,) * self.nvars, Fraction(0))

    def total_degree(self) -> int:
        """Total degree; -1 for the zero polynomial"""
        if not self._terms:
            return -1
        return max(sum(e) for e in self._terms)

    def degree_in(self, index: int) -> int:
        if not self._terms:
            return -1
        return max(e[index] for e in self._terms)

    def variables(self) -> List[int]:
        """Indices of variables that occur with positive exponent"""
        used = set()
        for exponent in self._terms:
            used.update(i for i, e in enumerate(exponent) if e)
        return sorted(used)

    def leading_term(self) -> Tuple[Exponent, Fraction]:
        exponent = max(self._terms, key=_grlex_key)
        return exponent, self._terms[exponent]

    def leading_coefficient(self) -> Fraction:
        return self.leading_term()[1]

    # ------------------------------------------------------------------
    # Arithmetic
    # ------------------------------------------------------------------

    def _coerce(self, other) -> "Polynomial":
        if isinstance(other, Polynomial):
            if other.nvars != self.nvars:
                raise ValueError(f"Variable count mismatch: {self.nvars} vs {other.nvars}")
            return other
        if isinstance(other, (int, Fraction)):
            return Polynomial.constant(self.nvars, other)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        terms = dict(self._terms)
        for exponent, coeff in other._terms.items():
            value = terms.get(exponent, 0) + coeff
            if value:
                terms[exponent] = value
            else:
                terms.pop(exponent, None)
        return Polynomial._from_clean(self.nvars, terms)

    __radd__ = __add__

    def __neg__(self) -> "Polynomial":
        return Polynomial._from_clean(self.nvars, {e: -c for e, c in self._terms.items()})

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return other + (-self)

    def __mul__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        terms: Dict[Exponent, Fraction] = {}
        for e1, c1 in self._terms.items():
            for e2, c2 in other._terms.items():
                exponent = tuple(a + b for a, b in zip(e1, e2))
                value = terms.get(exponent, 0) + c1 * c2
                if value:
                    terms[exponent] = value
                else:
                    terms.pop(exponent, None)
        return Polynomial._from_clean(self.nvars, terms)

    __rmul__ = __mul__

    def __pow__(self, power: int) -> "Polynomial":
        if not isinstance(power, int) or power < 0:
            raise NonPolynomial(f"Exponent must be a non-negative integer, got {power!r}")
        result = Polynomial.constant(self.nvars, 1)
        base = self
        while power:
            if power & 1:
                result = result * base
            power >>= 1
            if power:
                base = base * base
        return result

    def scale(self, factor: Scalar) -> "Polynomial":
        factor = Fraction(factor)
        if not factor:
            return Polynomial.zero(self.nvars)
        return Polynomial._from_clean(self.nvars, {e: c * factor for e, c in self._terms.items()})

    def __eq__(self, other) -> bool:
        if isinstance(other, (int, Fraction)):
            other = Polynomial.constant(self.nvars, other)
        if not isinstance(other, Polynomial):
            return NotImplemented
        return self.nvars == other.nvars and self._terms == other._terms

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash((self.nvars, frozenset(self._terms.items())))
        return self._hash

    # ------------------------------------------------------------------
    # Calculus and evaluation
    # ------------------------------------------------------------------

    def partial(self, index: int) -> "Polynomial":
        """Exact partial derivative with respect to variable ``index``"""
        if not 0 <= index < self.nvars:
            raise IndexOutOfRange(f"Variable index {index} out of range for {self.nvars} variables")
        terms = {}
        for exponent, coeff in self._terms.items():
            k = exponent[index]
            if k:
                lowered = exponent[:index] + (k - 1,) + exponent[index + 1:]
                terms[lowered] = coeff * k
        return Polynomial._from_clean(self.nvars, terms)

    def evaluate(self, point: Sequence[Scalar]) -> Fraction:
        """Exact value at a rational point"""
        if len(point) != self.nvars:
            raise ValueError(f"Point has {len(point)} coordinates, expected {self.nvars}")
        point = [Fraction(p) for p in point]
        total = Fraction(0)
        for exponent, coeff in self._terms.items():
            term = coeff
            for value, k in zip(point, exponent):
                if k:
                    term *= value ** k
            total += term
        return total

    def evaluate_float(self, point: Sequence[float]) -> float:
        total = 0.0
        for exponent, coeff in self._terms.items():
            term = float(coeff)
            for value, k in zip(point, exponent):
                if k:
                    term *= float(value) ** k
            total += term
        return total

    def compose(self, substitutions: Sequence["Polynomial"]) -> "Polynomial":
        """Substitute polynomial ``substitutions[i]`` for variable i"""
        if len(substitutions) != self.nvars:
            raise ValueError("One substitution per variable is required")
        target = substitutions[0].nvars if substitutions else 0
        result = Polynomial.zero(target)
        powers: Dict[Tuple[int, int], Polynomial] = {}
        for exponent, coeff in self._terms.items():
            term = Polynomial.constant(target, coeff)
            for i, k in enumerate(exponent):
                if k:
                    if (i, k) not in powers:
                        powers[(i, k)] = substitutions[i] ** k
                    term = term * powers[(i, k)]
            result = result + term
        return result

    def shift(self, offsets: Sequence[Scalar]) -> "Polynomial":
        """The polynomial x ↦ f(x + offsets)"""
        subs = [Polynomial.variable(self.nvars, i) + Fraction(offsets[i]) for i in range(self.nvars)]
        return self.compose(subs)

    # ------------------------------------------------------------------
    # Univariate helpers
    # ------------------------------------------------------------------

    def univariate_coefficients(self) -> List[Fraction]:
        """Dense coefficients from degree 0 upwards; requires nvars == 1"""
        if self.nvars != 1:
            raise ValueError("Polynomial is not in one variable")
        if not self._terms:
            return []
        coeffs = [Fraction(0)] * (self.total_degree() + 1)
        for (k,), c in self._terms.items():
            coeffs[k] = c
        return coeffs

    def restrict_to(self, indices: Sequence[int]) -> "Polynomial":
        """Re-express a polynomial that only uses ``indices`` in len(indices) variables"""
        terms = {}
        for exponent, coeff in self._terms.items():
            if any(exponent[i] for i in range(self.nvars) if i not in indices):
                raise ValueError("Polynomial uses variables outside the restriction")
            terms[tuple(exponent[i] for i in indices)] = coeff
        return Polynomial._from_clean(len(indices), terms)

    # ------------------------------------------------------------------
    # Rendering
    # ------------------------------------------------------------------

    def to_text(self, names: Optional[Sequence[str]] = None) -> str:
        """Canonical text with ``^`` exponents and explicit ``*``"""
        names = list(names) if names else default_names(self.nvars)
        if not self._terms:
            return "0"
        pieces = []
        for exponent, coeff in self.sorted_terms():
            factors = [
                name if k == 1 else f"{name}^{k}"
                for name, k in zip(names, exponent) if k
            ]
            monomial = "*".join(factors)
            magnitude = abs(coeff)
            if not monomial:
                body = format_rational(magnitude)
            elif magnitude == 1:
                body = monomial
            else:
                body = f"{format_rational(magnitude)}*{monomial}"
            if not pieces:
                pieces.append(f"-{body}" if coeff < 0 else body)
            else:
                pieces.append(f" - {body}" if coeff < 0 else f" + {body}")
        return "".join(pieces)

    def __str__(self) -> str:
        return self.to_text()

    def __repr__(self) -> str:
        return f"Polynomial({self.nvars}, {self.to_text()!r})"


def default_names(nvars: int) -> List[str]:
    return [f"x{i + 1}" for i in range(nvars)]


def gradient(f: Polynomial) -> List[Polynomial]:
    return [f.partial(i) for i in range(f.nvars)]


def euclidean_hessian(f: Polynomial) -> List[List[Polynomial]]:
    grad = gradient(f)
    hessian = [[None] * f.nvars for _ in range(f.nvars)]
    for i in range(f.nvars):
        for j in range(i, f.nvars):
            hessian[i][j] = hessian[j][i] = grad[i].partial(j)
    return hessian


def partial_derivative(f: Polynomial, index: int) -> Polynomial:
    return f.partial(index)


# ============================================================================
# EXACT DIVISION AND GCD
# ============================================================================

def exact_divide(a: Polynomial, b: Polynomial) -> Polynomial:
    """
    Quotient a / b when b divides a exactly

    Raises:
        ArithmeticError: If the division leaves a remainder
    """
    if b.is_zero():
        raise ZeroDivisionError("Division by the zero polynomial")
    if b.is_constant():
        return a.scale(1 / b.constant_term)
    lead_exp, lead_coeff = b.leading_term()
    quotient: Dict[Exponent, Fraction] = {}
    remainder = a
    while not remainder.is_zero():
        r_exp, r_coeff = remainder.leading_term()
        shift = tuple(x - y for x, y in zip(r_exp, lead_exp))
        if any(s < 0 for s in shift):
            raise ArithmeticError("Polynomial division is not exact")
        factor = r_coeff / lead_coeff
        quotient[shift] = factor
        remainder = remainder - Polynomial._from_clean(a.nvars, {shift: factor}) * b
    return Polynomial._from_clean(a.nvars, quotient)


def _monic(p: Polynomial) -> Polynomial:
    if p.is_zero():
        return p
    return p.scale(1 / p.leading_coefficient())


def _coefficients_in(p: Polynomial, v: int) -> Dict[int, Polynomial]:
    buckets: Dict[int, Dict[Exponent, Fraction]] = {}
    for exponent, coeff in p.items():
        k = exponent[v]
        stripped = exponent[:v] + (0,) + exponent[v + 1:]
        buckets.setdefault(k, {})[stripped] = coeff
    return {k: Polynomial._from_clean(p.nvars, t) for k, t in buckets.items()}


def _content_in(p: Polynomial, v: int) -> Polynomial:
    content = Polynomial.zero(p.nvars)
    for coeff in _coefficients_in(p, v).values():
        content = polynomial_gcd(content, coeff)
        if content.is_constant():
            return Polynomial.constant(p.nvars, 1)
    return content


def _primitive_in(p: Polynomial, v: int) -> Polynomial:
    return _monic(exact_divide(p, _content_in(p, v)))


def _pseudo_remainder(a: Polynomial, b: Polynomial, v: int) -> Polynomial:
    db = b.degree_in(v)
    lead_b = _coefficients_in(b, v)[db]
    x_v = Polynomial.variable(a.nvars, v)
    r = a
    while not r.is_zero():
        dr = r.degree_in(v)
        if dr < db:
            break
        lead_r = _coefficients_in(r, v)[dr]
        r = lead_b * r - lead_r * (x_v ** (dr - db)) * b
    return r


def _dense_gcd(a: List[Fraction], b: List[Fraction]) -> List[Fraction]:
    a, b = _trim(list(a)), _trim(list(b))
    while b:
        a, b = b, _dense_rem(a, b)
    if not a:
        return a
    lead = a[-1]
    return [c / lead for c in a]


def _trim(coeffs: List[Fraction]) -> List[Fraction]:
    while coeffs and not coeffs[-1]:
        coeffs.pop()
    return coeffs


def _dense_rem(a: List[Fraction], b: List[Fraction]) -> List[Fraction]:
    a = list(a)
    lead = b[-1]
    while len(a) >= len(b) and a:
        factor = a[-1] / lead
        shift = len(a) - len(b)
        for i, c in enumerate(b):
            a[shift + i] -= factor * c
        a.pop()
        _trim(a)
    return a


def polynomial_gcd(a: Polynomial, b: Polynomial) -> Polynomial:
    """
    Greatest common divisor over Q, normalized to leading coefficient 1

    Univariate inputs use Euclid on dense coefficient lists; otherwise the
    recursion splits off the content in the largest variable and runs a
    primitive pseudo-remainder sequence on the primitive parts.
    """
    if a.is_zero():
        return _monic(b)
    if b.is_zero():
        return _monic(a)
    if a.is_constant() or b.is_constant():
        return Polynomial.constant(a.nvars, 1)

    used_a, used_b = set(a.variables()), set(b.variables())
    used = used_a | used_b
    if len(used) == 1:
        (v,) = used
        coeffs = _dense_gcd(_dense_in(a, v), _dense_in(b, v))
        return Polynomial._from_clean(
            a.nvars,
            {tuple(k if i == v else 0 for i in range(a.nvars)): c for k, c in enumerate(coeffs) if c},
        )

    v = max(used)
    if v not in used_a:
        return polynomial_gcd(a, _content_in(b, v))
    if v not in used_b:
        return polynomial_gcd(_content_in(a, v), b)

    content_a, content_b = _content_in(a, v), _content_in(b, v)
    prim_a = _monic(exact_divide(a, content_a))
    prim_b = _monic(exact_divide(b, content_b))
    content = polynomial_gcd(content_a, content_b)
    if prim_a.degree_in(v) < prim_b.degree_in(v):
        prim_a, prim_b = prim_b, prim_a

    while True:
        r = _pseudo_remainder(prim_a, prim_b, v)
        if r.is_zero():
            g = prim_b
            break
        if r.degree_in(v) == 0:
            g = Polynomial.constant(a.nvars, 1)
            break
        prim_a, prim_b = prim_b, _primitive_in(r, v)

    if not g.is_constant():
        g = _primitive_in(g, v)
    return _monic(content * g)


def _dense_in(p: Polynomial, v: int) -> List[Fraction]:
    coeffs = [Fraction(0)] * (p.degree_in(v) + 1)
    for exponent, c in p.items():
        coeffs[exponent[v]] = c
    return coeffs


def _integer_normalizer(p: Polynomial) -> Fraction:
    """Factor s such that s·p has coprime integer coefficients and positive leading coefficient"""
    coeffs = [c for _, c in p.items()]
    denominator_lcm = reduce(lambda x, y: x * y // math.gcd(x, y), (c.denominator for c in coeffs), 1)
    numerator_gcd = reduce(math.gcd, (abs(c.numerator) * (denominator_lcm // c.denominator) for c in coeffs), 0)
    factor = Fraction(denominator_lcm, numerator_gcd)
    return factor if p.leading_coefficient() > 0 else -factor


# ============================================================================
# RATIONAL EXPRESSIONS
# ============================================================================

class RatExpr:
    """
    Quotient of polynomials kept in canonical form

    The numerator and denominator are coprime and the denominator has
    coprime integer coefficients with a positive leading coefficient, so
    two expressions are equal iff their stored parts are equal.
    """

    __slots__ = ("numerator", "denominator", "_hash")

    def __init__(self, numerator: Polynomial, denominator: Optional[Polynomial] = None):
        if denominator is None:
            denominator = Polynomial.constant(numerator.nvars, 1)
        if denominator.nvars != numerator.nvars:
            raise ValueError("Numerator and denominator variable counts differ")
        self.numerator, self.denominator = _canonical_pair(numerator, denominator)
        self._hash = None

    @classmethod
    def _raw(cls, numerator: Polynomial, denominator: Polynomial) -> "RatExpr":
        expr = cls.__new__(cls)
        expr.numerator = numerator
        expr.denominator = denominator
        expr._hash = None
        return expr

    @classmethod
    def constant(cls, nvars: int, value: Scalar) -> "RatExpr":
        return cls._raw(Polynomial.constant(nvars, value), Polynomial.constant(nvars, 1))

    @classmethod
    def zero(cls, nvars: int) -> "RatExpr":
        return cls.constant(nvars, 0)

    @property
    def nvars(self) -> int:
        return self.numerator.nvars

    def is_zero(self) -> bool:
        return self.numerator.is_zero()

    def is_constant(self) -> bool:
        return self.numerator.is_constant() and self.denominator.is_constant()

    def is_polynomial(self) -> bool:
        return self.denominator.is_constant()

    def constant_value(self) -> Fraction:
        if not self.is_constant():
            raise ValueError("Expression is not constant")
        return self.numerator.constant_term / self.denominator.constant_term

    def _coerce(self, other) -> "RatExpr":
        if isinstance(other, RatExpr):
            return other
        if isinstance(other, Polynomial):
            return RatExpr._raw(other, Polynomial.constant(other.nvars, 1))
        if isinstance(other, (int, Fraction)):
            return RatExpr.constant(self.nvars, other)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        if other.is_zero():
            return self
        if self.is_zero():
            return other
        if self.denominator == other.denominator:
            return RatExpr(self.numerator + other.numerator, self.denominator)
        return RatExpr(
            self.numerator * other.denominator + other.numerator * self.denominator,
            self.denominator * other.denominator,
        )

    __radd__ = __add__

    def __neg__(self) -> "RatExpr":
        return RatExpr._raw(-self.numerator, self.denominator)

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return other + (-self)

    def __mul__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        if self.is_zero() or other.is_zero():
            return RatExpr.zero(self.nvars)
        if other.is_constant():
            return RatExpr._raw(self.numerator.scale(other.constant_value()), self.denominator)
        if self.is_constant():
            return RatExpr._raw(other.numerator.scale(self.constant_value()), other.denominator)
        return RatExpr(self.numerator * other.numerator, self.denominator * other.denominator)

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        if other.is_zero():
            raise ZeroDivisionError("Division by a zero expression")
        return RatExpr(self.numerator * other.denominator, self.denominator * other.numerator)

    def __rtruediv__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return other / self

    def __pow__(self, power: int) -> "RatExpr":
        if not isinstance(power, int) or power < 0:
            raise NonPolynomial(f"Exponent must be a non-negative integer, got {power!r}")
        return RatExpr._raw(self.numerator ** power, self.denominator ** power)

    def __eq__(self, other) -> bool:
        if isinstance(other, (int, Fraction, Polynomial)):
            other = self._coerce(other)
        if not isinstance(other, RatExpr):
            return NotImplemented
        return self.numerator == other.numerator and self.denominator == other.denominator

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash((self.numerator, self.denominator))
        return self._hash

    def partial(self, index: int) -> "RatExpr":
        """Quotient rule derivative"""
        dn = self.numerator.partial(index)
        if self.denominator.is_constant():
            return RatExpr._raw(dn, self.denominator)
        dd = self.denominator.partial(index)
        return RatExpr(dn * self.denominator - self.numerator * dd, self.denominator * self.denominator)

    def evaluate(self, point: Sequence[Scalar]) -> Fraction:
        denominator = self.denominator.evaluate(point)
        if not denominator:
            raise PoleAtPoint(f"Denominator {self.denominator} vanishes at {list(map(str, point))}")
        return self.numerator.evaluate(point) / denominator

    def evaluate_float(self, point: Sequence[float]) -> float:
        denominator = self.denominator.evaluate_float(point)
        if denominator == 0.0:
            raise PoleAtPoint(f"Denominator {self.denominator} vanishes at {list(point)}")
        return self.numerator.evaluate_float(point) / denominator

    def to_text(self, names: Optional[Sequence[str]] = None) -> str:
        numerator = self.numerator.to_text(names)
        if self.denominator == Polynomial.constant(self.nvars, 1):
            return numerator
        if len(self.numerator) > 1:
            numerator = f"({numerator})"
        return f"{numerator}/({self.denominator.to_text(names)})"

    def __str__(self) -> str:
        return self.to_text()

    def __repr__(self) -> str:
        return f"RatExpr({self.to_text()!r})"


def _canonical_pair(numerator: Polynomial, denominator: Polynomial) -> Tuple[Polynomial, Polynomial]:
    if denominator.is_zero():
        raise ZeroDivisionError("Zero denominator")
    one = Polynomial.constant(numerator.nvars, 1)
    if numerator.is_zero():
        return numerator, one
    if denominator.is_constant():
        return numerator.scale(1 / denominator.constant_term), one
    g = polynomial_gcd(numerator, denominator)
    if not g.is_constant():
        numerator = exact_divide(numerator, g)
        denominator = exact_divide(denominator, g)
        if denominator.is_constant():
            return numerator.scale(1 / denominator.constant_term), one
    factor = _integer_normalizer(denominator)
    return numerator.scale(factor), denominator.scale(factor)


def as_ratexpr(value: Union[Polynomial, RatExpr]) -> RatExpr:
    if isinstance(value, RatExpr):
        return value
    return RatExpr._raw(value, Polynomial.constant(value.nvars, 1))


def evaluate(expr: Union[Polynomial, RatExpr], point: Sequence[Scalar]) -> Fraction:
    return expr.evaluate(point)


# ============================================================================
# FLOAT EVALUATION
# ============================================================================

class FloatPolynomial:
    """Vectorized float evaluator for a Polynomial"""

    def __init__(self, poly: Polynomial):
        items = list(poly.items())
        self.nvars = poly.nvars
        self.constant = None
        if not items:
            self.constant = 0.0
        elif poly.is_constant():
            self.constant = float(poly.constant_term)
        self.exponents = np.array([e for e, _ in items], dtype=float).reshape(len(items), poly.nvars)
        self.coefficients = np.array([float(c) for _, c in items])

    def __call__(self, x: np.ndarray) -> float:
        if self.constant is not None:
            return self.constant
        return float(self.coefficients @ np.prod(np.power(x, self.exponents), axis=1))


class FloatRatExpr:
    """Float evaluator for a RatExpr that also exposes the denominator value"""

    def __init__(self, expr: RatExpr):
        self.numerator = FloatPolynomial(expr.numerator)
        self.denominator = FloatPolynomial(expr.denominator)
        self.is_zero = expr.is_zero()

    def parts(self, x: np.ndarray) -> Tuple[float, float]:
        if self.is_zero:
            return 0.0, 1.0
        return self.numerator(x), self.denominator(x)


# ============================================================================
# PARSER
# ============================================================================

_TOKEN_RE = re.compile(
    r"\s*(?:(?P<number>\d+(?:\.\d+)?)|(?P<name>[A-Za-z_][A-Za-z0-9_]*)|(?P<op>\*\*|[-+*/^()]))"
)
_ALIASES = ["x", "y", "z"]
_INDEXED = re.compile(r"x(\d+)$")


def _tokenize(text: str) -> List[Tuple[str, str, int]]:
    tokens = []
    position = 0
    while position < len(text):
        if text[position].isspace():
            position += 1
            continue
        match = _TOKEN_RE.match(text, position)
        if not match:
            raise ExpressionSyntaxError(f"Unexpected character {text[position]!r}", position, text)
        kind = match.lastgroup
        value = match.group(kind)
        start = match.start(kind)
        if value == "**":
            value = "^"
        tokens.append((kind, value, start))
        position = match.end()
    tokens.append(("end", "", len(text)))
    return tokens


def _resolve_variable(name: str, variable_order: Sequence[str]) -> int:
    if name in variable_order:
        return list(variable_order).index(name)
    n = len(variable_order)
    canonical = list(variable_order) == default_names(n)
    if canonical and name in _ALIASES and n <= 3 and _ALIASES.index(name) < n:
        return _ALIASES.index(name)
    indexed = _INDEXED.match(name)
    if indexed and list(variable_order) == _ALIASES[:n]:
        index = int(indexed.group(1)) - 1
        if 0 <= index < n:
            return index
    raise UnknownVariable(f"Unknown variable {name!r}; expected one of {list(variable_order)}")


class _Parser:
    """Recursive-descent parser producing RatExpr values"""

    def __init__(self, text: str, variable_order: Sequence[str]):
        self.text = text
        self.variables = list(variable_order)
        self.nvars = len(self.variables)
        self.tokens = _tokenize(text)
        self.index = 0

    @property
    def current(self) -> Tuple[str, str, int]:
        return self.tokens[self.index]

    def error(self, message: str) -> ExpressionSyntaxError:
        return ExpressionSyntaxError(message, self.current[2], self.text)

    def eat(self, value: str):
        if self.current[1] != value or self.current[0] == "end":
            raise self.error(f"Expected {value!r}")
        self.index += 1

    def parse(self) -> RatExpr:
        if self.current[0] == "end":
            raise self.error("Empty expression")
        result = self.expr()
        if self.current[0] != "end":
            raise self.error(f"Unexpected token {self.current[1]!r}")
        return result

    def expr(self) -> RatExpr:
        result = self.term()
        while self.current[1] in ("+", "-") and self.current[0] == "op":
            op = self.current[1]
            self.index += 1
            right = self.term()
            result = result + right if op == "+" else result - right
        return result

    def term(self) -> RatExpr:
        result = self.factor()
        while self.current[1] in ("*", "/") and self.current[0] == "op":
            op = self.current[1]
            position = self.current[2]
            self.index += 1
            right = self.factor()
            if op == "*":
                result = result * right
            else:
                if right.is_zero():
                    raise ExpressionSyntaxError("Division by zero", position, self.text)
                result = result / right
        return result

    def factor(self) -> RatExpr:
        if self.current[1] in ("-", "+") and self.current[0] == "op":
            op = self.current[1]
            self.index += 1
            operand = self.factor()
            return -operand if op == "-" else operand
        base = self.base()
        if self.current[1] == "^":
            self.index += 1
            base = base ** self.exponent()
        return base

    def exponent(self) -> int:
        kind, value, position = self.current
        if value == "-":
            raise NonPolynomial(f"Negative exponent at position {position}")
        if kind == "number":
            if "." in value:
                raise NonPolynomial(f"Non-integer exponent {value} at position {position}")
            self.index += 1
            return int(value)
        if value == "(":
            self.index += 1
            inner = self.expr()
            self.eat(")")
            if not inner.is_constant():
                raise NonPolynomial(f"Non-constant exponent at position {position}")
            power = inner.constant_value()
            if power.denominator != 1 or power < 0:
                raise NonPolynomial(f"Exponent {power} is not a non-negative integer")
            return int(power)
        raise self.error("Expected an exponent")

    def base(self) -> RatExpr:
        kind, value, _ = self.current
        if kind == "number":
            self.index += 1
            return RatExpr.constant(self.nvars, Fraction(value))
        if kind == "name":
            self.index += 1
            index = _resolve_variable(value, self.variables)
            return RatExpr._raw(Polynomial.variable(self.nvars, index), Polynomial.constant(self.nvars, 1))
        if value == "(":
            self.index += 1
            inner = self.expr()
            self.eat(")")
            return inner
        raise self.error("Expected a number, variable or '('")


def parse_rational_expression(text: str, variable_order: Sequence[str]) -> RatExpr:
    """Parse text into a canonical RatExpr; '/' may divide by any nonzero expression"""
    return _Parser(text, variable_order).parse()


def parse_expression(text: str, variable_order: Sequence[str]) -> Polynomial:
    """
    Parse a polynomial expression

    Args:
        text: Expression such as "x^2*y^2 - 3/2*x"
        variable_order: Variable names; position i is variable x_{i+1}

    Returns:
        Expanded Polynomial

    Raises:
        ExpressionSyntaxError: Malformed text, with the offending position
        UnknownVariable: A name not in variable_order
        NonPolynomial: Negative or fractional exponents, division by non-constants
    """
    expr = parse_rational_expression(text, variable_order)
    if not expr.is_polynomial():
        raise NonPolynomial(f"Division by a non-constant expression in {text!r}")
    return expr.numerator.scale(1 / expr.denominator.constant_term)


def infer_variables(text: str) -> List[str]:
    """Variable order implied by the names used in ``text``"""
    names = []
    for kind, value, _ in _tokenize(text):
        if kind == "name" and value not in names:
            names.append(value)
    if not names:
        return ["x1"]
    indices = []
    for name in names:
        indexed = _INDEXED.match(name)
        if indexed and int(indexed.group(1)) >= 1:
            indices.append(int(indexed.group(1)))
        elif name in _ALIASES:
            indices.append(None)
        else:
            return sorted(names)
    if all(i is None for i in indices):
        return _ALIASES[: max(_ALIASES.index(n) for n in names) + 1]
    alias_max = max((_ALIASES.index(n) + 1 for n in names if n in _ALIASES), default=0)
    return default_names(max([i for i in indices if i is not None] + [alias_max]))
