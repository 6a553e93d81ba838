"""Real-root analysis of univariate rational polynomials with Sturm sequences"""
import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import reduce
from typing import List, Optional, Sequence, Tuple

from gconvex.engine.polycore import Polynomial
from gconvex.exceptions import NotUnivariate, ZeroPolynomial

logger = logging.getLogger(__name__)

IntPoly = List[int]
RatPoly = List[Fraction]

_MAX_REFINEMENTS = 10_000


# ============================================================================
# DENSE COEFFICIENT HELPERS (lowest degree first)
# ============================================================================

def _trim(p: list) -> list:
    while p and not p[-1]:
        p.pop()
    return p


def _to_integer(p: Sequence[Fraction]) -> IntPoly:
    """Scale by a positive constant to coprime integer coefficients"""
    p = [Fraction(c) for c in p]
    lcm = reduce(lambda x, y: x * y // math.gcd(x, y), (c.denominator for c in p), 1)
    ints = [int(c * lcm) for c in p]
    content = reduce(math.gcd, (abs(c) for c in ints), 0)
    return [c // content for c in ints] if content else ints


def _primitive(p: IntPoly) -> IntPoly:
    """Coprime integer coefficients with positive leading coefficient"""
    p = _to_integer(p)
    if p and p[-1] < 0:
        p = [-c for c in p]
    return p


def _derivative(p: Sequence) -> list:
    return [k * c for k, c in enumerate(p)][1:]


def _lazy_prem(a: IntPoly, b: IntPoly) -> Tuple[IntPoly, int]:
    """lc(b)^steps · a reduced modulo b, and the number of steps taken"""
    r = list(a)
    db = len(b) - 1
    lead = b[-1]
    steps = 0
    while r and len(r) - 1 >= db:
        factor = r[-1]
        shift = len(r) - 1 - db
        r = [lead * c for c in r]
        for i, c in enumerate(b):
            r[shift + i] -= factor * c
        r.pop()
        _trim(r)
        steps += 1
    return r, steps


def _gcd(a: Sequence, b: Sequence) -> IntPoly:
    """Primitive gcd of two polynomials via the primitive remainder sequence"""
    a, b = _primitive(_trim(list(a))), _primitive(_trim(list(b)))
    while b:
        r, _ = _lazy_prem(a, b)
        a, b = b, (_primitive(r) if r else [])
    return _primitive(a)


def _divide(a: Sequence, b: Sequence) -> RatPoly:
    """Exact quotient over Q"""
    a = [Fraction(c) for c in a]
    b = [Fraction(c) for c in b]
    if len(b) == 1:
        return [c / b[0] for c in a]
    quotient = [Fraction(0)] * max(len(a) - len(b) + 1, 0)
    while len(a) >= len(b) and a:
        factor = a[-1] / b[-1]
        shift = len(a) - len(b)
        quotient[shift] = factor
        for i, c in enumerate(b):
            a[shift + i] -= factor * c
        a.pop()
        _trim(a)
    if a:
        raise ArithmeticError("Polynomial division is not exact")
    return quotient


def _sub(a: Sequence, b: Sequence) -> RatPoly:
    n = max(len(a), len(b))
    a = list(a) + [0] * (n - len(a))
    b = list(b) + [0] * (n - len(b))
    return _trim([Fraction(x) - y for x, y in zip(a, b)])


def _mul(a: Sequence, b: Sequence) -> RatPoly:
    out = [Fraction(0)] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        for j, y in enumerate(b):
            out[i + j] += x * y
    return out


def _coefficients(b: Polynomial) -> RatPoly:
    if b.nvars != 1:
        if len(b.variables()) > 1:
            raise NotUnivariate(f"{b} is not univariate")
        used = b.variables() or [0]
        b = b.restrict_to(used)
    if b.is_zero():
        raise ZeroPolynomial("Root analysis of the zero polynomial")
    return b.univariate_coefficients()


# ============================================================================
# SQUARE-FREE DECOMPOSITION
# ============================================================================

@dataclass(frozen=True)
class SquareFreeDecomposition:
    """b = unit · ∏ S_m^m with monic, square-free, pairwise coprime S_m"""
    unit: Fraction
    factors: Tuple[Tuple[Polynomial, int], ...]

    def expand(self) -> Polynomial:
        result = Polynomial.constant(1, self.unit)
        for factor, multiplicity in self.factors:
            result = result * factor ** multiplicity
        return result

    def squarefree_part(self) -> Polynomial:
        result = Polynomial.constant(1, 1)
        for factor, _ in self.factors:
            result = result * factor
        return result


def _monic(p: Sequence) -> RatPoly:
    p = [Fraction(c) for c in p]
    return [c / p[-1] for c in p]


def squarefree_decompose(b: Polynomial) -> SquareFreeDecomposition:
    """Yun's gcd cascade"""
    coeffs = _coefficients(b)
    unit = coeffs[-1]
    a = _monic(coeffs)
    factors: List[Tuple[Polynomial, int]] = []
    if len(a) > 1:
        da = _derivative(a)
        c = _gcd(a, da)
        w = _divide(a, c)
        y = _divide(da, c)
        z = _sub(y, _derivative(w))
        multiplicity = 1
        while len(w) > 1:
            g = _gcd(w, z) if z else _primitive(w)
            if len(g) > 1:
                factors.append((Polynomial.from_coefficients(_monic(g)), multiplicity))
            w = _divide(w, g)
            y = _divide(z, g) if z else []
            z = _sub(y, _derivative(w))
            multiplicity += 1
    return SquareFreeDecomposition(unit=unit, factors=tuple(factors))


# ============================================================================
# STURM SEQUENCES
# ============================================================================

def sturm_chain(p: Sequence) -> List[IntPoly]:
    """
    Sturm chain of p built from sign-corrected pseudo-remainders

    Each element is scaled by a positive constant only, so sign variations
    match the classical chain p, p', -rem(p, p'), ...
    """
    first = _to_integer(_trim(list(p)))
    chain = [first]
    if len(first) <= 1:
        return chain
    chain.append(_to_integer(_derivative(first)))
    while len(chain[-1]) > 1:
        r, steps = _lazy_prem(chain[-2], chain[-1])
        if not r:
            break
        if not (chain[-1][-1] < 0 and steps % 2):
            r = [-c for c in r]
        chain.append(_to_integer(r))
    return chain


def _sign_at(p: IntPoly, x: Optional[Fraction], side: int = 1) -> int:
    """Sign of p at a rational x, or at side·∞ when x is None"""
    if not p:
        return 0
    if x is None:
        lead = 1 if p[-1] > 0 else -1
        return lead if side > 0 or (len(p) - 1) % 2 == 0 else -lead
    num, den = x.numerator, x.denominator
    degree = len(p) - 1
    value = 0
    for k, c in enumerate(p):
        value += c * num ** k * den ** (degree - k)
    return (value > 0) - (value < 0)


def sign_variations(chain: Sequence[IntPoly], x: Optional[Fraction], side: int = 1) -> int:
    signs = [s for s in (_sign_at(p, x, side) for p in chain) if s]
    return sum(1 for s, t in zip(signs, signs[1:]) if s != t)


def _count(chain: Sequence[IntPoly], lo: Optional[Fraction], hi: Optional[Fraction]) -> int:
    """Distinct roots in (lo, hi]; None endpoints stand for ∓∞"""
    return sign_variations(chain, lo, -1) - sign_variations(chain, hi, 1)


def cauchy_bound(p: Sequence) -> Fraction:
    p = [Fraction(c) for c in p]
    lead = abs(p[-1])
    return 1 + max((abs(c) / lead for c in p[:-1]), default=Fraction(0))


def count_real_roots(b: Polynomial, interval: Optional[Tuple[Fraction, Fraction]] = None) -> int:
    """
    Number of distinct real roots of b

    Args:
        b: Nonzero univariate polynomial
        interval: Optional (lo, hi]; all of R when omitted

    Returns:
        Exact count of distinct real roots
    """
    coeffs = _coefficients(b)
    if len(coeffs) == 1:
        return 0
    chain = sturm_chain(_divide(coeffs, _gcd(coeffs, _derivative(coeffs))))
    if interval is None:
        return _count(chain, None, None)
    lo, hi = Fraction(interval[0]), Fraction(interval[1])
    return _count(chain, lo, hi)


def univariate_summary(b: Polynomial) -> Tuple[int, int, Fraction]:
    """(distinct real roots, degree, leading coefficient) from a single Sturm chain"""
    coeffs = _coefficients(b)
    if len(coeffs) == 1:
        return 0, 0, coeffs[0]
    return _count(sturm_chain(coeffs), None, None), len(coeffs) - 1, coeffs[-1]


# ============================================================================
# ISOLATION
# ============================================================================

@dataclass(frozen=True)
class RootRecord:
    """A real root isolated in (lo, hi] with its multiplicity"""
    lo: Fraction
    hi: Fraction
    multiplicity: int

    @property
    def interval(self) -> Tuple[Fraction, Fraction]:
        return self.lo, self.hi

    @property
    def midpoint(self) -> Fraction:
        return (self.lo + self.hi) / 2

    def contains(self, x: Fraction) -> bool:
        return self.lo < x <= self.hi


def isolate_real_roots(b: Polynomial) -> List[RootRecord]:
    """One record per distinct real root, sorted by interval"""
    decomposition = squarefree_decompose(b)
    if not decomposition.factors:
        return []
    part = [Fraction(1)]
    for factor, _ in decomposition.factors:
        part = _mul(part, factor.univariate_coefficients())
    chain = sturm_chain(part)
    bound = cauchy_bound(part)

    isolated: List[Tuple[Fraction, Fraction]] = []
    stack = [(-bound, bound, _count(chain, -bound, bound))]
    while stack:
        lo, hi, k = stack.pop()
        if k == 0:
            continue
        if k == 1:
            isolated.append((lo, hi))
            continue
        mid = (lo + hi) / 2
        left = _count(chain, lo, mid)
        stack.append((lo, mid, left))
        stack.append((mid, hi, k - left))
    isolated.sort()

    factor_chains = [
        (sturm_chain(factor.univariate_coefficients()), m)
        for factor, m in decomposition.factors
    ]
    records = []
    for lo, hi in isolated:
        for _ in range(_MAX_REFINEMENTS):
            hits = [m for fc, m in factor_chains if _count(fc, lo, hi) == 1]
            if len(hits) == 1:
                records.append(RootRecord(lo, hi, hits[0]))
                break
            mid = (lo + hi) / 2
            if _count(chain, lo, mid) == 1:
                hi = mid
            else:
                lo = mid
        else:
            raise ArithmeticError("Multiplicity attribution did not converge")
    logger.debug(f"Isolated {len(records)} real roots of {b}")
    return records
