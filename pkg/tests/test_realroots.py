from collections import Counter
from fractions import Fraction

import numpy as np
import pytest
import sympy

from gconvex.engine.polycore import Polynomial, parse_expression
from gconvex.engine.realroots import (
    cauchy_bound,
    count_real_roots,
    isolate_real_roots,
    squarefree_decompose,
    univariate_summary,
)
from gconvex.exceptions import ZeroPolynomial

X = sympy.Symbol("x")

CASES = [
    "(x - 1)^2*(x + 2)^3*(x^2 + 1)",
    "x^5 - 3*x + 1",
    "3*x^2",
    "(2*x - 1)^3*(x + 1/3)",
    "x^4 + 1",
    "x^3 - 2",
    "(x^2 - 2)^2*(x - 5)",
    "-7",
]


def _sympy_poly(text):
    return sympy.Poly(sympy.sympify(text.replace("^", "**")), X)


def _to_fraction(value):
    return Fraction(int(value.p), int(value.q))


@pytest.mark.parametrize("text", CASES)
def test_distinct_count_matches_sympy(text):
    b = parse_expression(text, ["x"])
    expected = len(set(_sympy_poly(text).real_roots()))
    assert count_real_roots(b) == expected


@pytest.mark.parametrize("text", CASES)
def test_isolation_matches_sympy(text):
    b = parse_expression(text, ["x"])
    roots = Counter(_sympy_poly(text).real_roots())
    records = isolate_real_roots(b)
    assert len(records) == len(roots)
    for record, (root, multiplicity) in zip(records, sorted(roots.items(), key=lambda kv: float(kv[0]))):
        assert record.multiplicity == multiplicity
        if root.is_Rational:
            assert record.contains(_to_fraction(root))
        else:
            assert float(record.lo) < float(root) <= float(record.hi)


@pytest.mark.parametrize("text", CASES[:-1])
def test_squarefree_matches_sympy(text):
    b = parse_expression(text, ["x"])
    decomposition = squarefree_decompose(b)
    assert decomposition.expand() == b

    _, expected = sympy.sqf_list(_sympy_poly(text))
    got = {
        m: [Fraction(c) for c in factor.univariate_coefficients()]
        for factor, m in decomposition.factors
    }
    want = {}
    for factor, m in expected:
        if factor.degree() == 0:
            continue
        coeffs = factor.monic().all_coeffs()
        want[m] = [_to_fraction(sympy.Rational(c)) for c in reversed(coeffs)]
    assert got == want


def test_count_on_half_open_interval():
    b = parse_expression("(x - 1)*(x - 2)*(x - 3)", ["x"])
    assert count_real_roots(b, (Fraction(1), Fraction(2))) == 1
    assert count_real_roots(b, (Fraction(0), Fraction(3))) == 3
    assert count_real_roots(b, (Fraction(3), Fraction(10))) == 0


def test_summary():
    b = parse_expression("-2*x^3 + x", ["x"])
    assert univariate_summary(b) == (3, 3, Fraction(-2))


def test_cauchy_bound_encloses_roots():
    b = parse_expression("x^3 - 7*x + 6", ["x"])
    bound = cauchy_bound(b.univariate_coefficients())
    for root in (1, 2, -3):
        assert abs(root) < bound


def test_zero_polynomial_rejected():
    with pytest.raises(ZeroPolynomial):
        count_real_roots(parse_expression("0", ["x"]))


def _random_factored(rng):
    """c·Π(x − r)^m over distinct rational r with Σm ≤ 8, sometimes times x² + 1"""
    pool = sorted({Fraction(int(rng.integers(-12, 13)), int(rng.integers(1, 5))) for _ in range(8)})
    roots = {}
    budget = 8
    for r in rng.permutation(len(pool)):
        if budget == 0:
            break
        m = int(rng.integers(1, min(3, budget) + 1))
        roots[pool[r]] = m
        budget -= m
        if rng.random() < 0.3:
            break
    b = Polynomial.constant(1, Fraction(int(rng.choice([-3, -1, 2, 5]))))
    for r, m in roots.items():
        b = b * Polynomial.from_coefficients([-r, 1]) ** m
    if rng.random() < 0.5:
        b = b * Polynomial.from_coefficients([1, 0, 1])
    return b, roots


def test_random_linear_factor_products():
    rng = np.random.default_rng(0)
    for _ in range(100):
        b, roots = _random_factored(rng)
        assert count_real_roots(b) == len(roots)
        records = isolate_real_roots(b)
        assert len(records) == len(roots)
        for record, (root, multiplicity) in zip(records, sorted(roots.items())):
            assert record.contains(root)
            assert record.multiplicity == multiplicity
        assert squarefree_decompose(b).expand() == b
