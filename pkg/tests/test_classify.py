import itertools
from fractions import Fraction

import numpy as np
import pytest
import sympy

from gconvex.engine import linalg
from gconvex.engine.classify import (
    CertificateKind,
    Outcome,
    QuadraticForm,
    WitnessKind,
    check_necessary_at_critical,
    classify,
    classify_monomial,
    classify_quadratic,
    classify_univariate,
    count_isolated_critical_points,
    has_critical_point,
    is_univariate_gconvex,
    separable_partition,
    to_quadratic_form,
)
from gconvex.engine.polycore import Polynomial, euclidean_hessian, infer_variables, parse_expression
from gconvex.exceptions import NotMonomial, NotUnivariate


def P(text):
    return parse_expression(text, infer_variables(text))


class TestUnivariate:
    @pytest.mark.parametrize("text,kind", [
        ("x^3 + x", CertificateKind.NO_CRITICAL_POINT),
        ("3*x^4", CertificateKind.UNIVARIATE_ODD_ROOT),
        ("x^2 - 4*x", CertificateKind.UNIVARIATE_ODD_ROOT),
        ("5", CertificateKind.CONSTANT_FUNCTION),
    ])
    def test_gconvex(self, text, kind):
        verdict = classify_univariate(P(text))
        assert verdict.outcome == Outcome.GCONVEX
        assert verdict.certificate.kind == kind

    @pytest.mark.parametrize("text,kind", [
        ("x^3", WitnessKind.EVEN_MULTIPLICITY_ROOT),
        ("-x^4", WitnessKind.NEGATIVE_LEADING_COFACTOR),
        ("x^3 - 3*x", WitnessKind.MULTIPLE_ODD_ROOTS),
        ("x^5 - x^3", WitnessKind.EVEN_MULTIPLICITY_ROOT),
    ])
    def test_not_gconvex(self, text, kind):
        verdict = classify_univariate(P(text))
        assert verdict.outcome == Outcome.NOT_GCONVEX
        assert verdict.witness.kind == kind

    def test_odd_root_certificate_locates_root(self):
        verdict = classify_univariate(P("(x - 2)^3"))
        certificate = verdict.certificate
        assert certificate.multiplicity == 3
        lo, hi = certificate.root_interval
        assert lo < 2 <= hi

    def test_requires_one_variable(self):
        with pytest.raises(NotUnivariate):
            classify_univariate(P("x1 + x2"))

    def test_fast_predicate_agrees(self):
        for text in ["x^3 + x", "3*x^4", "x^3", "-x^4", "x^3 - 3*x", "x^5 - x^3", "x^2 - 4*x"]:
            f = P(text)
            assert is_univariate_gconvex(f) == classify_univariate(f).is_gconvex

    def test_shift_invariance(self):
        for text in ["x^3 + x", "x^3", "x^4 - x", "x^3 - 3*x"]:
            f = P(text)
            shifted = f.shift([Fraction(1, 3)])
            assert classify(shifted).outcome == classify(f).outcome

    def test_average_of_gconvex_functions_can_fail(self):
        f1, f2 = P("x^3 + x"), P("-2*x^3 - x")
        assert classify(f1).is_gconvex and classify(f2).is_gconvex
        average = (f1 + f2).scale(Fraction(1, 2))
        verdict = classify(average)
        assert verdict.outcome == Outcome.NOT_GCONVEX
        assert verdict.witness.kind == WitnessKind.EVEN_MULTIPLICITY_ROOT


def _sympy_decision(coeffs):
    """Root condition read off sympy's real roots of f'"""
    x = sympy.Symbol("x")
    f = sum(sympy.Rational(c) * x ** k for k, c in enumerate(coeffs))
    b = sympy.diff(f, x)
    if b == 0:
        return True
    poly = sympy.Poly(b, x)
    roots = poly.real_roots()
    distinct = set(roots)
    if not distinct:
        return True
    if len(distinct) > 1:
        return False
    return roots.count(next(iter(distinct))) % 2 == 1 and bool(poly.LC() > 0)


def _exhaustive(values):
    for coeffs in itertools.product(values, repeat=5):
        f = Polynomial.from_coefficients(coeffs)
        expected = _sympy_decision(coeffs)
        assert classify_univariate(f).is_gconvex == expected, coeffs
        assert is_univariate_gconvex(f) == expected, coeffs


def test_exhaustive_small_coefficients():
    _exhaustive(range(-1, 2))


@pytest.mark.slow
def test_exhaustive_degree_four():
    _exhaustive(range(-2, 3))


class TestQuadratic:
    def test_no_critical_point(self):
        verdict = classify(P("x1^2 + x2"))
        assert verdict.certificate.kind == CertificateKind.QUADRATIC_NO_CRITICAL

    def test_psd(self):
        verdict = classify(P("x1^2 + x1*x2 + x2^2"))
        assert verdict.certificate.kind == CertificateKind.QUADRATIC_PSD

    def test_indefinite_witness(self):
        verdict = classify(P("x1^2 - x2^2 + 2*x1"))
        assert verdict.outcome == Outcome.NOT_GCONVEX
        assert verdict.witness.kind == WitnessKind.INDEFINITE_HESSIAN_AT_CRITICAL
        assert verdict.witness.point == (Fraction(-1), Fraction(0))

    def test_half_convention(self):
        q = QuadraticForm.from_lists([[2, 0], [0, 0]], [0, 1], 3)
        assert q.to_polynomial() == P("x1^2 + x2 + 3")
        assert classify_quadratic(q).is_gconvex

    def test_singular_indefinite_without_critical_point(self):
        q = QuadraticForm.from_lists([[1, 1], [1, 1]], [1, 0])
        assert not q.has_critical_point()
        assert classify_quadratic(q).certificate.kind == CertificateKind.QUADRATIC_NO_CRITICAL


class TestMonomial:
    @pytest.mark.parametrize("text,outcome", [
        ("x1^2*x2^2", Outcome.NOT_GCONVEX),
        ("x1*x2", Outcome.NOT_GCONVEX),
        ("x1^3*x2^2", Outcome.NOT_GCONVEX),
        ("x1*x2^2", Outcome.NOT_GCONVEX),
        ("-x2^4", Outcome.NOT_GCONVEX),
        ("2*x2^4", Outcome.GCONVEX),
        ("-3*x1", Outcome.GCONVEX),
    ])
    def test_outcomes(self, text, outcome):
        f = parse_expression(text, ["x1", "x2"])
        assert classify_monomial(f).outcome == outcome

    def test_even_power_certificate_index(self):
        f = parse_expression("2*x2^4", ["x1", "x2"])
        data = classify_monomial(f).to_dict()
        assert data["certificate"]["variant"] == "MonomialEvenPower"
        assert data["certificate"]["index"] == 2
        assert data["certificate"]["degree"] == 4

    def test_lemma_named(self):
        f = parse_expression("x1^2*x2^2", ["x1", "x2"])
        assert classify_monomial(f).witness.lemma == "several-even-powers"

    def test_rejects_sums(self):
        with pytest.raises(NotMonomial):
            classify_monomial(P("x1 + x2"))


class TestSeparable:
    def test_partition(self):
        f = P("x1^3 + x2*x3 + x3^2 + 1")
        blocks = separable_partition(f)
        assert [b.indices for b in blocks] == [(0,), (1, 2)]

    def test_block_without_critical_point(self):
        verdict = classify(P("x1^3 + x2"))
        assert verdict.certificate.kind == CertificateKind.NO_CRITICAL_POINT
        assert verdict.to_dict()["certificate"]["block"] == 2

    def test_all_blocks_gconvex(self):
        verdict = classify(P("x1^4 + x2^4"))
        assert verdict.certificate.kind == CertificateKind.SEPARABLE
        assert len(verdict.certificate.parts) == 2

    def test_failing_block(self):
        verdict = classify(P("x1^4 + x2^3"))
        assert verdict.witness.kind == WitnessKind.SEPARABLE_FAILURE
        assert verdict.witness.block == 2

    def test_unknown_outside_classes(self):
        verdict = classify(P("x1^2*x2 + x1*x2^2 + x1^3"))
        assert verdict.outcome == Outcome.UNKNOWN
        assert verdict.reason

    def test_has_critical_point(self):
        assert has_critical_point(P("x1^2 + x2^2")) is True
        assert has_critical_point(P("x1^2 + x2")) is False
        assert has_critical_point(P("x1^2*x2 + x1*x2^2 + x1^3")) is None
        assert has_critical_point(P("x1^3 + x1 + x2^4")) is False
        assert has_critical_point(P("x1^3 + x2^4")) is True
        assert has_critical_point(P("x1^3 + x2^4 + x3^2*x4 + x3*x4^2 + x3^3")) is None


class TestCriticalPoints:
    def test_necessary_condition(self):
        f = P("x1^2 - x2^2")
        (check,) = check_necessary_at_critical(f, [(0, 0)])
        assert check.is_critical and not check.hessian_psd
        assert check.disproves

    def test_non_critical_point(self):
        (check,) = check_necessary_at_critical(P("x1^2 - x2^2"), [(1, 0)])
        assert not check.is_critical
        assert not check.disproves

    def test_two_isolated_points(self):
        count = count_isolated_critical_points(P("x^3 - 3*x"))
        assert count.count == 2
        assert count.rules_out_complete_connections

    def test_continuum(self):
        count = count_isolated_critical_points(P("x1^2*x2^2"))
        assert count.continuum
        assert count.to_dict()["count"] == "continuum"

    def test_no_critical_points(self):
        assert count_isolated_critical_points(P("x1^2 + x2")).count == 0

    def test_monomial_in_one_of_two_variables(self):
        f = parse_expression("x1^3", ["x1", "x2"])
        assert count_isolated_critical_points(f).continuum
        g = parse_expression("x1*x2", ["x1", "x2"])
        assert count_isolated_critical_points(g).count == 1


def test_verdict_serialization():
    data = classify(P("x^3")).to_dict()
    assert data["outcome"] == "NotGConvex"
    assert data["witness"]["variant"] == "EvenMultiplicityRoot"
    assert data["witness"]["multiplicities"] == [2]
    assert "certificate" not in data


def _random_univariate(rng, nvars=1, index=0, degree=5):
    coefficients = [int(c) for c in rng.integers(-3, 4, size=int(rng.integers(2, degree + 2)))]
    x = Polynomial.variable(nvars, index)
    f = Polynomial.zero(nvars)
    for k, c in enumerate(coefficients):
        f = f + (x ** k).scale(c)
    return f


def _random_quadratic(rng, n):
    A = [[0] * n for _ in range(n)]
    for i in range(n):
        for j in range(i, n):
            A[i][j] = A[j][i] = int(rng.integers(-2, 3))
    return QuadraticForm.from_lists(A, [int(v) for v in rng.integers(-2, 3, size=n)], int(rng.integers(-2, 3))).to_polynomial()


def _random_separable(rng, n):
    f = Polynomial.zero(n)
    for i in range(n):
        f = f + _random_univariate(rng, n, i, degree=4)
    return f


def _random_monomial(rng, n):
    exponent = tuple(int(e) for e in rng.integers(0, 4, size=n))
    return Polynomial(n, {exponent: int(rng.choice([-2, -1, 1, 3]))})


def _random_decided(rng):
    """A polynomial from a class where classify always decides"""
    family = int(rng.integers(0, 4))
    n = int(rng.integers(2, 4))
    if family == 0:
        return _random_univariate(rng)
    if family == 1:
        return _random_quadratic(rng, n)
    if family == 2:
        return _random_separable(rng, n)
    return _random_monomial(rng, n)


class TestRandomCovariance:
    CASES = 100

    def test_scaling(self):
        rng = np.random.default_rng(0)
        for _ in range(self.CASES):
            f = _random_decided(rng)
            n = f.nvars
            expected = classify(f).outcome
            assert expected != Outcome.UNKNOWN, f
            c = Fraction(int(rng.integers(1, 6)), int(rng.integers(1, 6)))
            assert classify(f.scale(c)).outcome == expected, f
            factors = [Fraction(int(rng.choice([-3, -2, -1, 1, 2, 3])), int(rng.integers(1, 4))) for _ in range(n)]
            stretched = f.compose([Polynomial.variable(n, i).scale(factors[i]) for i in range(n)])
            assert classify(stretched).outcome == expected, (f, factors)

    def test_shift_multivariate(self):
        rng = np.random.default_rng(1)
        for _ in range(self.CASES):
            n = int(rng.integers(2, 4))
            f = _random_quadratic(rng, n) if rng.random() < 0.5 else _random_separable(rng, n)
            offsets = [Fraction(int(rng.integers(-4, 5)), int(rng.integers(1, 4))) for _ in range(n)]
            assert classify(f.shift(offsets)).outcome == classify(f).outcome, (f, offsets)


def _convex_on_sign_grid(f):
    for point in itertools.product((-1, 1), repeat=f.nvars):
        hessian = [[entry.evaluate(point) for entry in row] for row in euclidean_hessian(f)]
        if not linalg.is_psd(hessian):
            return False
    return True


@pytest.mark.parametrize("n", [1, 2, 3])
def test_monomial_verdict_matches_grid_convexity(n):
    for exponent in itertools.product(range(5), repeat=n):
        for sign in (1, -1):
            f = Polynomial(n, {exponent: sign})
            assert classify_monomial(f).is_gconvex == _convex_on_sign_grid(f), f


class TestDispatchAgreement:
    @pytest.mark.parametrize("k", range(7))
    @pytest.mark.parametrize("c", [-2, -1, 1, 3])
    def test_univariate_monomial(self, k, c):
        f = Polynomial.from_coefficients([0] * k + [c])
        assert classify_univariate(f).outcome == classify_monomial(f).outcome

    def test_univariate_quadratic(self):
        rng = np.random.default_rng(2)
        for _ in range(100):
            f = Polynomial.from_coefficients([int(v) for v in rng.integers(-3, 4, size=3)])
            expected = classify_univariate(f).outcome
            assert classify_quadratic(to_quadratic_form(f)).outcome == expected, f

    def test_diagonal_quadratic_matches_block_rule(self):
        rng = np.random.default_rng(3)
        for _ in range(100):
            n = int(rng.integers(2, 4))
            a = [int(v) for v in rng.integers(-2, 3, size=n)]
            b = [int(v) for v in rng.integers(-2, 3, size=n)]
            blocks = [Polynomial.from_coefficients([0, b[i], Fraction(a[i], 2)]) for i in range(n)]
            expected = (
                any(not has_critical_point(block) for block in blocks)
                or all(classify_univariate(block).is_gconvex for block in blocks)
            )
            q = QuadraticForm.from_lists([[a[i] if i == j else 0 for j in range(n)] for i in range(n)], b)
            assert classify_quadratic(q).is_gconvex == expected, (a, b)
