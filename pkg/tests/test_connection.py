from fractions import Fraction

import numpy as np
import pytest

from gconvex.engine import linalg
from gconvex.engine.classify import QuadraticForm, classify, to_quadratic_form
from gconvex.engine.connection import (
    CompiledConnection,
    Connection,
    construct_no_critical,
    construct_quadratic_flat,
    hessian_under,
    metric_exponent_derivative,
    normal_form_connection,
    normal_form_polynomial,
    quadratic_normal_form,
    symbols_table,
    verify_hessian_target,
)
from gconvex.engine.holonomy import LCVerdict, curvature, lc_check
from gconvex.engine.polycore import Polynomial, RatExpr, default_names, parse_expression, parse_rational_expression
from gconvex.exceptions import CriticalPointDetected, DimensionMismatch, HasCriticalPoint, InvalidArgument

X1 = default_names(1)
X2 = default_names(2)


def P(text, names=X2):
    return parse_expression(text, names)


class TestConnection:
    def test_zero(self):
        conn = Connection.zero(3)
        assert conn.is_zero()
        assert conn.is_constant()

    def test_lower_symmetry_filled(self, example_connection):
        assert example_connection.symbol(0, 0, 1) == parse_rational_expression("2/(1 + 4*x1^2)", X2)
        assert example_connection.symbol(1, 1, 0) == 1
        assert example_connection.symbol(0, 1, 0).is_zero()

    def test_asymmetric_rejected(self):
        zero = RatExpr.zero(2)
        one = RatExpr.constant(2, 1)
        gamma = (
            ((zero, zero), (one, zero)),
            ((zero, zero), (zero, zero)),
        )
        with pytest.raises(InvalidArgument):
            Connection(2, gamma)

    def test_index_out_of_range(self):
        with pytest.raises(InvalidArgument):
            Connection.from_symbols(2, {(0, 0, 2): 1})

    def test_dict_round_trip(self, example_connection):
        data = example_connection.to_dict()
        assert data["n"] == 2
        assert {"i": 1, "j": 1, "k": 2, "expr": "2/(4*x1^2 + 1)"} in data["symbols"]
        assert Connection.from_dict(data) == example_connection

    def test_malformed_dict(self):
        with pytest.raises(InvalidArgument):
            Connection.from_dict({"symbols": []})

    def test_compiled_values(self, example_connection):
        gamma, smallest = CompiledConnection(example_connection)(np.array([1.0, 0.0]))
        assert gamma[0, 0, 0] == pytest.approx(0.8)
        assert gamma[1, 0, 0] == pytest.approx(0.4)
        assert gamma[0, 1, 1] == pytest.approx(1.0)
        assert gamma[1, 1, 1] == pytest.approx(-2.0)
        assert smallest > 0


class TestNoCriticalConstruction:
    def test_cubic_plus_linear(self):
        f = P("x1^3 + x1", X1)
        conn = construct_no_critical(f)
        assert conn.label == "no-critical-point"
        assert conn.symbol(0, 0, 0).to_text(X1) == "6*x1/(3*x1^2 + 1)"
        assert all(entry.is_zero() for row in hessian_under(f, conn) for entry in row)
        assert verify_hessian_target(f, conn).verified

    def test_separable_without_critical_point(self):
        f = P("x1^3 + x2")
        conn = construct_no_critical(f)
        check = verify_hessian_target(f, conn)
        assert check.verified and check.exact

    def test_prescribed_target(self):
        f = P("x1^3 + x1", X1)
        target = [[parse_rational_expression("x1^2", X1)]]
        conn = construct_no_critical(f, target)
        (row,) = hessian_under(f, conn)
        assert row[0] == target[0][0]
        assert verify_hessian_target(f, conn, target).verified

    def test_critical_point_refused(self):
        with pytest.raises(CriticalPointDetected):
            construct_no_critical(P("x1^3", X1))

    def test_target_shape_checked(self):
        with pytest.raises(DimensionMismatch):
            construct_no_critical(P("x1^3 + x2"), [[1]])

    def test_metric_exponent_derivative(self):
        conn = construct_no_critical(P("x1^3 + x1", X1))
        assert metric_exponent_derivative(conn) == conn.symbol(0, 0, 0) * 2
        with pytest.raises(DimensionMismatch):
            metric_exponent_derivative(Connection.zero(2))


class TestQuadraticFlat:
    def test_diagonal_exact(self):
        f = P("x1^2 + x2")
        conn = construct_quadratic_flat(to_quadratic_form(f))
        assert conn.exact
        assert conn.symbol(0, 0, 1) == 2
        assert len(conn.nonzero_symbols()) == 1
        assert verify_hessian_target(f, conn).verified

    def test_non_diagonal_sampled(self):
        q = QuadraticForm.from_lists([[1, 1], [1, 1]], [1, 0])
        f = q.to_polynomial()
        conn = construct_quadratic_flat(q)
        assert not conn.exact
        assert conn.is_constant()
        check = verify_hessian_target(f, conn, samples=50)
        assert check.verified
        assert check.samples == 50

    def test_linear_function_gets_zero_connection(self):
        conn = construct_quadratic_flat(to_quadratic_form(P("x1 + 2*x2")))
        assert conn.is_zero()

    def test_critical_point_refused(self):
        with pytest.raises(HasCriticalPoint):
            construct_quadratic_flat(to_quadratic_form(P("x1^2 + x2^2")))

    def test_normal_form(self):
        q = to_quadratic_form(P("x1^2 + x2 + 3"))
        nf = quadratic_normal_form(q)
        assert nf.r == 1
        assert nf.mu == (Fraction(1),)
        assert nf.nu == (Fraction(1),)
        assert normal_form_polynomial(nf) == P("x1^2 + x2 + 3")
        assert normal_form_connection(nf).symbol(0, 0, 1) == 2

    def test_normal_form_with_critical_point(self):
        q = QuadraticForm.from_lists([[0, 1], [1, 0]], [1, 1])
        nf = quadratic_normal_form(q, allow_critical=True)
        assert nf.r == 2
        assert nf.nu == ()
        assert sorted(round(float(m), 12) for m in nf.mu) == [-0.5, 0.5]
        assert nf.orthogonality_error() < 1e-12


def test_symbols_table():
    conn = construct_quadratic_flat(to_quadratic_form(P("x1^2 + x2")))
    (row,) = symbols_table(conn, X2)
    assert (row["i"], row["j"], row["k"]) == (1, 1, 2)
    assert row["rational"] == "2"


def _times(a, b):
    out = [Fraction(0)] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        for j, y in enumerate(b):
            out[i + j] += x * y
    return out


def _rootless_derivative_polynomial(rng, max_factors=4):
    """f with f' = c·Π(x² + px + q), p² < 4q, plus a random constant; degree ≤ 2·max_factors + 1"""
    b = [Fraction(int(rng.choice([-3, -2, -1, 1, 2, 3])))]
    for _ in range(int(rng.integers(0, max_factors + 1))):
        p = int(rng.integers(-3, 4))
        q = p * p // 4 + int(rng.integers(1, 4))
        b = _times(b, [Fraction(q), Fraction(p), Fraction(1)])
    constant = Fraction(int(rng.integers(-5, 6)))
    return Polynomial.from_coefficients([constant] + [c / (k + 1) for k, c in enumerate(b)])


def _check_rootless_certificates(cases, seed):
    rng = np.random.default_rng(seed)
    for _ in range(cases):
        f = _rootless_derivative_polynomial(rng)
        assert classify(f).is_gconvex, f
        conn = construct_no_critical(f)
        check = verify_hessian_target(f, conn)
        assert check.exact and check.verified, f


def test_rootless_univariate_certificates():
    _check_rootless_certificates(60, seed=0)


@pytest.mark.slow
def test_rootless_univariate_certificates_full():
    _check_rootless_certificates(500, seed=1)


def test_rootless_block_certificates_are_symmetric():
    rng = np.random.default_rng(2)
    x1, x2 = Polynomial.variable(2, 0), Polynomial.variable(2, 1)
    for _ in range(8):
        rootless = _rootless_derivative_polynomial(rng, max_factors=2).compose([x1])
        other = Polynomial.from_coefficients([int(c) for c in rng.integers(-2, 3, size=4)]).compose([x2])
        f = rootless + other
        conn = construct_no_critical(f)
        assert verify_hessian_target(f, conn).verified, f
        for k in range(2):
            assert conn.symbol(0, 1, k) == conn.symbol(1, 0, k)


def _flat_quadratic(rng, diagonal):
    """Quadratic with b outside range(A): A = VᵀDV, b = Vᵀw + s·z with z ∈ ker V"""
    n = int(rng.integers(2, 5))
    r = int(rng.integers(0, n))
    if diagonal:
        rows = [[int(c == i) * int(rng.integers(1, 3)) for c in range(n)] for i in rng.permutation(n)[:r]]
    else:
        rows = [[int(v) for v in rng.integers(-2, 3, size=n)] for _ in range(r)]
    D = [int(rng.choice([-2, -1, 1, 2])) for _ in range(r)]
    A = [[sum(D[t] * rows[t][i] * rows[t][j] for t in range(r)) for j in range(n)] for i in range(n)]
    kernel = linalg.nullspace(rows, n) if r else [[Fraction(int(i == 0)) for i in range(n)]]
    z = kernel[int(rng.integers(0, len(kernel)))]
    w = [int(v) for v in rng.integers(-2, 3, size=r)]
    s = int(rng.choice([-2, -1, 1, 2]))
    b = [sum(rows[t][i] * w[t] for t in range(r)) + s * z[i] for i in range(n)]
    return QuadraticForm.from_lists(A, b, int(rng.integers(-3, 4)))


def _check_flat_quadratics(cases, seed):
    rng = np.random.default_rng(seed)
    for case in range(cases):
        q = _flat_quadratic(rng, diagonal=case % 3 == 0)
        assert not q.has_critical_point()
        f = q.to_polynomial()

        nf = quadratic_normal_form(q)
        normal = normal_form_connection(nf)
        assert curvature(normal).is_zero()
        assert verify_hessian_target(normal_form_polynomial(nf), normal).verified

        conn = construct_quadratic_flat(q)
        assert conn.is_constant()
        if conn.exact:
            assert curvature(conn).is_zero()
            assert verify_hessian_target(f, conn).verified
        else:
            assert verify_hessian_target(f, conn, samples=20, seed=case).verified
        report = lc_check(conn, [0] * q.n)
        assert report.verdict == LCVerdict.ALL_SIGNATURES, (q, report.notes)


def test_random_flat_quadratics():
    _check_flat_quadratics(30, seed=0)


@pytest.mark.slow
def test_random_flat_quadratics_full():
    _check_flat_quadratics(200, seed=1)
