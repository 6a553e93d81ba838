from fractions import Fraction

import numpy as np
import pytest
import sympy

from gconvex.engine import linalg
from gconvex.engine.classify import to_quadratic_form, QuadraticForm
from gconvex.engine.connection import Connection, construct_quadratic_flat
from gconvex.engine.holonomy import (
    LCVerdict,
    covariant_derivative,
    curvature,
    generators_at,
    lc_check,
    lie_closure,
    stabilized_algebra,
)
from gconvex.engine.polycore import default_names, parse_expression, parse_rational_expression
from gconvex.exceptions import DimensionMismatch, PoleAtPoint

F = Fraction
X2 = default_names(2)


def _matrix(rows):
    return [[F(v) for v in row] for row in rows]


def _skew_residual(X, B):
    return linalg.matadd(linalg.matmul(linalg.transpose(X), B), linalg.matmul(B, X))


class TestCurvature:
    def test_example_components(self, example_connection):
        R = curvature(example_connection)
        assert R.component((0, 0, 1, 0)) == parse_rational_expression("-2/(1 + 4*x1^2)", X2)
        assert R.component((0, 0, 1, 1)) == parse_rational_expression("4*x1/(1 + 4*x1^2)", X2)
        assert R.is_antisymmetric()

    def test_flat_connection(self):
        conn = Connection.from_symbols(2, {(0, 0, 1): 2})
        assert curvature(conn).is_zero()

    def test_one_dimensional_is_flat(self):
        conn = Connection.from_symbols(1, {(0, 0, 0): "x1^2"})
        assert curvature(conn).is_zero()

    def test_dimension_checked(self, example_connection):
        field = curvature(example_connection).endomorphism(0, 1)
        with pytest.raises(DimensionMismatch):
            covariant_derivative(field, Connection.zero(3))


class TestGenerators:
    def test_example_matrices(self, example_connection):
        generators = dict(generators_at(example_connection, (1, 0), 1))
        assert generators[(0, 1)] == _matrix([[F(-2, 5), F(4, 5)], [F(4, 5), F(-8, 5)]])
        assert generators[(0, 1, 0)] == _matrix([[F(8, 25), F(4, 25)], [F(-16, 25), F(-8, 25)]])
        assert generators[(0, 1, 1)] == _matrix([[F(4, 5), F(2, 5)], [F(-8, 5), F(-4, 5)]])

    def test_label_count(self):
        generators = generators_at(Connection.zero(2), (0, 0), 3)
        assert len(generators) == 1 + 2 + 4 + 8
        assert all(linalg.is_zero_matrix(m) for _, m in generators)

    def test_pole(self):
        conn = Connection.from_symbols(1, {(0, 0, 0): "1/x1"})
        with pytest.raises(PoleAtPoint):
            generators_at(conn, (0,), 0)


class TestLieClosure:
    def test_sl2(self):
        e12 = [[0, 1], [0, 0]]
        e21 = [[0, 0], [1, 0]]
        basis = lie_closure([e12, e21])
        assert basis.dim == 3

    def test_closed_input(self):
        e11 = [[1, 0], [0, 0]]
        basis = lie_closure([e11, [[2, 0], [0, 0]]])
        assert basis.dim == 1

    def test_numeric_matches_exact(self):
        mats = [[[0, 1], [0, 0]], [[0, 0], [1, 0]]]
        assert lie_closure(mats, numeric=True, threshold=1e-9).dim == 3


class TestLeviCivitaCheck:
    def test_example_has_no_metric(self, example_connection):
        report = lc_check(example_connection, (1, 0))
        assert report.k_stable == 1
        assert report.dim == 2
        assert report.verdict == LCVerdict.NO_METRIC
        assert any("nonzero trace" in note for note in report.notes)
        assert report.to_dict()["verdict"] == "NoMetric"

    def test_example_numeric(self, example_connection):
        data = example_connection.to_dict()
        data["exact"] = False
        report = lc_check(Connection.from_dict(data), (1, 0))
        assert report.numeric
        assert report.dim == 2
        assert report.verdict == LCVerdict.NO_METRIC

    def test_flat_quadratic(self):
        conn = construct_quadratic_flat(to_quadratic_form(parse_expression("x1^2 + x2", X2)))
        report = lc_check(conn, (0, 0))
        assert report.dim == 0
        assert report.verdict == LCVerdict.ALL_SIGNATURES

    def test_flat_quadratic_from_floating_eigenbasis(self):
        conn = construct_quadratic_flat(QuadraticForm.from_lists([[1, 1], [1, 1]], [1, 0]))
        report = lc_check(conn, (F(1, 3), F(-1, 2)))
        assert report.verdict == LCVerdict.ALL_SIGNATURES

    def test_lorentzian(self, lorentz_connection):
        report = lc_check(lorentz_connection, (0, 0))
        assert report.k_stable == 0
        assert report.dim == 1
        assert report.verdict == LCVerdict.METRIC_EXISTS
        assert report.signature == (1, 1)
        algebra = stabilized_algebra(lorentz_connection, (0, 0))
        for X in algebra.basis.matrices:
            assert linalg.is_zero_matrix(_skew_residual(X, report.B))

    def test_sphere(self, sphere_connection):
        report = lc_check(sphere_connection, (1, F(1, 2)))
        assert report.dim == 1
        assert report.verdict == LCVerdict.METRIC_EXISTS
        assert report.signature in [(2, 0), (0, 2)]
        algebra = stabilized_algebra(sphere_connection, (1, F(1, 2)))
        for X in algebra.basis.matrices:
            assert linalg.is_zero_matrix(_skew_residual(X, report.B))

    def test_pole(self):
        conn = Connection.from_symbols(2, {(0, 0, 0): "1/x1"})
        with pytest.raises(PoleAtPoint):
            lc_check(conn, (0, 1))


def test_sphere_symbols_and_curvature_match_sympy(sphere_connection):
    x1, x2 = sympy.symbols("x1 x2")
    coords = (x1, x2)
    g = sympy.eye(2) / (1 + x1 ** 2 + x2 ** 2) ** 2
    ginv = g.inv()
    gamma = [[[sympy.simplify(sum(
        ginv[k, l] * (sympy.diff(g[j, l], coords[i]) + sympy.diff(g[i, l], coords[j]) - sympy.diff(g[i, j], coords[l]))
        for l in range(2)
    ) / 2) for k in range(2)] for j in range(2)] for i in range(2)]

    point = {x1: sympy.Integer(1), x2: sympy.Rational(1, 2)}
    ours = (F(1), F(1, 2))

    def as_fraction(value):
        value = sympy.nsimplify(value)
        return F(int(value.p), int(value.q))

    for i in range(2):
        for j in range(2):
            for k in range(2):
                expected = as_fraction(gamma[i][j][k].subs(point))
                assert sphere_connection.symbol(i, j, k).evaluate(ours) == expected

    R = curvature(sphere_connection)
    for l in range(2):
        for k in range(2):
            expr = (
                sympy.diff(gamma[1][k][l], x1) - sympy.diff(gamma[0][k][l], x2)
                + sum(gamma[1][k][t] * gamma[0][t][l] - gamma[0][k][t] * gamma[1][t][l] for t in range(2))
            )
            assert R.component((l, 0, 1, k)).evaluate(ours) == as_fraction(expr.subs(point))


def _in_span(basis, m):
    rows = [linalg.flatten(b) for b in basis]
    return linalg.rank(rows + [linalg.flatten(m)]) == linalg.rank(rows)


def test_lie_closure_is_idempotent():
    rng = np.random.default_rng(0)
    for _ in range(30):
        n = int(rng.integers(2, 4))
        mats = [rng.integers(-2, 3, size=(n, n)).tolist() for _ in range(int(rng.integers(1, 4)))]
        closed = lie_closure(mats, n=n)
        assert lie_closure(list(closed.matrices), n=n).dim == closed.dim
        for a in closed.matrices:
            for b in closed.matrices:
                assert _in_span(closed.matrices, linalg.bracket(a, b))
        for m in mats:
            assert _in_span(closed.matrices, m)


@pytest.mark.parametrize("name,x", [
    ("example_connection", (1, 0)),
    ("lorentz_connection", (1, 0)),
    ("sphere_connection", (1, F(1, 2))),
])
def test_generated_algebras_form_monotone_chain(request, name, x):
    conn = request.getfixturevalue(name)
    stable = stabilized_algebra(conn, x)
    dims = [lie_closure([m for _, m in generators_at(conn, x, k)], n=2).dim for k in range(4)]
    assert dims == sorted(dims)
    for k, dim in enumerate(dims):
        if k < len(stable.dims):
            assert dim == stable.dims[k]
        if stable.k_stable <= k <= stable.k_stable + 1:
            assert dim == stable.basis.dim
