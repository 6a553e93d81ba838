"""Shared fixtures: worked-example connections and small helpers"""
from fractions import Fraction

import pytest

from gconvex.engine.connection import Connection
from gconvex.engine.polycore import parse_expression


def poly(text, names=None):
    """Parse with default names x1..xn (aliases x, y, z allowed)"""
    from gconvex.engine.polycore import infer_variables

    return parse_expression(text, names or infer_variables(text))


def F(value):
    return Fraction(value)


@pytest.fixture
def example_connection():
    """Γ¹₁₁ = 4x₁/(1+4x₁²), Γ²₁₁ = 2/(1+4x₁²), Γ¹₂₂ = 1, Γ²₂₂ = −2x₁"""
    return Connection.from_symbols(2, {
        (0, 0, 0): "4*x1/(1 + 4*x1^2)",
        (0, 0, 1): "2/(1 + 4*x1^2)",
        (1, 1, 0): "1",
        (1, 1, 1): "-2*x1",
    })


@pytest.fixture
def lorentz_connection():
    """Levi-Civita connection of dx1² − (1 + x1²) dx2²"""
    return Connection.from_symbols(2, {
        (0, 1, 1): "x1/(1 + x1^2)",
        (1, 1, 0): "x1",
    })


@pytest.fixture
def sphere_connection():
    """Levi-Civita connection of the conformal metric (1 + |x|²)^-2 δ"""
    p1 = "-2*x1/(1 + x1^2 + x2^2)"
    p2 = "-2*x2/(1 + x1^2 + x2^2)"
    return Connection.from_symbols(2, {
        (0, 0, 0): p1,
        (0, 0, 1): f"-({p2})",
        (0, 1, 0): p2,
        (0, 1, 1): p1,
        (1, 1, 0): f"-({p1})",
        (1, 1, 1): p2,
    })
