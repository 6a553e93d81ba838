"""Formatting helpers for exact rationals and floats in reports"""
from fractions import Fraction
from typing import Iterable, List, Sequence, Union

from gconvex.exceptions import InvalidArgument

Number = Union[int, float, Fraction, str]


def format_rational(value: Union[int, Fraction]) -> str:
    """
    Format a rational as "p/q" (or "p" when integral)

    Args:
        value: Integer or Fraction

    Returns:
        Lossless string form, e.g. "-4/5"
    """
    value = Fraction(value)
    if value.denominator == 1:
        return str(value.numerator)
    return f"{value.numerator}/{value.denominator}"


def parse_rational(value: Number) -> Fraction:
    """
    Parse a rational from "p/q", "p", a decimal string, an int or a float

    Floats are converted through their exact binary value.

    Args:
        value: Input value

    Returns:
        Fraction
    """
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise InvalidArgument(f"Not a rational number: {value!r}")
    if isinstance(value, (int, float)):
        return Fraction(value)
    try:
        return Fraction(str(value).strip())
    except (ValueError, ZeroDivisionError):
        raise InvalidArgument(f"Not a rational number: {value!r}")


def parse_point(text: Union[str, Sequence[Number]]) -> List[Fraction]:
    """Parse "1,0" or ["1", "0"] into a list of Fractions"""
    if isinstance(text, str):
        parts = [p for p in text.replace(" ", "").split(",") if p]
    else:
        parts = list(text)
    return [parse_rational(p) for p in parts]


def format_float(value: float) -> float:
    """Round-trip a float through 17 significant digits for JSON output"""
    return float(f"{float(value):.17g}")


def format_interval(lo: Fraction, hi: Fraction) -> List[str]:
    return [format_rational(lo), format_rational(hi)]


def format_vector(values: Iterable[Union[int, Fraction]]) -> List[str]:
    return [format_rational(v) for v in values]


def format_matrix(rows: Iterable[Iterable]) -> List[List]:
    """Format a matrix of Fractions as strings, or floats as rounded floats"""
    out = []
    for row in rows:
        out.append([
            format_float(v) if isinstance(v, float) else format_rational(v)
            for v in row
        ])
    return out
