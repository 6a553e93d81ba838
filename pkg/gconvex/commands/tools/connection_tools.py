"""Connection construction command"""
import logging
from typing import Any, Dict, List, Optional, Tuple

from gconvex.commands.registry import register_command, register_handler
from gconvex.commands.tools.classify_tools import parse_polynomial
from gconvex.engine.classify import has_critical_point, to_quadratic_form
from gconvex.engine.connection import (
    Connection,
    construct_no_critical,
    construct_quadratic_flat,
    metric_exponent_derivative,
    quadratic_normal_form,
    symbols_table,
    verify_hessian_target,
)
from gconvex.engine.polycore import Polynomial, RatExpr, default_names, parse_rational_expression
from gconvex.exceptions import InvalidArgument, NoConstructor
from gconvex.schemas import ConnectRequest

logger = logging.getLogger(__name__)


def build_connection(
    f: Polynomial,
    names: List[str],
    target: Optional[List[List[RatExpr]]] = None,
) -> Tuple[Connection, Dict[str, Any]]:
    """
    Pick a constructor for f

    Quadratics without critical points get the flat constant connection
    (zero target only); everything else without critical points gets the
    rational construction.

    Raises:
        NoConstructor: f has a critical point, or is constant
    """
    if f.is_constant():
        raise NoConstructor("Constant functions have no gradient to build a connection from")
    details: Dict[str, Any] = {}
    if f.total_degree() <= 2 and target is None:
        q = to_quadratic_form(f)
        if q.has_critical_point():
            raise NoConstructor(f"{f.to_text(names)} is a quadratic with a critical point; no constructor applies")
        details["normal_form"] = quadratic_normal_form(q).to_dict()
        return construct_quadratic_flat(q), details

    if has_critical_point(f):
        raise NoConstructor(f"{f.to_text(names)} has critical points; no constructor applies")
    return construct_no_critical(f, target), details


def load_connection(data: Dict[str, Any]) -> Tuple[Connection, List[str]]:
    """Accept a serialized connection, or a connect report that embeds one; returns the variable names too"""
    if "result" in data and isinstance(data["result"], dict):
        data = data["result"]
    if "connection" in data and isinstance(data["connection"], dict):
        data = data["connection"]
    if "n" not in data:
        raise InvalidArgument("Connection JSON needs an 'n' field")
    conn = Connection.from_dict(data)
    return conn, list(data.get("variables") or default_names(conn.n))


# ============================================================================
# COMMAND: connect
# ============================================================================

register_command(
    "connect",
    {
        "description": "Construct a connection under which the polynomial's Hessian equals a target",
        "model": ConnectRequest,
    }
)

@register_handler("connect")
async def handle_connect(
    expr: str,
    variables: Optional[List[str]] = None,
    target: Optional[List[List[str]]] = None,
    seed: Optional[int] = None,
) -> Dict[str, Any]:
    f, names = parse_polynomial(expr, variables)
    parsed_target = None
    if target is not None:
        parsed_target = [[parse_rational_expression(entry, names) for entry in row] for row in target]
    conn, details = build_connection(f, names, parsed_target)
    check = verify_hessian_target(f, conn, parsed_target, seed=seed)
    logger.info(f"🔧 {conn.label}: verified={check.verified}")

    result: Dict[str, Any] = {
        "variables": names,
        "polynomial": f.to_text(names),
        "constructor": conn.label or "zero",
        "connection": conn.to_dict(names),
        "symbols": symbols_table(conn, names),
        "verification": check.to_dict(),
        "seed": seed,
    }
    result.update(details)
    if conn.n == 1:
        result["metric_exponent_derivative"] = metric_exponent_derivative(conn).to_text(names)
    return result
