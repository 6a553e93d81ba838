"""Levi-Civita check command"""
import logging
from typing import Any, Dict, List, Optional, Union

from gconvex.commands.registry import register_command, register_handler
from gconvex.commands.tools.classify_tools import parse_polynomial
from gconvex.commands.tools.connection_tools import build_connection, load_connection
from gconvex.engine.holonomy import curvature, lc_check
from gconvex.exceptions import InvalidArgument
from gconvex.schemas import HolonomyRequest
from gconvex.utils import format_vector, parse_point

logger = logging.getLogger(__name__)


# ============================================================================
# COMMAND: holonomy
# ============================================================================

register_command(
    "holonomy",
    {
        "description": "Stabilized holonomy algebra at a point and the Levi-Civita verdict",
        "model": HolonomyRequest,
    }
)

@register_handler("holonomy")
async def handle_holonomy(
    point: List[Union[str, int, float]],
    connection: Optional[Dict[str, Any]] = None,
    expr: Optional[str] = None,
    variables: Optional[List[str]] = None,
    seed: Optional[int] = None,
) -> Dict[str, Any]:
    if (connection is None) == (expr is None):
        raise InvalidArgument("Give exactly one of a connection or an expression")
    if connection is not None:
        conn, names = load_connection(connection)
    else:
        f, names = parse_polynomial(expr, variables)
        conn, _ = build_connection(f, names)

    x = parse_point(point)
    report = lc_check(conn, x, seed=seed)
    logger.info(f"🧭 Holonomy at {format_vector(x)}: {report.verdict.value} (dim {report.dim})")
    return {
        "connection": conn.to_dict(names),
        "point": format_vector(x),
        "flat": not curvature(conn).components,
        "lc_report": report.to_dict(),
        "seed": seed,
    }
