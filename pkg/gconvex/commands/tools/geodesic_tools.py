"""Geodesic verification command"""
import logging
from typing import Any, Dict, List, Optional

from gconvex.commands.registry import register_command, register_handler
from gconvex.commands.tools.classify_tools import parse_polynomial
from gconvex.commands.tools.connection_tools import build_connection, load_connection
from gconvex.config import get_settings
from gconvex.engine.connection import Connection
from gconvex.engine.geoverify import (
    convexity_along,
    integrate_geodesic,
    random_geodesic_checks,
    sample_hessian_psd,
)
from gconvex.exceptions import DimensionMismatch, InvalidArgument
from gconvex.schemas import GeodesicRequest

logger = logging.getLogger(__name__)


# ============================================================================
# COMMAND: geodesic
# ============================================================================

register_command(
    "geodesic",
    {
        "description": "Integrate a geodesic and test convexity of the function along it",
        "model": GeodesicRequest,
    }
)

@register_handler("geodesic")
async def handle_geodesic(
    expr: str,
    variables: Optional[List[str]] = None,
    connection: Optional[Dict[str, Any]] = None,
    construct: bool = False,
    x0: Optional[List[float]] = None,
    v0: Optional[List[float]] = None,
    T: Optional[float] = None,
    steps: Optional[int] = None,
    tol: Optional[float] = None,
    checks: int = 0,
    hessian_samples: int = 0,
    seed: Optional[int] = None,
) -> Dict[str, Any]:
    if connection is not None and construct:
        raise InvalidArgument("Give a connection or ask for construction, not both")
    seed = get_settings().seed if seed is None else seed

    if connection is not None:
        conn, names = load_connection(connection)
        if variables is None:
            variables = names
    f, names = parse_polynomial(expr, variables)
    if construct:
        conn, _ = build_connection(f, names)
    elif connection is None:
        conn = Connection.zero(f.nvars)
    if conn.n != f.nvars:
        raise DimensionMismatch(f"f has {f.nvars} variables, connection has dimension {conn.n}")

    x0 = [0.0] * f.nvars if x0 is None else x0
    v0 = [1.0] * f.nvars if v0 is None else v0
    path = integrate_geodesic(conn, x0, v0, T=T, steps=steps)
    convexity = convexity_along(f, path, tol=tol)
    logger.info(f"📈 Geodesic convexity of {f.to_text(names)}: {convexity.convex}")

    result: Dict[str, Any] = {
        "variables": names,
        "polynomial": f.to_text(names),
        "connection": conn.to_dict(names),
        "path": path.to_dict(),
        "convexity": convexity.to_dict(),
        "seed": seed,
    }
    if checks > 0:
        result["random_geodesics"] = random_geodesic_checks(
            f, conn, count=checks, seed=seed, T=T, steps=steps, tol=tol,
        ).to_dict()
    if hessian_samples > 0:
        result["hessian_samples"] = sample_hessian_psd(
            f, conn, N=hessian_samples, tol=tol, seed=seed,
        ).to_dict()
    return result
