"""Classification command"""
from typing import Any, Dict, List, Optional, Tuple

from gconvex.commands.registry import register_command, register_handler
from gconvex.engine.classify import classify, count_isolated_critical_points, separable_partition
from gconvex.engine.polycore import Polynomial, infer_variables, parse_expression
from gconvex.schemas import ClassifyRequest


def parse_polynomial(expr: str, variables: Optional[List[str]] = None) -> Tuple[Polynomial, List[str]]:
    """Parse ``expr`` in the given variable order, inferring one when omitted"""
    names = list(variables) if variables else infer_variables(expr)
    return parse_expression(expr, names), names


# ============================================================================
# COMMAND: classify
# ============================================================================

register_command(
    "classify",
    {
        "description": "Decide g-convexity of a polynomial with a certificate or witness",
        "model": ClassifyRequest,
    }
)

@register_handler("classify")
async def handle_classify(expr: str, variables: Optional[List[str]] = None) -> Dict[str, Any]:
    f, names = parse_polynomial(expr, variables)
    verdict = classify(f)
    blocks = separable_partition(f) if f.nvars > 1 else []
    return {
        "variables": names,
        "polynomial": f.to_text(names),
        "verdict": verdict.to_dict(),
        "separable_blocks": [b.to_dict(names) for b in blocks] if len(blocks) > 1 else [],
        "critical_points": count_isolated_critical_points(f).to_dict(),
    }
