"""Density experiment command"""
from typing import Any, Dict, Optional

from gconvex.commands.registry import register_command, register_handler
from gconvex.config import get_settings
from gconvex.engine.density import (
    FAMILIES,
    monomial_density_exact,
    parse_sweep,
    psd_ball_fraction,
    sample_quadratic,
    sample_separable,
    sample_univariate,
)
from gconvex.exceptions import InvalidArgument
from gconvex.schemas import DensityRequest


def run_density(family: str, n: int, d: int, r: float, trials: int, seed: int, workers: Optional[int]):
    """One report for one parameter set"""
    if family == "univariate":
        return sample_univariate(d, r, trials=trials, seed=seed, workers=workers)
    if family == "quadratic":
        return sample_quadratic(n, r, trials=trials, seed=seed, workers=workers)
    if family == "psdball":
        return psd_ball_fraction(n, trials=trials, seed=seed, workers=workers)
    if family == "separable":
        return sample_separable(n, d, r, trials=trials, seed=seed, workers=workers)
    if family == "monomial":
        return monomial_density_exact(n, d)
    raise InvalidArgument(f"Unknown family {family!r}; expected one of {', '.join(FAMILIES)}")


# ============================================================================
# COMMAND: density
# ============================================================================

register_command(
    "density",
    {
        "description": "Exact or Monte Carlo share of g-convex members of a polynomial family",
        "model": DensityRequest,
    }
)

@register_handler("density")
async def handle_density(
    family: str,
    n: int = 1,
    d: int = 2,
    r: float = 1.0,
    trials: Optional[int] = None,
    seed: Optional[int] = None,
    sweep: Optional[str] = None,
    workers: Optional[int] = None,
) -> Dict[str, Any]:
    settings = get_settings()
    if family not in FAMILIES:
        raise InvalidArgument(f"Unknown family {family!r}; expected one of {', '.join(FAMILIES)}")
    trials = settings.trials if trials is None else trials
    seed = settings.seed if seed is None else seed

    grid = [{"n": n, "d": d}]
    if sweep:
        name, values = parse_sweep(sweep)
        grid = [{"n": n, "d": d, name: value} for value in values]

    reports = [
        run_density(family, p["n"], p["d"], r, trials, seed, workers)
        for p in grid
    ]
    return {
        "family": family,
        "rows": [report.to_dict() for report in reports],
        "csv_rows": [report.to_csv_row() for report in reports],
        "seed": seed,
    }
