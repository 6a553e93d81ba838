"""Floating-point oracle: geodesic integration, convexity along geodesics, sampled Hessian PSD checks"""
import logging
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from gconvex.config import get_settings
from gconvex.engine.connection import CompiledConnection, Connection, hessian_under
from gconvex.engine.polycore import FloatPolynomial, FloatRatExpr, Polynomial
from gconvex.exceptions import DimensionMismatch, InvalidArgument, NonFinite, PoleEncountered
from gconvex.utils import format_float

logger = logging.getLogger(__name__)


# ============================================================================
# GEODESIC INTEGRATION
# ============================================================================

@dataclass(frozen=True)
class GeodesicPath:
    times: np.ndarray
    positions: np.ndarray
    velocities: np.ndarray

    @property
    def n(self) -> int:
        return self.positions.shape[1]

    @property
    def steps(self) -> int:
        return len(self.times) - 1

    @property
    def endpoint(self) -> np.ndarray:
        return self.positions[-1]

    def to_dict(self) -> Dict[str, Any]:
        return {
            "steps": self.steps,
            "horizon": format_float(self.times[-1]),
            "start": [format_float(v) for v in self.positions[0]],
            "end": [format_float(v) for v in self.positions[-1]],
            "end_velocity": [format_float(v) for v in self.velocities[-1]],
        }


def _geodesic_rhs(compiled: CompiledConnection, pole_epsilon: float):
    n = compiled.n

    def rhs(t: float, state: np.ndarray) -> np.ndarray:
        x, v = state[:n], state[n:]
        gamma, smallest = compiled(x)
        if smallest < pole_epsilon:
            raise PoleEncountered(f"Christoffel denominator {smallest:.3e} near x = {x.tolist()} at t = {t:.6g}", time=t)
        acceleration = -np.einsum("kij,i,j->k", gamma, v, v)
        return np.concatenate([v, acceleration])

    return rhs


def integrate_geodesic(
    conn: Connection,
    x0: Sequence[float],
    v0: Sequence[float],
    T: Optional[float] = None,
    steps: Optional[int] = None,
) -> GeodesicPath:
    """
    Classical RK4 on ẋ = v, v̇^k = −Γ^k_ij v^i v^j with step T/steps

    Args:
        conn: Connection
        x0: Initial position
        v0: Initial velocity
        T: Horizon (settings.geodesic_horizon when omitted)
        steps: Number of RK4 steps (settings.geodesic_steps when omitted)

    Returns:
        GeodesicPath on the uniform grid

    Raises:
        PoleEncountered: A Christoffel denominator fell below pole_epsilon
        NonFinite: The state overflowed
    """
    settings = get_settings()
    T = settings.geodesic_horizon if T is None else float(T)
    steps = settings.geodesic_steps if steps is None else int(steps)
    if steps < 1 or T <= 0:
        raise InvalidArgument(f"Need steps ≥ 1 and T > 0, got steps={steps}, T={T}")
    n = conn.n
    if len(x0) != n or len(v0) != n:
        raise DimensionMismatch(f"Initial data must have {n} coordinates")

    rhs = _geodesic_rhs(CompiledConnection(conn), settings.pole_epsilon)
    h = T / steps
    state = np.concatenate([np.asarray(x0, dtype=float), np.asarray(v0, dtype=float)])
    states = [state.copy()]
    for step in range(steps):
        t = step * h
        k_1 = rhs(t, state)
        k_2 = rhs(t + h / 2, state + h / 2 * k_1)
        k_3 = rhs(t + h / 2, state + h / 2 * k_2)
        k_4 = rhs(t + h, state + h * k_3)
        state = state + h * (k_1 + 2 * k_2 + 2 * k_3 + k_4) / 6
        if not np.all(np.isfinite(state)):
            raise NonFinite(f"Geodesic state is not finite at t = {t + h:.6g}")
        states.append(state.copy())

    states = np.array(states)
    return GeodesicPath(
        times=np.linspace(0.0, T, steps + 1),
        positions=states[:, :n],
        velocities=states[:, n:],
    )


# ============================================================================
# CONVEXITY ALONG A PATH
# ============================================================================

@dataclass(frozen=True)
class ConvexityResult:
    convex: bool
    min_second_difference: float
    affine_residual: float
    scale: float

    def to_dict(self) -> Dict[str, Any]:
        return {
            "convex": self.convex,
            "min_second_difference": format_float(self.min_second_difference),
            "affine_residual": format_float(self.affine_residual),
            "scale": format_float(self.scale),
        }


def convexity_along(f: Polynomial, path: GeodesicPath, tol: Optional[float] = None) -> ConvexityResult:
    """
    Centered second differences of f∘γ on the grid, compared with −tol·scale

    ``affine_residual`` is the largest |second difference| relative to scale,
    which is ≈ 0 when f∘γ is affine.
    """
    if f.nvars != path.n:
        raise DimensionMismatch(f"f has {f.nvars} variables, path lives in dimension {path.n}")
    tol = get_settings().tolerance if tol is None else tol
    evaluate = FloatPolynomial(f)
    values = np.array([evaluate(x) for x in path.positions])
    scale = max(1.0, float(np.max(np.abs(values))))
    if len(values) < 3:
        return ConvexityResult(True, 0.0, 0.0, scale)
    second = values[:-2] - 2 * values[1:-1] + values[2:]
    smallest = float(np.min(second))
    return ConvexityResult(
        convex=smallest >= -tol * scale,
        min_second_difference=smallest,
        affine_residual=float(np.max(np.abs(second))) / scale,
        scale=scale,
    )


# ============================================================================
# SAMPLED HESSIAN PSD
# ============================================================================

@dataclass(frozen=True)
class HessianSampleReport:
    samples: int
    violations: int
    skipped: int
    worst_eigenvalue: float
    worst_point: Optional[Tuple[float, ...]] = None

    def to_dict(self) -> Dict[str, Any]:
        return {
            "samples": self.samples,
            "violations": self.violations,
            "skipped": self.skipped,
            "worst_eigenvalue": format_float(self.worst_eigenvalue),
            "worst_point": None if self.worst_point is None else [format_float(v) for v in self.worst_point],
        }


def sample_hessian_psd(
    f: Polynomial,
    conn: Connection,
    box: float = 1.0,
    N: Optional[int] = None,
    tol: Optional[float] = None,
    seed: Optional[int] = None,
) -> HessianSampleReport:
    """Smallest eigenvalue of Hess_∇ f at N uniform points of [−box, box]^n"""
    settings = get_settings()
    N = settings.hessian_samples if N is None else N
    tol = settings.tolerance if tol is None else tol
    rng = np.random.default_rng(settings.seed if seed is None else seed)
    n = f.nvars

    hessian = [[FloatRatExpr(e) for e in row] for row in hessian_under(f, conn)]
    compiled = CompiledConnection(conn)
    violations, skipped = 0, 0
    worst, worst_point = np.inf, None
    for _ in range(N):
        x = rng.uniform(-box, box, size=n)
        _, smallest = compiled(x)
        if smallest < settings.sample_pole_epsilon:
            skipped += 1
            continue
        H = np.zeros((n, n))
        pole = False
        for i in range(n):
            for j in range(i, n):
                num, den = hessian[i][j].parts(x)
                if abs(den) < settings.sample_pole_epsilon:
                    pole = True
                    break
                H[i, j] = H[j, i] = num / den
            if pole:
                break
        if pole:
            skipped += 1
            continue
        lowest = float(np.linalg.eigvalsh(H)[0])
        if lowest < worst:
            worst, worst_point = lowest, tuple(float(v) for v in x)
        if lowest < -tol * np.linalg.norm(H):
            violations += 1
    if worst_point is None:
        worst = 0.0
    logger.debug(f"Hessian sampling: {violations} violations, {skipped} skipped of {N}")
    return HessianSampleReport(N, violations, skipped, worst, worst_point)


# ============================================================================
# SEEDED GEODESIC BATCHES
# ============================================================================

@dataclass(frozen=True)
class GeodesicBatchReport:
    count: int
    passed: int
    failed: int
    poles: int
    worst_second_difference: float
    failures: Tuple[int, ...] = field(default=())

    @property
    def all_convex(self) -> bool:
        return self.failed == 0

    def to_dict(self) -> Dict[str, Any]:
        return {
            "count": self.count,
            "passed": self.passed,
            "failed": self.failed,
            "poles": self.poles,
            "all_convex": self.all_convex,
            "worst_second_difference": format_float(self.worst_second_difference),
            "failures": list(self.failures),
        }


def random_geodesic_checks(
    f: Polynomial,
    conn: Connection,
    count: int = 100,
    seed: Optional[int] = None,
    box: float = 1.0,
    speed: float = 1.0,
    T: Optional[float] = None,
    steps: Optional[int] = None,
    tol: Optional[float] = None,
) -> GeodesicBatchReport:
    """
    convexity_along on ``count`` geodesics with x0, v0 uniform in boxes

    Task i draws from child i of SeedSequence(seed), so results do not
    depend on execution order.

    Raises:
        InvalidArgument: Negative seed or count
    """
    seed = get_settings().seed if seed is None else seed
    if seed < 0 or count < 0:
        raise InvalidArgument(f"Need seed ≥ 0 and count ≥ 0, got seed={seed}, count={count}")
    n = f.nvars
    passed, poles = 0, 0
    failures: List[int] = []
    worst = np.inf
    children = np.random.SeedSequence(seed).spawn(count)
    for index, child in enumerate(children):
        rng = np.random.default_rng(child)
        x0 = rng.uniform(-box, box, size=n)
        v0 = rng.uniform(-speed, speed, size=n)
        try:
            path = integrate_geodesic(conn, x0, v0, T=T, steps=steps)
        except PoleEncountered:
            poles += 1
            continue
        result = convexity_along(f, path, tol=tol)
        worst = min(worst, result.min_second_difference)
        if result.convex:
            passed += 1
        else:
            failures.append(index)
    return GeodesicBatchReport(
        count=count,
        passed=passed,
        failed=len(failures),
        poles=poles,
        worst_second_difference=0.0 if worst == np.inf else worst,
        failures=tuple(failures),
    )
