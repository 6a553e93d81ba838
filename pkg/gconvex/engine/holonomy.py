"""Curvature, covariant derivatives and the holonomy Lie-algebra test for Levi-Civita connections"""
import logging
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from itertools import product
from typing import Any, Dict, Iterator, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.linalg import null_space

from gconvex.config import get_settings
from gconvex.engine import linalg
from gconvex.engine.connection import Connection
from gconvex.engine.polycore import RatExpr
from gconvex.exceptions import DimensionMismatch, IterationCap, PoleAtPoint
from gconvex.utils import format_matrix

logger = logging.getLogger(__name__)

MatrixLike = Union[List[List[Fraction]], np.ndarray]


# ============================================================================
# TENSOR FIELDS
# ============================================================================

@dataclass(frozen=True, eq=False)
class TensorField:
    """
    A (1, s) tensor field; components[(l, i1, ..., is)] holds the nonzero entries

    The dense component count is n^(s+1); absent keys are zero.
    """
    n: int
    lower: int
    components: Dict[Tuple[int, ...], RatExpr]

    @property
    def component_count(self) -> int:
        return self.n ** (self.lower + 1)

    def component(self, index: Tuple[int, ...]) -> RatExpr:
        value = self.components.get(index)
        return value if value is not None else RatExpr.zero(self.n)

    def is_zero(self) -> bool:
        return not self.components

    def slice_last(self, m: int) -> "TensorField":
        """Fix the last lower index, dropping the valence by one"""
        return TensorField(
            self.n,
            self.lower - 1,
            {idx[:-1]: e for idx, e in self.components.items() if idx[-1] == m},
        )


@dataclass(frozen=True, eq=False)
class CurvatureTensor(TensorField):
    """R^l_{ijk} stored under the key (l, i, j, k)"""

    def endomorphism(self, i: int, j: int) -> TensorField:
        """The End-valued field u ↦ R(∂_i, ∂_j)u as a (1,1) tensor [l, k]"""
        return TensorField(
            self.n,
            1,
            {(l, k): e for (l, a, b, k), e in self.components.items() if a == i and b == j},
        )

    def is_antisymmetric(self) -> bool:
        for (l, i, j, k), e in self.components.items():
            if e + self.component((l, j, i, k)) != 0:
                return False
        return True


def curvature(conn: Connection) -> CurvatureTensor:
    """R^l_{ijk} = ∂_i Γ^l_{jk} − ∂_j Γ^l_{ik} + Σ_t (Γ^t_{jk} Γ^l_{it} − Γ^t_{ik} Γ^l_{jt})"""
    n = conn.n
    g = conn.gamma
    components: Dict[Tuple[int, ...], RatExpr] = {}
    for i in range(n):
        for j in range(i + 1, n):
            for k in range(n):
                for l in range(n):
                    total = g[j][k][l].partial(i) - g[i][k][l].partial(j)
                    for t in range(n):
                        if not g[j][k][t].is_zero() and not g[i][t][l].is_zero():
                            total = total + g[j][k][t] * g[i][t][l]
                        if not g[i][k][t].is_zero() and not g[j][t][l].is_zero():
                            total = total - g[i][k][t] * g[j][t][l]
                    if not total.is_zero():
                        components[(l, i, j, k)] = total
                        components[(l, j, i, k)] = -total
    return CurvatureTensor(n, 3, components)


def covariant_derivative(field: TensorField, conn: Connection) -> TensorField:
    """
    ∇T with the differentiation slot appended last:
    ∂_m T^l_{..} + Γ^l_{mt} T^t_{..} − Σ_a Γ^t_{m i_a} T^l_{..t..}
    """
    if field.n != conn.n:
        raise DimensionMismatch(f"Tensor dimension {field.n} differs from connection dimension {conn.n}")
    n, s = field.n, field.lower
    g = conn.gamma
    out: Dict[Tuple[int, ...], RatExpr] = {}
    for index in product(range(n), repeat=s + 1):
        l, lows = index[0], index[1:]
        for m in range(n):
            total = field.component(index).partial(m)
            for t in range(n):
                gamma = g[m][t][l]
                comp = field.components.get((t,) + lows)
                if comp is not None and not gamma.is_zero():
                    total = total + gamma * comp
            for a in range(s):
                for t in range(n):
                    gamma = g[m][lows[a]][t]
                    comp = field.components.get((l,) + lows[:a] + (t,) + lows[a + 1:])
                    if comp is not None and not gamma.is_zero():
                        total = total - gamma * comp
            if not total.is_zero():
                out[index + (m,)] = total
    return TensorField(n, s + 1, out)


# ============================================================================
# GENERATORS
# ============================================================================

Label = Tuple[int, ...]


def _generator_fields(conn: Connection, levels: int) -> Iterator[Tuple[int, List[Tuple[Label, Optional[TensorField]]]]]:
    """
    Yield (order, [(label, End field or None when identically zero)])

    Order j fields are X_{i1,i2,i3..} = ∇_{i_{j+2}} ... ∇_{i3} R(∂_{i1}, ∂_{i2})
    with coordinate fields held fixed and i1 < i2.
    """
    n = conn.n
    R = curvature(conn)
    current: List[Tuple[Label, Optional[TensorField]]] = []
    for i in range(n):
        for j in range(i + 1, n):
            field = R.endomorphism(i, j)
            current.append(((i, j), None if field.is_zero() else field))
    order = 0
    while True:
        yield order, current
        if levels is not None and order >= levels:
            return
        following = []
        for label, field in current:
            derived = None if field is None else covariant_derivative(field, conn)
            for m in range(n):
                if derived is None:
                    following.append((label + (m,), None))
                else:
                    piece = derived.slice_last(m)
                    following.append((label + (m,), None if piece.is_zero() else piece))
        current = following
        order += 1


@dataclass(frozen=True)
class EvaluationPoint:
    values: Tuple[Fraction, ...]
    numeric: bool
    gamma_scale: float

    def evaluate(self, field: Optional[TensorField], n: int) -> MatrixLike:
        if self.numeric:
            out = np.zeros((n, n))
            if field is not None:
                point = [float(v) for v in self.values]
                for (l, k), e in field.components.items():
                    out[l, k] = e.evaluate_float(point)
            return out
        matrix = linalg.zeros(n, n)
        if field is not None:
            for (l, k), e in field.components.items():
                matrix[l][k] = e.evaluate(self.values)
        return matrix


def _prepare_point(conn: Connection, x: Sequence) -> EvaluationPoint:
    if len(x) != conn.n:
        raise DimensionMismatch(f"Point has {len(x)} coordinates, connection dimension is {conn.n}")
    values = tuple(Fraction(v) for v in x)
    numeric = not conn.exact
    eps = get_settings().pole_epsilon
    scale = 1.0
    for i, j, k, e in conn.nonzero_symbols():
        den = e.denominator.evaluate(values)
        if not den or (numeric and abs(float(den)) < eps):
            raise PoleAtPoint(f"Γ^{k + 1}_{{{i + 1}{j + 1}}} = {e} has a pole at {[str(v) for v in values]}")
        scale = max(scale, abs(float(e.numerator.evaluate(values) / den)))
    return EvaluationPoint(values, numeric, scale)


def generators_at(conn: Connection, x: Sequence, k: int) -> List[Tuple[Label, MatrixLike]]:
    """
    Matrices X_{i1,...,i_{j+2}} at x for every order j ≤ k, labels 0-based

    Raises:
        PoleAtPoint: Some Γ has a pole at x
    """
    point = _prepare_point(conn, x)
    out = []
    for _, fields in _generator_fields(conn, k):
        for label, field in fields:
            out.append((label, point.evaluate(field, conn.n)))
    return out


# ============================================================================
# LIE CLOSURE
# ============================================================================

@dataclass(frozen=True)
class LieAlgebraBasis:
    n: int
    matrices: Tuple[Any, ...]
    numeric: bool = False

    @property
    def dim(self) -> int:
        return len(self.matrices)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "dim": self.dim,
            "numeric": self.numeric,
            "matrices": [format_matrix(_as_rows(m)) for m in self.matrices],
        }


def _as_rows(m: MatrixLike) -> List[list]:
    if isinstance(m, np.ndarray):
        return [[float(v) for v in row] for row in m]
    return m


def lie_closure(
    mats: Sequence[MatrixLike],
    numeric: bool = False,
    threshold: Optional[float] = None,
    n: Optional[int] = None,
) -> LieAlgebraBasis:
    """
    Independent subset of ``mats`` extended by brackets until closed

    Exact elimination over Fractions unless ``numeric``; numeric spans use
    an absolute residual threshold.
    """
    if n is None:
        n = len(mats[0]) if mats else 0
    if numeric:
        span = linalg.FloatSpan(get_settings().rank_threshold if threshold is None else threshold)
        mats = [np.asarray(m, dtype=float) for m in mats]
        flat = lambda m: m.ravel()
        commutator = lambda a, b: a @ b - b @ a
    else:
        span = linalg.ExactSpan()
        mats = [[[Fraction(v) for v in row] for row in m] for m in mats]
        flat = linalg.flatten
        commutator = linalg.bracket

    basis: List[MatrixLike] = []
    for m in mats:
        if span.add(flat(m)):
            basis.append(m)
    checked = 0
    while checked < len(basis):
        x = basis[checked]
        for y in basis[:checked]:
            candidate = commutator(x, y)
            if span.add(flat(candidate)):
                basis.append(candidate)
        checked += 1
    return LieAlgebraBasis(n, tuple(basis), numeric)


@dataclass(frozen=True)
class StabilizedAlgebra:
    k_stable: int
    basis: LieAlgebraBasis
    dims: Tuple[int, ...]


def stabilized_algebra(conn: Connection, x: Sequence) -> StabilizedAlgebra:
    """
    Grow 𝔏_0 ⊆ 𝔏_1 ⊆ ... until the first k with 𝔏_{k+1} = 𝔏_k

    Raises:
        PoleAtPoint: Some Γ has a pole at x
        IterationCap: No stabilization by k = n²
    """
    n = conn.n
    point = _prepare_point(conn, x)
    rank_threshold = get_settings().rank_threshold

    def threshold(order: int) -> float:
        return rank_threshold * point.gamma_scale ** (order + 2)

    levels = _generator_fields(conn, None)
    _, fields = next(levels)
    current = lie_closure(
        [point.evaluate(f, n) for _, f in fields if f is not None],
        numeric=point.numeric, threshold=threshold(0), n=n,
    )
    dims = [current.dim]
    for order, fields in levels:
        if order > n * n + 1:
            raise IterationCap(f"Holonomy chain did not stabilize by k = {n * n}")
        new = [point.evaluate(f, n) for _, f in fields if f is not None]
        grown = lie_closure(
            list(current.matrices) + new,
            numeric=point.numeric, threshold=threshold(order), n=n,
        )
        if grown.dim == current.dim:
            logger.debug(f"Holonomy algebra stabilized at k = {order - 1} with dim {current.dim}")
            return StabilizedAlgebra(order - 1, current, tuple(dims))
        current = grown
        dims.append(current.dim)
    raise IterationCap("Generator levels exhausted")


# ============================================================================
# LEVI-CIVITA CHECK
# ============================================================================

class LCVerdict(str, Enum):
    ALL_SIGNATURES = "MetricExistsAllSignatures"
    METRIC_EXISTS = "MetricExists"
    NO_METRIC = "NoMetric"
    INCONCLUSIVE = "Inconclusive"


@dataclass(frozen=True)
class LCReport:
    k_stable: int
    dim: int
    verdict: LCVerdict
    signature: Optional[Tuple[int, int]] = None
    B: Optional[Any] = None
    notes: Tuple[str, ...] = ()
    numeric: bool = False
    dims: Tuple[int, ...] = ()

    def to_dict(self) -> Dict[str, Any]:
        return {
            "k_stable": self.k_stable,
            "dim": self.dim,
            "dims": list(self.dims),
            "verdict": self.verdict.value,
            "signature": list(self.signature) if self.signature else None,
            "B": format_matrix(_as_rows(self.B)) if self.B is not None else None,
            "notes": list(self.notes),
            "numeric": self.numeric,
        }


def _skew_system(basis: LieAlgebraBasis) -> Tuple[List[list], List[Tuple[int, int]]]:
    """Rows of XᵀB + BX = 0 in the unknowns B_ab, a ≤ b"""
    n = basis.n
    unknowns = [(a, b) for a in range(n) for b in range(a, n)]
    position = {}
    for idx, (a, b) in enumerate(unknowns):
        position[(a, b)] = position[(b, a)] = idx
    rows = []
    for X in basis.matrices:
        X = _as_rows(X)
        for i in range(n):
            for j in range(i, n):
                row = [0] * len(unknowns)
                for a in range(n):
                    row[position[(a, j)]] += X[a][i]
                    row[position[(i, a)]] += X[a][j]
                rows.append(row)
    return rows, unknowns


def _symmetric_from(vector: Sequence, unknowns: List[Tuple[int, int]], n: int, numeric: bool):
    if numeric:
        B = np.zeros((n, n))
    else:
        B = linalg.zeros(n, n)
    for value, (a, b) in zip(vector, unknowns):
        B[a][b] = value
        B[b][a] = value
    return B


def lc_check(conn: Connection, x: Sequence, seed: Optional[int] = None) -> LCReport:
    """
    Levi-Civita verdict from the stabilized holonomy algebra at x

    dim 0 gives every signature; dim > (n²−n)/2 rules out every metric;
    otherwise a non-degenerate symmetric B with XᵀB + BX = 0 is searched
    in the nullspace and never guessed.
    """
    settings = get_settings()
    n = conn.n
    algebra = stabilized_algebra(conn, x)
    basis = algebra.basis
    numeric = basis.numeric
    common = dict(k_stable=algebra.k_stable, dim=basis.dim, numeric=numeric, dims=algebra.dims)
    notes: List[str] = []
    if numeric:
        notes.append("numeric: rank decisions used floating thresholds")

    if basis.dim == 0:
        return LCReport(verdict=LCVerdict.ALL_SIGNATURES, notes=tuple(notes), **common)

    if not numeric and any(linalg.trace(m) for m in basis.matrices):
        notes.append("a generator has nonzero trace, so it is not skew for any non-degenerate B")

    if basis.dim > (n * n - n) // 2:
        notes.append(f"dim {basis.dim} exceeds (n²−n)/2 = {(n * n - n) // 2}")
        return LCReport(verdict=LCVerdict.NO_METRIC, notes=tuple(notes), **common)

    rows, unknowns = _skew_system(basis)
    if numeric:
        matrix = np.array([[float(v) for v in row] for row in rows])
        kernel = null_space(matrix, rcond=settings.rank_threshold)
        candidates_basis = [kernel[:, i] for i in range(kernel.shape[1])]
    else:
        candidates_basis = linalg.nullspace(rows, len(unknowns))
    if not candidates_basis:
        notes.append("no nonzero symmetric B satisfies XᵀB + BX = 0")
        return LCReport(verdict=LCVerdict.INCONCLUSIVE, notes=tuple(notes), **common)

    rng = np.random.default_rng(settings.seed if seed is None else seed)
    bound = settings.combination_bound
    attempts = settings.nondegenerate_attempts
    for attempt in range(attempts):
        if attempt < len(candidates_basis):
            vector = candidates_basis[attempt]
        else:
            weights = rng.integers(-bound, bound + 1, size=len(candidates_basis))
            if numeric:
                vector = sum(w * v for w, v in zip(weights, candidates_basis))
            else:
                vector = [
                    sum(int(w) * v[i] for w, v in zip(weights, candidates_basis))
                    for i in range(len(unknowns))
                ]
        B = _symmetric_from(vector, unknowns, n, numeric)
        if numeric:
            eigenvalues = np.linalg.eigvalsh(B)
            biggest = np.max(np.abs(eigenvalues))
            if biggest == 0 or np.min(np.abs(eigenvalues)) <= settings.rank_threshold * biggest:
                continue
            positive = int(np.sum(eigenvalues > 0))
        else:
            if not linalg.determinant(B):
                continue
            positive, _, _ = linalg.inertia(B)
        return LCReport(
            verdict=LCVerdict.METRIC_EXISTS,
            signature=(positive, n - positive),
            B=B,
            notes=tuple(notes),
            **common,
        )

    notes.append(f"all {attempts} sampled elements of the solution space were degenerate")
    return LCReport(verdict=LCVerdict.INCONCLUSIVE, notes=tuple(notes), **common)
