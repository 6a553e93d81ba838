"""Torsion-free connections, Hessians under a connection and certificate constructors"""
import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from gconvex.config import get_settings
from gconvex.engine.classify import QuadraticForm, has_critical_point
from gconvex.engine.polycore import (
    FloatRatExpr,
    Polynomial,
    RatExpr,
    as_ratexpr,
    default_names,
    euclidean_hessian,
    gradient,
    parse_rational_expression,
)
from gconvex.exceptions import (
    CriticalPointDetected,
    DimensionMismatch,
    HasCriticalPoint,
    InvalidArgument,
    NumericalFailure,
)
from gconvex.utils import format_float, format_rational

logger = logging.getLogger(__name__)

Index = Tuple[int, int, int]
Target = Optional[Sequence[Sequence[Union[RatExpr, Polynomial, int, Fraction]]]]


# ============================================================================
# CONNECTION
# ============================================================================

@dataclass(frozen=True)
class Connection:
    """
    Christoffel symbols gamma[i][j][k] = Γ^k_{ij}, symmetric in (i, j)

    ``exact`` is False when the symbols are dyadic images of floating
    results (e.g. after an orthogonal pullback); symbolic verification is
    then replaced by sampling.
    """
    n: int
    gamma: Tuple[Tuple[Tuple[RatExpr, ...], ...], ...]
    exact: bool = True
    label: str = ""

    def __post_init__(self):
        n = self.n
        if len(self.gamma) != n or any(len(row) != n or any(len(c) != n for c in row) for row in self.gamma):
            raise DimensionMismatch(f"Christoffel array must be {n}×{n}×{n}")
        for i in range(n):
            for j in range(i + 1, n):
                for k in range(n):
                    if self.gamma[i][j][k] != self.gamma[j][i][k]:
                        raise InvalidArgument(f"Γ^{k + 1}_{{{i + 1}{j + 1}}} is not symmetric in its lower indices")

    @classmethod
    def zero(cls, n: int) -> "Connection":
        zero = RatExpr.zero(n)
        return cls(n, tuple(tuple(tuple(zero for _ in range(n)) for _ in range(n)) for _ in range(n)))

    @classmethod
    def from_symbols(cls, n: int, symbols: Dict[Index, Any], exact: bool = True, label: str = "") -> "Connection":
        """Build from {(i, j, k): Γ^k_ij} with 0-based indices; the (j, i, k) entries are filled in"""
        grid = [[[RatExpr.zero(n) for _ in range(n)] for _ in range(n)] for _ in range(n)]
        for (i, j, k), value in symbols.items():
            if not all(0 <= t < n for t in (i, j, k)):
                raise InvalidArgument(f"Index {(i + 1, j + 1, k + 1)} out of range for n = {n}")
            expr = _to_ratexpr(value, n)
            grid[i][j][k] = expr
            grid[j][i][k] = expr
        return cls(n, tuple(tuple(tuple(c) for c in row) for row in grid), exact=exact, label=label)

    def symbol(self, i: int, j: int, k: int) -> RatExpr:
        return self.gamma[i][j][k]

    def nonzero_symbols(self) -> List[Tuple[int, int, int, RatExpr]]:
        out = []
        for i in range(self.n):
            for j in range(i, self.n):
                for k in range(self.n):
                    if not self.gamma[i][j][k].is_zero():
                        out.append((i, j, k, self.gamma[i][j][k]))
        return out

    def is_zero(self) -> bool:
        return not self.nonzero_symbols()

    def is_constant(self) -> bool:
        return all(e.is_constant() for _, _, _, e in self.nonzero_symbols())

    def to_dict(self, names: Optional[Sequence[str]] = None) -> Dict[str, Any]:
        names = list(names) if names else default_names(self.n)
        return {
            "n": self.n,
            "exact": self.exact,
            "variables": names,
            "symbols": [
                {"i": i + 1, "j": j + 1, "k": k + 1, "expr": e.to_text(names)}
                for i, j, k, e in self.nonzero_symbols()
            ],
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "Connection":
        """Inverse of to_dict; indices are 1-based"""
        try:
            n = int(data["n"])
            names = data.get("variables") or default_names(n)
            symbols = {}
            for entry in data.get("symbols", []):
                key = (int(entry["i"]) - 1, int(entry["j"]) - 1, int(entry["k"]) - 1)
                symbols[key] = parse_rational_expression(str(entry["expr"]), names)
        except (KeyError, TypeError, ValueError) as e:
            raise InvalidArgument(f"Malformed connection: {e}")
        return cls.from_symbols(n, symbols, exact=bool(data.get("exact", True)), label=data.get("label", ""))


def _to_ratexpr(value: Any, n: int) -> RatExpr:
    if isinstance(value, RatExpr):
        return value
    if isinstance(value, Polynomial):
        return as_ratexpr(value)
    if isinstance(value, str):
        return parse_rational_expression(value, default_names(n))
    return RatExpr.constant(n, Fraction(value))


class CompiledConnection:
    """Float evaluation of all Christoffel symbols at a point"""

    def __init__(self, conn: Connection):
        self.n = conn.n
        self._entries = [(i, j, k, FloatRatExpr(e)) for i, j, k, e in conn.nonzero_symbols()]

    def __call__(self, x: np.ndarray) -> Tuple[np.ndarray, float]:
        """Γ array indexed [k, i, j] and the smallest |denominator| seen"""
        gamma = np.zeros((self.n, self.n, self.n))
        smallest = np.inf
        for i, j, k, expr in self._entries:
            num, den = expr.parts(x)
            smallest = min(smallest, abs(den))
            value = num / den if den != 0.0 else np.inf
            gamma[k, i, j] = value
            gamma[k, j, i] = value
        return gamma, smallest


# ============================================================================
# HESSIAN UNDER A CONNECTION
# ============================================================================

def hessian_under(f: Polynomial, conn: Connection) -> List[List[RatExpr]]:
    """(Hess_∇ f)_ij = ∂_i∂_j f − Σ_k Γ^k_ij ∂_k f"""
    if f.nvars != conn.n:
        raise DimensionMismatch(f"f has {f.nvars} variables, connection has dimension {conn.n}")
    n = f.nvars
    grad = gradient(f)
    hess = euclidean_hessian(f)
    out = [[None] * n for _ in range(n)]
    for i in range(n):
        for j in range(i, n):
            entry = as_ratexpr(hess[i][j])
            for k in range(n):
                gamma = conn.gamma[i][j][k]
                if not gamma.is_zero() and not grad[k].is_zero():
                    entry = entry - gamma * grad[k]
            out[i][j] = out[j][i] = entry
    return out


def _target_matrix(target: Target, n: int) -> List[List[RatExpr]]:
    if target is None:
        return [[RatExpr.zero(n)] * n for _ in range(n)]
    if len(target) != n or any(len(row) != n for row in target):
        raise DimensionMismatch(f"Target must be {n}×{n}")
    matrix = [[_to_ratexpr(v, n) for v in row] for row in target]
    if any(matrix[i][j] != matrix[j][i] for i in range(n) for j in range(n)):
        raise InvalidArgument("Target Hessian must be symmetric")
    return matrix


# ============================================================================
# CONSTRUCTION FOR FUNCTIONS WITHOUT CRITICAL POINTS
# ============================================================================

def construct_no_critical(f: Polynomial, target: Target = None) -> Connection:
    """
    Γ^k_ij = (f_ij − a_ij) f_k / Σ_l f_l², which makes Hess_∇ f equal the target

    The denominators vanish exactly on the critical set of f.

    Raises:
        CriticalPointDetected: f is in a supported class and has a critical point
    """
    n = f.nvars
    critical = has_critical_point(f)
    if critical:
        raise CriticalPointDetected(f"{f} has a critical point; the construction would be singular")
    if critical is None:
        logger.warning(f"Critical points of {f} are not decidable here; Γ may have poles")

    grad = gradient(f)
    hess = euclidean_hessian(f)
    targets = _target_matrix(target, n)
    norm_squared = Polynomial.zero(n)
    for g in grad:
        norm_squared = norm_squared + g * g

    symbols: Dict[Index, RatExpr] = {}
    for i in range(n):
        for j in range(i, n):
            excess = as_ratexpr(hess[i][j]) - targets[i][j]
            if excess.is_zero():
                continue
            scaled = excess / as_ratexpr(norm_squared)
            for k in range(n):
                if not grad[k].is_zero():
                    symbols[(i, j, k)] = scaled * grad[k]
    return Connection.from_symbols(n, symbols, label="no-critical-point")


# ============================================================================
# QUADRATIC NORMAL FORM
# ============================================================================

@dataclass(frozen=True)
class NormalForm:
    """
    f(Qᵀ(y − v)) = Σ_{p<r} μ_p y_p² + Σ_{j≥r} ν_j y_j + κ

    Entries are stored as Fractions; when ``exact`` is False they are the
    exact binary values of floating results.
    """
    Q: Tuple[Tuple[Fraction, ...], ...]
    v: Tuple[Fraction, ...]
    mu: Tuple[Fraction, ...]
    nu: Tuple[Fraction, ...]
    kappa: Fraction
    r: int
    exact: bool

    @property
    def n(self) -> int:
        return len(self.v)

    @property
    def Q_array(self) -> np.ndarray:
        return np.array([[float(x) for x in row] for row in self.Q])

    def orthogonality_error(self) -> float:
        q = self.Q_array
        return float(np.max(np.abs(q.T @ q - np.eye(self.n)))) if self.n else 0.0

    def pivot(self) -> int:
        """Global coordinate index of the ν with the largest magnitude"""
        return self.r + max(range(len(self.nu)), key=lambda j: abs(self.nu[j]))

    def to_y(self, x: np.ndarray) -> np.ndarray:
        return self.Q_array @ np.asarray(x, dtype=float) + np.array([float(t) for t in self.v])

    def to_x(self, y: np.ndarray) -> np.ndarray:
        return self.Q_array.T @ (np.asarray(y, dtype=float) - np.array([float(t) for t in self.v]))

    def to_dict(self) -> Dict[str, Any]:
        return {
            "Q": [[format_float(float(x)) for x in row] for row in self.Q],
            "v": [format_float(float(x)) for x in self.v],
            "mu": [format_float(float(x)) for x in self.mu],
            "nu": [format_float(float(x)) for x in self.nu],
            "kappa": format_float(float(self.kappa)),
            "r": self.r,
            "exact": self.exact,
        }


def _eigen_basis(q: QuadraticForm, zero_ratio: float) -> Tuple[List[List[Fraction]], List[Fraction], bool]:
    """Rows of Q (eigenvectors, nonzero eigenvalues first) and the eigenvalues"""
    n = q.n
    A = q.A
    if all(not A[i][j] for i in range(n) for j in range(n) if i != j):
        order = [i for i in range(n) if A[i][i]] + [i for i in range(n) if not A[i][i]]
        rows = [[Fraction(int(c == i)) for c in range(n)] for i in order]
        return rows, [A[i][i] for i in order], True

    matrix = np.array([[float(x) for x in row] for row in A])
    try:
        eigenvalues, vectors = np.linalg.eigh(matrix)
    except np.linalg.LinAlgError as e:
        raise NumericalFailure(f"Symmetric eigensolve failed: {e}")
    scale = max(np.linalg.norm(matrix), 1e-300)
    nonzero = [i for i in range(n) if abs(eigenvalues[i]) > zero_ratio * scale]
    zero = [i for i in range(n) if i not in nonzero]
    order = nonzero + zero
    rows = [[Fraction(float(x)) for x in vectors[:, i]] for i in order]
    values = [Fraction(float(eigenvalues[i])) if i in nonzero else Fraction(0) for i in order]
    return rows, values, False


def quadratic_normal_form(
    q: QuadraticForm,
    zero_ratio: Optional[float] = None,
    allow_critical: bool = False,
) -> NormalForm:
    """
    Orthogonal change of variables and completion of squares

    Args:
        q: Quadratic form
        zero_ratio: Eigenvalues below zero_ratio·‖A‖ count as zero
        allow_critical: Also normalize quadratics that have critical points

    Raises:
        HasCriticalPoint: rank([A|b]) = rank(A) and allow_critical is False
        NumericalFailure: Eigensolve failure or no usable linear coefficient
    """
    critical = q.has_critical_point()
    if critical and not allow_critical:
        raise HasCriticalPoint("Quadratic has a critical point; no normal form with a linear part")
    zero_ratio = get_settings().eigen_zero_ratio if zero_ratio is None else zero_ratio
    rows, eigenvalues, exact = _eigen_basis(q, zero_ratio)
    r = sum(1 for lam in eigenvalues if lam)
    rotated_b = [sum(qc * bc for qc, bc in zip(row, q.b)) for row in rows]

    mu = tuple(lam / 2 for lam in eigenvalues[:r])
    v = [Fraction(0)] * q.n
    kappa = q.c
    for p in range(r):
        v[p] = rotated_b[p] / (2 * mu[p])
        kappa -= rotated_b[p] ** 2 / (4 * mu[p])
    nu = tuple(rotated_b[r:])
    if critical:
        nu = tuple(Fraction(0) for _ in nu)
    elif not any(nu):
        raise NumericalFailure("Linear part vanished in the rotated coordinates")
    elif not exact:
        biggest = max(abs(x) for x in nu)
        if biggest <= zero_ratio * max(1, max(abs(x) for x in q.b)):
            raise NumericalFailure("Linear part is numerically zero in the rotated coordinates")
    return NormalForm(
        Q=tuple(tuple(row) for row in rows),
        v=tuple(v),
        mu=mu,
        nu=nu,
        kappa=kappa,
        r=r,
        exact=exact,
    )


def normal_form_polynomial(nf: NormalForm) -> Polynomial:
    """Σ μ_p y_p² + Σ ν_j y_j + κ as an exact polynomial in y"""
    n = nf.n
    poly = Polynomial.constant(n, nf.kappa)
    for p, m in enumerate(nf.mu):
        poly = poly + Polynomial.variable(n, p) ** 2 * m
    for offset, value in enumerate(nf.nu):
        poly = poly + Polynomial.variable(n, nf.r + offset) * value
    return poly


def normal_form_connection(nf: NormalForm) -> Connection:
    """Constant symbols Γ^{j0}_pp = 2μ_p / ν_{j0}, all others zero"""
    n = nf.n
    if nf.r == 0:
        return Connection.zero(n)
    j0 = nf.pivot()
    nu = nf.nu[j0 - nf.r]
    symbols = {(p, p, j0): 2 * m / nu for p, m in enumerate(nf.mu)}
    return Connection.from_symbols(n, symbols, exact=True, label="normal-form-flat")


def pullback_constant(conn: Connection, Q: Sequence[Sequence[Fraction]], exact: bool = True) -> Connection:
    """
    Symbols in x for the affine change y = Qx + v, with constant Γ̃ in y

    Γ^k_ij = Σ Q_ck Γ̃^c_ab Q_ai Q_bj; an affine change adds no inhomogeneous term.
    """
    if not conn.is_constant():
        raise InvalidArgument("Only constant Christoffel symbols can be pulled back here")
    n = conn.n
    values = {
        (a, b, c): e.constant_value()
        for a, b, c, e in conn.nonzero_symbols()
    }
    full = {}
    for (a, b, c), value in values.items():
        full[(a, b, c)] = value
        full[(b, a, c)] = value
    symbols: Dict[Index, Fraction] = {}
    for i in range(n):
        for j in range(i, n):
            for k in range(n):
                total = Fraction(0)
                for (a, b, c), value in full.items():
                    total += Q[c][k] * value * Q[a][i] * Q[b][j]
                if total:
                    symbols[(i, j, k)] = total
    return Connection.from_symbols(n, symbols, exact=exact and conn.exact, label=conn.label)


def construct_quadratic_flat(q: QuadraticForm) -> Connection:
    """
    Flat connection with constant symbols making Hess_∇ f ≡ 0

    Raises:
        HasCriticalPoint: The quadratic has a critical point
    """
    nf = quadratic_normal_form(q)
    if nf.r == 0:
        return Connection.zero(q.n)
    flat = normal_form_connection(nf)
    result = pullback_constant(flat, nf.Q, exact=nf.exact)
    logger.debug(f"Flat connection with {len(result.nonzero_symbols())} nonzero symbols (exact={nf.exact})")
    return result


# ============================================================================
# VERIFICATION
# ============================================================================

@dataclass(frozen=True)
class HessianCheck:
    verified: bool
    exact: bool
    residual: Optional[float] = None
    nonzero_entries: Tuple[Tuple[int, int, str], ...] = ()
    samples: int = 0

    def to_dict(self) -> Dict[str, Any]:
        return {
            "verified": self.verified,
            "exact": self.exact,
            "residual": None if self.residual is None else format_float(self.residual),
            "nonzero_entries": [
                {"i": i + 1, "j": j + 1, "expr": text} for i, j, text in self.nonzero_entries
            ],
            "samples": self.samples,
        }


def verify_hessian_target(
    f: Polynomial,
    conn: Connection,
    target: Target = None,
    samples: Optional[int] = None,
    seed: Optional[int] = None,
    box: float = 1.0,
) -> HessianCheck:
    """
    Symbolic zero test of Hess_∇ f − target for exact connections; for
    floating connections, the largest sampled entry relative to the
    magnitude of the Euclidean Hessian
    """
    settings = get_settings()
    n = f.nvars
    difference = [
        [h - t for h, t in zip(hrow, trow)]
        for hrow, trow in zip(hessian_under(f, conn), _target_matrix(target, n))
    ]
    nonzero = tuple(
        (i, j, difference[i][j].to_text())
        for i in range(n) for j in range(i, n)
        if not difference[i][j].is_zero()
    )
    if conn.exact:
        return HessianCheck(verified=not nonzero, exact=True, nonzero_entries=nonzero)

    samples = settings.hessian_samples if samples is None else samples
    rng = np.random.default_rng(settings.seed if seed is None else seed)
    compiled = [[FloatRatExpr(e) for e in row] for row in difference]
    euclid = [[FloatRatExpr(as_ratexpr(e)) for e in row] for row in euclidean_hessian(f)]
    residual, scale = 0.0, 1.0
    for _ in range(samples):
        x = rng.uniform(-box, box, size=n)
        for i in range(n):
            for j in range(i, n):
                num, den = compiled[i][j].parts(x)
                residual = max(residual, abs(num / den))
                enum, eden = euclid[i][j].parts(x)
                scale = max(scale, abs(enum / eden))
    verified = residual <= settings.hessian_residual * scale
    return HessianCheck(
        verified=verified,
        exact=False,
        residual=residual,
        nonzero_entries=nonzero,
        samples=samples,
    )


def metric_exponent_derivative(conn: Connection) -> RatExpr:
    """λ' = 2Γ for a one-dimensional connection, the Levi-Civita connection of e^λ dx²"""
    if conn.n != 1:
        raise DimensionMismatch("Only one-dimensional connections carry a metric exponent")
    return conn.gamma[0][0][0] * 2


def symbols_table(conn: Connection, names: Optional[Sequence[str]] = None) -> List[Dict[str, Any]]:
    """Nonzero symbols with exact text and float value when constant"""
    rows = []
    for i, j, k, e in conn.nonzero_symbols():
        row = {"i": i + 1, "j": j + 1, "k": k + 1, "expr": e.to_text(names)}
        if e.is_constant():
            row["value"] = format_float(float(e.constant_value()))
            row["rational"] = format_rational(e.constant_value())
        rows.append(row)
    return rows
