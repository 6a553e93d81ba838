"""Exact linear algebra over Fractions, plus a thresholded float counterpart for spans"""
import math
from fractions import Fraction
from functools import reduce
from itertools import combinations
from typing import List, Optional, Sequence, Tuple

import numpy as np

Matrix = List[List[Fraction]]


def to_fraction_matrix(rows: Sequence[Sequence]) -> Matrix:
    return [[Fraction(v) for v in row] for row in rows]


def identity(n: int) -> Matrix:
    return [[Fraction(int(i == j)) for j in range(n)] for i in range(n)]


def zeros(rows: int, cols: int) -> Matrix:
    return [[Fraction(0)] * cols for _ in range(rows)]


def transpose(m: Sequence[Sequence]) -> List[list]:
    return [list(col) for col in zip(*m)]


def matmul(a: Sequence[Sequence], b: Sequence[Sequence]) -> List[list]:
    bt = transpose(b)
    return [[sum(x * y for x, y in zip(row, col)) for col in bt] for row in a]


def matadd(a, b, scale=1) -> List[list]:
    return [[x + scale * y for x, y in zip(ra, rb)] for ra, rb in zip(a, b)]


def bracket(a, b) -> List[list]:
    """Commutator ab - ba"""
    return matadd(matmul(a, b), matmul(b, a), -1)


def trace(m) -> Fraction:
    return sum((m[i][i] for i in range(len(m))), Fraction(0))


def flatten(m) -> list:
    return [v for row in m for v in row]


def is_zero_matrix(m) -> bool:
    return all(not v for row in m for v in row)


# ============================================================================
# FRACTION-FREE ELIMINATION
# ============================================================================

def _integer_rows(rows: Sequence[Sequence]) -> List[List[int]]:
    out = []
    for row in rows:
        row = [Fraction(v) for v in row]
        lcm = reduce(lambda x, y: x * y // math.gcd(x, y), (v.denominator for v in row), 1)
        out.append([int(v * lcm) for v in row])
    return out


def _bareiss(rows: List[List[int]]) -> Tuple[int, int, List[List[int]]]:
    """Bareiss elimination in place; returns (rank, permutation sign, rows)"""
    m = len(rows)
    n = len(rows[0]) if rows else 0
    previous, rank, sign = 1, 0, 1
    for col in range(n):
        pivot = next((i for i in range(rank, m) if rows[i][col]), None)
        if pivot is None:
            continue
        if pivot != rank:
            rows[pivot], rows[rank] = rows[rank], rows[pivot]
            sign = -sign
        p = rows[rank][col]
        for i in range(rank + 1, m):
            factor = rows[i][col]
            for j in range(col + 1, n):
                rows[i][j] = (rows[i][j] * p - factor * rows[rank][j]) // previous
            rows[i][col] = 0
        previous = p
        rank += 1
        if rank == m:
            break
    return rank, sign, rows


def rank(rows: Sequence[Sequence]) -> int:
    """Exact rank by fraction-free elimination"""
    if not rows or not rows[0]:
        return 0
    return _bareiss(_integer_rows(rows))[0]


def determinant(m: Sequence[Sequence]) -> Fraction:
    n = len(m)
    if n == 0:
        return Fraction(1)
    m = [[Fraction(v) for v in row] for row in m]
    scale = Fraction(1)
    int_rows = []
    for row in m:
        lcm = reduce(lambda x, y: x * y // math.gcd(x, y), (v.denominator for v in row), 1)
        scale /= lcm
        int_rows.append([int(v * lcm) for v in row])
    r, sign, reduced = _bareiss(int_rows)
    if r < n:
        return Fraction(0)
    return sign * reduced[n - 1][n - 1] * scale


def rref(rows: Sequence[Sequence]) -> Tuple[Matrix, List[int]]:
    """Reduced row echelon form over Fractions and the pivot columns"""
    m = [[Fraction(v) for v in row] for row in rows]
    pivots: List[int] = []
    if not m:
        return m, pivots
    ncols = len(m[0])
    r = 0
    for col in range(ncols):
        pivot = next((i for i in range(r, len(m)) if m[i][col]), None)
        if pivot is None:
            continue
        m[r], m[pivot] = m[pivot], m[r]
        lead = m[r][col]
        m[r] = [v / lead for v in m[r]]
        for i in range(len(m)):
            if i != r and m[i][col]:
                factor = m[i][col]
                m[i] = [a - factor * b for a, b in zip(m[i], m[r])]
        pivots.append(col)
        r += 1
        if r == len(m):
            break
    return m[:r], pivots


def nullspace(rows: Sequence[Sequence], ncols: Optional[int] = None) -> Matrix:
    """Basis of {x : M x = 0} over Fractions"""
    if ncols is None:
        ncols = len(rows[0])
    if not rows:
        return identity(ncols)
    reduced, pivots = rref(rows)
    free = [c for c in range(ncols) if c not in pivots]
    basis = []
    for f in free:
        vec = [Fraction(0)] * ncols
        vec[f] = Fraction(1)
        for row, p in zip(reduced, pivots):
            vec[p] = -row[f]
        basis.append(vec)
    return basis


def solve(a: Sequence[Sequence], b: Sequence) -> Optional[List[Fraction]]:
    """One solution of a x = b (free variables set to 0), or None if inconsistent"""
    n = len(a[0]) if a else 0
    augmented = [list(row) + [rhs] for row, rhs in zip(a, b)]
    reduced, pivots = rref(augmented)
    if n in pivots:
        return None
    x = [Fraction(0)] * n
    for row, p in zip(reduced, pivots):
        x[p] = row[n]
    return x


# ============================================================================
# SYMMETRIC MATRICES
# ============================================================================

def principal_minor_sums(a: Sequence[Sequence]) -> List[Fraction]:
    """s_k = sum of all k×k principal minors, for k = 1..n"""
    n = len(a)
    sums = []
    for k in range(1, n + 1):
        total = Fraction(0)
        for subset in combinations(range(n), k):
            total += determinant([[a[i][j] for j in subset] for i in subset])
        sums.append(total)
    return sums


def is_psd(a: Sequence[Sequence]) -> bool:
    """Exact positive-semidefiniteness of a symmetric rational matrix"""
    return all(s >= 0 for s in principal_minor_sums(a))


def inertia(a: Sequence[Sequence]) -> Tuple[int, int, int]:
    """
    (positive, negative, zero) eigenvalue counts of a symmetric rational matrix

    The characteristic polynomial is real-rooted, so Descartes' rule of
    signs on its coefficients counts the positive roots exactly.
    """
    n = len(a)
    sums = [Fraction(1)] + principal_minor_sums(a)
    top = max(k for k in range(n + 1) if sums[k])
    coefficients = [(-1) ** k * sums[k] for k in range(top + 1)]
    signs = [c > 0 for c in coefficients if c]
    positive = sum(1 for x, y in zip(signs, signs[1:]) if x != y)
    zero = n - top
    return positive, n - zero - positive, zero


# ============================================================================
# SPAN BUILDERS
# ============================================================================

class ExactSpan:
    """Incrementally built span of rational vectors with echelon bookkeeping"""

    def __init__(self):
        self._rows: List[Tuple[int, List[Fraction]]] = []

    @property
    def dim(self) -> int:
        return len(self._rows)

    def reduce(self, vector: Sequence) -> List[Fraction]:
        vec = [Fraction(v) for v in vector]
        for pivot, row in self._rows:
            factor = vec[pivot]
            if factor:
                vec = [a - factor * b for a, b in zip(vec, row)]
        return vec

    def contains(self, vector: Sequence) -> bool:
        return not any(self.reduce(vector))

    def add(self, vector: Sequence) -> bool:
        """Add ``vector`` if it enlarges the span; returns whether it did"""
        vec = self.reduce(vector)
        pivot = next((i for i, v in enumerate(vec) if v), None)
        if pivot is None:
            return False
        lead = vec[pivot]
        self._rows.append((pivot, [v / lead for v in vec]))
        return True


class FloatSpan:
    """Orthonormal-basis span of float vectors with an absolute residual threshold"""

    def __init__(self, threshold: float):
        self.threshold = threshold
        self._basis: List[np.ndarray] = []

    @property
    def dim(self) -> int:
        return len(self._basis)

    def residual(self, vector: Sequence[float]) -> np.ndarray:
        vec = np.asarray(vector, dtype=float).copy()
        for _ in range(2):
            for q in self._basis:
                vec -= (q @ vec) * q
        return vec

    def contains(self, vector: Sequence[float]) -> bool:
        return np.linalg.norm(self.residual(vector)) <= self.threshold

    def add(self, vector: Sequence[float]) -> bool:
        vec = self.residual(vector)
        norm = np.linalg.norm(vec)
        if norm <= self.threshold:
            return False
        self._basis.append(vec / norm)
        return True
