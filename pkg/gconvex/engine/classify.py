"""Decision procedures for g-convexity of univariate, quadratic, monomial and separable polynomials"""
import logging
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Any, Dict, List, Optional, Sequence, Tuple

from gconvex.engine import linalg
from gconvex.engine.polycore import Polynomial, euclidean_hessian, gradient
from gconvex.engine.realroots import isolate_real_roots, univariate_summary
from gconvex.exceptions import DegreeTooHigh, NotMonomial, NotUnivariate
from gconvex.utils import format_interval, format_rational, format_vector

logger = logging.getLogger(__name__)


# ============================================================================
# VERDICT TYPES
# ============================================================================

class Outcome(str, Enum):
    GCONVEX = "GConvex"
    NOT_GCONVEX = "NotGConvex"
    UNKNOWN = "Unknown"


class CertificateKind(str, Enum):
    NO_CRITICAL_POINT = "NoCriticalPoint"
    UNIVARIATE_ODD_ROOT = "UnivariateOddRoot"
    QUADRATIC_PSD = "QuadraticPSD"
    QUADRATIC_NO_CRITICAL = "QuadraticNoCritical"
    MONOMIAL_EVEN_POWER = "MonomialEvenPower"
    SEPARABLE = "Separable"
    CONSTANT_FUNCTION = "ConstantFunction"


class WitnessKind(str, Enum):
    EVEN_MULTIPLICITY_ROOT = "EvenMultiplicityRoot"
    MULTIPLE_ODD_ROOTS = "MultipleOddRoots"
    NEGATIVE_LEADING_COFACTOR = "NegativeLeadingCofactor"
    INDEFINITE_HESSIAN_AT_CRITICAL = "IndefiniteHessianAtCritical"
    MONOMIAL_STRUCTURE = "MonomialStructure"
    SEPARABLE_FAILURE = "SeparableFailure"


Interval = Tuple[Fraction, Fraction]


@dataclass(frozen=True)
class Certificate:
    kind: CertificateKind
    root_interval: Optional[Interval] = None
    multiplicity: Optional[int] = None
    cofactor_positive: Optional[bool] = None
    variable: Optional[int] = None
    degree: Optional[int] = None
    coefficient: Optional[Fraction] = None
    block: Optional[int] = None
    parts: Tuple["Certificate", ...] = ()

    def __post_init__(self):
        if self.kind == CertificateKind.UNIVARIATE_ODD_ROOT:
            if self.multiplicity is None or self.multiplicity % 2 == 0 or not self.cofactor_positive:
                raise ValueError("UnivariateOddRoot needs an odd multiplicity and a positive cofactor")
        if self.kind == CertificateKind.MONOMIAL_EVEN_POWER:
            if self.coefficient is None or self.coefficient <= 0 or self.degree is None or self.degree % 2:
                raise ValueError("MonomialEvenPower needs a > 0 and an even degree")

    def to_dict(self) -> Dict[str, Any]:
        data: Dict[str, Any] = {"variant": self.kind.value}
        if self.root_interval is not None:
            data["u_interval"] = format_interval(*self.root_interval)
        if self.multiplicity is not None:
            data["multiplicity"] = self.multiplicity
        if self.cofactor_positive is not None:
            data["cofactor_positive"] = self.cofactor_positive
        if self.variable is not None:
            data["index"] = self.variable + 1
        if self.degree is not None:
            data["degree"] = self.degree
        if self.coefficient is not None:
            data["coefficient"] = format_rational(self.coefficient)
        if self.block is not None:
            data["block"] = self.block
        if self.parts:
            data["parts"] = [p.to_dict() for p in self.parts]
        return data


@dataclass(frozen=True)
class Witness:
    kind: WitnessKind
    intervals: Tuple[Interval, ...] = ()
    multiplicities: Tuple[int, ...] = ()
    point: Optional[Tuple[Fraction, ...]] = None
    lemma: Optional[str] = None
    block: Optional[int] = None
    condition: str = ""

    def to_dict(self) -> Dict[str, Any]:
        data: Dict[str, Any] = {"variant": self.kind.value, "condition": self.condition}
        if self.intervals:
            data["intervals"] = [format_interval(*iv) for iv in self.intervals]
            data["multiplicities"] = list(self.multiplicities)
        if self.point is not None:
            data["point"] = format_vector(self.point)
        if self.lemma is not None:
            data["lemma"] = self.lemma
        if self.block is not None:
            data["block"] = self.block
        return data


@dataclass(frozen=True)
class Verdict:
    outcome: Outcome
    certificate: Optional[Certificate] = None
    witness: Optional[Witness] = None
    reason: Optional[str] = None

    def __post_init__(self):
        populated = {
            Outcome.GCONVEX: self.certificate,
            Outcome.NOT_GCONVEX: self.witness,
            Outcome.UNKNOWN: self.reason,
        }
        if sum(v is not None for v in (self.certificate, self.witness, self.reason)) != 1:
            raise ValueError("Exactly one of certificate, witness, reason must be set")
        if populated[self.outcome] is None:
            raise ValueError(f"{self.outcome.value} verdict is missing its payload")

    @classmethod
    def gconvex(cls, certificate: Certificate) -> "Verdict":
        return cls(Outcome.GCONVEX, certificate=certificate)

    @classmethod
    def not_gconvex(cls, witness: Witness) -> "Verdict":
        return cls(Outcome.NOT_GCONVEX, witness=witness)

    @classmethod
    def unknown(cls, reason: str) -> "Verdict":
        return cls(Outcome.UNKNOWN, reason=reason)

    @property
    def is_gconvex(self) -> bool:
        return self.outcome == Outcome.GCONVEX

    def to_dict(self) -> Dict[str, Any]:
        data: Dict[str, Any] = {"outcome": self.outcome.value}
        if self.certificate is not None:
            data["certificate"] = self.certificate.to_dict()
        if self.witness is not None:
            data["witness"] = self.witness.to_dict()
        if self.reason is not None:
            data["reason"] = self.reason
        return data


# ============================================================================
# UNIVARIATE
# ============================================================================

def _as_univariate(f: Polynomial) -> Polynomial:
    if f.nvars == 1:
        return f
    used = f.variables()
    if len(used) > 1:
        raise NotUnivariate(f"{f} depends on {len(used)} variables")
    return f.restrict_to(used or [0])


def classify_univariate(f: Polynomial) -> Verdict:
    """
    Decide g-convexity of a univariate polynomial from the real roots of b = f'

    A single real root u of odd multiplicity with lc(b) > 0 is exactly the
    condition "b = (x-u)^(2r-1) p with p > 0": p then has no real root, so its
    sign everywhere equals its sign at +inf, which is sign(lc(b)).
    """
    if f.nvars != 1:
        raise NotUnivariate(f"Expected one variable, got {f.nvars}")
    b = f.partial(0)
    if b.is_zero():
        return Verdict.gconvex(Certificate(CertificateKind.CONSTANT_FUNCTION))

    records = isolate_real_roots(b)
    if not records:
        return Verdict.gconvex(Certificate(CertificateKind.NO_CRITICAL_POINT))

    if len(records) >= 2:
        even = [r for r in records if r.multiplicity % 2 == 0]
        if even:
            return Verdict.not_gconvex(Witness(
                WitnessKind.EVEN_MULTIPLICITY_ROOT,
                intervals=(even[0].interval,),
                multiplicities=(even[0].multiplicity,),
                condition="every real root of f' has odd multiplicity",
            ))
        return Verdict.not_gconvex(Witness(
            WitnessKind.MULTIPLE_ODD_ROOTS,
            intervals=tuple(r.interval for r in records),
            multiplicities=tuple(r.multiplicity for r in records),
            condition="f' has at most one real root",
        ))

    (root,) = records
    if root.multiplicity % 2 == 0:
        return Verdict.not_gconvex(Witness(
            WitnessKind.EVEN_MULTIPLICITY_ROOT,
            intervals=(root.interval,),
            multiplicities=(root.multiplicity,),
            condition="every real root of f' has odd multiplicity",
        ))
    if b.leading_coefficient() > 0:
        return Verdict.gconvex(Certificate(
            CertificateKind.UNIVARIATE_ODD_ROOT,
            root_interval=root.interval,
            multiplicity=root.multiplicity,
            cofactor_positive=True,
        ))
    return Verdict.not_gconvex(Witness(
        WitnessKind.NEGATIVE_LEADING_COFACTOR,
        intervals=(root.interval,),
        multiplicities=(root.multiplicity,),
        condition="f' = (x-u)^(2r-1) p(x) with p > 0",
    ))


def is_univariate_gconvex(f: Polynomial) -> bool:
    """
    Same decision as classify_univariate from one Sturm chain, without isolation

    With exactly one distinct real root, b = (x-u)^m p where p has no real
    root and therefore even degree, so m is odd iff deg b is odd.
    """
    b = _as_univariate(f).partial(0)
    if b.is_zero():
        return True
    distinct, degree, lead = univariate_summary(b)
    if distinct == 0:
        return True
    if distinct >= 2:
        return False
    return degree % 2 == 1 and lead > 0


def univariate_has_critical_point(f: Polynomial) -> bool:
    b = _as_univariate(f).partial(0)
    if b.is_zero():
        return True
    return univariate_summary(b)[0] > 0


# ============================================================================
# QUADRATIC
# ============================================================================

@dataclass(frozen=True)
class QuadraticForm:
    """f = ½ xᵀAx + bᵀx + c with symmetric A"""
    A: Tuple[Tuple[Fraction, ...], ...]
    b: Tuple[Fraction, ...]
    c: Fraction

    def __post_init__(self):
        n = len(self.b)
        if len(self.A) != n or any(len(row) != n for row in self.A):
            raise ValueError("A must be n×n with n = len(b)")
        if any(self.A[i][j] != self.A[j][i] for i in range(n) for j in range(n)):
            raise ValueError("A must be symmetric")

    @classmethod
    def from_lists(cls, A: Sequence[Sequence], b: Sequence, c=0) -> "QuadraticForm":
        return cls(
            A=tuple(tuple(Fraction(v) for v in row) for row in A),
            b=tuple(Fraction(v) for v in b),
            c=Fraction(c),
        )

    @property
    def n(self) -> int:
        return len(self.b)

    def to_polynomial(self) -> Polynomial:
        n = self.n
        terms: Dict[Tuple[int, ...], Fraction] = {}

        def unit(*indices):
            exponent = [0] * n
            for i in indices:
                exponent[i] += 1
            return tuple(exponent)

        for i in range(n):
            if self.A[i][i]:
                terms[unit(i, i)] = self.A[i][i] / 2
            for j in range(i + 1, n):
                if self.A[i][j]:
                    terms[unit(i, j)] = self.A[i][j]
            if self.b[i]:
                terms[unit(i)] = self.b[i]
        if self.c:
            terms[(0,) * n] = self.c
        return Polynomial(n, terms)

    def has_critical_point(self) -> bool:
        augmented = [list(row) + [bi] for row, bi in zip(self.A, self.b)]
        return linalg.rank(augmented) == linalg.rank(self.A)

    def critical_point(self) -> Optional[List[Fraction]]:
        return linalg.solve(self.A, [-bi for bi in self.b])


def to_quadratic_form(f: Polynomial) -> QuadraticForm:
    """Extract A, b, c with the ½ convention"""
    if f.total_degree() > 2:
        raise DegreeTooHigh(f"Total degree {f.total_degree()} exceeds 2")
    n = f.nvars
    A = [[Fraction(0)] * n for _ in range(n)]
    b = [Fraction(0)] * n
    c = Fraction(0)
    for exponent, coeff in f.items():
        used = [i for i, e in enumerate(exponent) for _ in range(e)]
        if not used:
            c = coeff
        elif len(used) == 1:
            b[used[0]] = coeff
        elif used[0] == used[1]:
            A[used[0]][used[0]] = 2 * coeff
        else:
            i, j = used
            A[i][j] = A[j][i] = coeff
    return QuadraticForm.from_lists(A, b, c)


def classify_quadratic(q: QuadraticForm) -> Verdict:
    """
    GConvex when there is no critical point or A is PSD; otherwise the
    solved critical point carries an indefinite Hessian

    The no-critical-point certificate is preferred because it comes with
    a flat connection that can be materialized.
    """
    if not q.has_critical_point():
        return Verdict.gconvex(Certificate(CertificateKind.QUADRATIC_NO_CRITICAL))
    if linalg.is_psd(q.A):
        return Verdict.gconvex(Certificate(CertificateKind.QUADRATIC_PSD))
    point = q.critical_point()
    return Verdict.not_gconvex(Witness(
        WitnessKind.INDEFINITE_HESSIAN_AT_CRITICAL,
        point=tuple(point),
        condition="Euclidean Hessian is PSD at every critical point",
    ))


# ============================================================================
# MONOMIAL
# ============================================================================

def _monomial_lemma(exponent: Sequence[int], coeff: Fraction) -> Optional[str]:
    """Name of the structural obstruction, or None for a GConvex monomial"""
    active = [e for e in exponent if e]
    if any(e >= 3 and e % 2 for e in active):
        return "odd-exponent"
    if len(active) == 1:
        return None if coeff > 0 else "negative-coefficient"
    units = sum(1 for e in active if e == 1)
    if units >= 2:
        return "several-unit-exponents"
    if units == 1:
        return "unit-exponent-with-several-even" if len(active) >= 3 else "unit-times-even-power"
    return "several-even-powers"


def classify_monomial(f: Polynomial) -> Verdict:
    """a·∏x_i^{d_i} is g-convex iff deg ≤ 1 or f = a x_j^{d_j} with a > 0 and d_j even"""
    if len(f) != 1:
        raise NotMonomial(f"{f} has {len(f)} terms")
    ((exponent, coeff),) = f.items()
    degree = sum(exponent)
    if degree == 0:
        return Verdict.gconvex(Certificate(CertificateKind.CONSTANT_FUNCTION))
    if degree == 1:
        return Verdict.gconvex(Certificate(CertificateKind.NO_CRITICAL_POINT))
    lemma = _monomial_lemma(exponent, coeff)
    if lemma is None:
        j = next(i for i, e in enumerate(exponent) if e)
        return Verdict.gconvex(Certificate(
            CertificateKind.MONOMIAL_EVEN_POWER,
            variable=j,
            degree=exponent[j],
            coefficient=coeff,
        ))
    return Verdict.not_gconvex(Witness(
        WitnessKind.MONOMIAL_STRUCTURE,
        lemma=lemma,
        condition="f = a x_j^d with a > 0 and d even",
    ))


# ============================================================================
# SEPARABLE
# ============================================================================

@dataclass(frozen=True)
class SeparableBlock:
    indices: Tuple[int, ...]
    summand: Polynomial

    def local(self) -> Polynomial:
        """The summand in its own len(indices) variables"""
        return self.summand.restrict_to(self.indices)

    def to_dict(self, names: Optional[Sequence[str]] = None) -> Dict[str, Any]:
        return {
            "variables": [i + 1 for i in self.indices],
            "summand": self.summand.to_text(names),
        }


def separable_partition(f: Polynomial) -> List[SeparableBlock]:
    """
    Finest variable partition from the co-occurrence graph

    Variables absent from f form singleton blocks with a zero summand; the
    constant term goes to the first block.
    """
    n = f.nvars
    parent = list(range(n))

    def find(i: int) -> int:
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for exponent, _ in f.items():
        used = [i for i, e in enumerate(exponent) if e]
        for i in used[1:]:
            parent[find(i)] = find(used[0])

    groups: Dict[int, List[int]] = {}
    for i in range(n):
        groups.setdefault(find(i), []).append(i)
    blocks = sorted(groups.values(), key=lambda g: g[0])

    summands = {tuple(g): {} for g in blocks}
    owner = {i: tuple(g) for g in blocks for i in g}
    for exponent, coeff in f.items():
        used = [i for i, e in enumerate(exponent) if e]
        key = owner[used[0]] if used else tuple(blocks[0])
        summands[key][exponent] = coeff
    return [SeparableBlock(tuple(g), Polynomial(n, summands[tuple(g)])) for g in blocks]


def has_critical_point(f: Polynomial) -> Optional[bool]:
    """Whether grad f vanishes somewhere, for the supported classes; None otherwise"""
    if f.is_constant():
        return True
    if len(f.variables()) == 1:
        return univariate_has_critical_point(f)
    if len(f) == 1:
        return f.total_degree() >= 2
    if f.total_degree() <= 2:
        return to_quadratic_form(f).has_critical_point()
    blocks = separable_partition(f)
    if len(blocks) == 1:
        return None
    # grad f vanishes iff every block's gradient vanishes somewhere
    criticals = [has_critical_point(block.local()) for block in blocks]
    if any(c is False for c in criticals):
        return False
    if all(criticals):
        return True
    return None


def _classify_separable(f: Polynomial) -> Verdict:
    blocks = separable_partition(f)
    if len(blocks) == 1:
        return Verdict.unknown("polynomial is outside the univariate, quadratic, monomial and separable classes")

    criticals = [has_critical_point(block.local()) for block in blocks]
    for number, critical in enumerate(criticals, start=1):
        if critical is False:
            return Verdict.gconvex(Certificate(CertificateKind.NO_CRITICAL_POINT, block=number))

    verdicts = [classify(block.local()) for block in blocks]
    if all(v.is_gconvex for v in verdicts):
        return Verdict.gconvex(Certificate(
            CertificateKind.SEPARABLE,
            parts=tuple(v.certificate for v in verdicts),
        ))
    failing = [i for i, v in enumerate(verdicts, start=1) if v.outcome == Outcome.NOT_GCONVEX]
    if all(c is True for c in criticals) and failing:
        return Verdict.not_gconvex(Witness(
            WitnessKind.SEPARABLE_FAILURE,
            block=failing[0],
            condition="some block has no critical point, or every block is g-convex",
        ))
    undecided = [i for i, c in enumerate(criticals, start=1) if c is None]
    undecided += [i for i, v in enumerate(verdicts, start=1) if v.outcome == Outcome.UNKNOWN and i not in undecided]
    if not undecided:
        return Verdict.unknown("critical points of the blocks could not be decided")
    return Verdict.unknown(f"block {undecided[0]} cannot be classified")


def classify(f: Polynomial) -> Verdict:
    """
    Dispatch: constant, univariate, monomial, quadratic, then separable recursion

    Returns:
        Verdict with a certificate, witness or reason
    """
    if f.is_constant():
        return Verdict.gconvex(Certificate(CertificateKind.CONSTANT_FUNCTION))
    if f.nvars == 1:
        return classify_univariate(f)
    if len(f) == 1:
        return classify_monomial(f)
    if f.total_degree() <= 2:
        return classify_quadratic(to_quadratic_form(f))
    verdict = _classify_separable(f)
    logger.debug(f"Separable classification of {f}: {verdict.outcome.value}")
    return verdict


# ============================================================================
# CRITICAL POINTS
# ============================================================================

@dataclass(frozen=True)
class CriticalPointCheck:
    point: Tuple[Fraction, ...]
    is_critical: bool
    hessian_psd: bool

    @property
    def disproves(self) -> bool:
        return self.is_critical and not self.hessian_psd

    def to_dict(self) -> Dict[str, Any]:
        return {
            "point": format_vector(self.point),
            "is_critical": self.is_critical,
            "hessian_psd": self.hessian_psd,
            "disproves": self.disproves,
        }


def check_necessary_at_critical(f: Polynomial, points: Sequence[Sequence]) -> List[CriticalPointCheck]:
    """Gradient vanishing and Euclidean-Hessian PSD at each given point"""
    grad = gradient(f)
    hessian = euclidean_hessian(f)
    report = []
    for point in points:
        point = tuple(Fraction(p) for p in point)
        is_critical = all(not g.evaluate(point) for g in grad)
        values = [[h.evaluate(point) for h in row] for row in hessian]
        report.append(CriticalPointCheck(point, is_critical, linalg.is_psd(values)))
    return report


@dataclass(frozen=True)
class CriticalCount:
    count: Optional[int] = None
    continuum: bool = False

    @property
    def supported(self) -> bool:
        return self.continuum or self.count is not None

    @property
    def rules_out_complete_connections(self) -> bool:
        return not self.continuum and self.count is not None and self.count >= 2

    def to_dict(self) -> Dict[str, Any]:
        if self.continuum:
            value: Any = "continuum"
        else:
            value = self.count
        return {
            "count": value,
            "not_gconvex_for_complete_connections": self.rules_out_complete_connections,
        }


_CONTINUUM = CriticalCount(continuum=True)


def count_isolated_critical_points(f: Polynomial) -> CriticalCount:
    """
    Size of the critical set for the supported classes

    Two or more isolated critical points rule out g-convexity for every
    geodesically complete connection.
    """
    n = f.nvars
    if f.is_constant():
        return _CONTINUUM
    used = f.variables()
    if n == 1:
        b = f.partial(0)
        return CriticalCount(count=univariate_summary(b)[0])
    if len(f) == 1:
        ((exponent, _),) = f.items()
        degree = sum(exponent)
        if degree == 1:
            return CriticalCount(count=0)
        if len(used) == 2 and n == 2 and all(exponent[i] == 1 for i in used):
            return CriticalCount(count=1)
        return _CONTINUUM
    if f.total_degree() <= 2:
        q = to_quadratic_form(f)
        if not q.has_critical_point():
            return CriticalCount(count=0)
        if linalg.rank(q.A) == n:
            return CriticalCount(count=1)
        return _CONTINUUM
    blocks = separable_partition(f)
    if len(blocks) == 1:
        return CriticalCount()
    counts = [count_isolated_critical_points(block.local()) for block in blocks]
    if any(c.count == 0 and not c.continuum for c in counts):
        return CriticalCount(count=0)
    if any(not c.supported for c in counts):
        return CriticalCount()
    if any(c.continuum for c in counts):
        return _CONTINUUM
    total = 1
    for c in counts:
        total *= c.count
    return CriticalCount(count=total)
