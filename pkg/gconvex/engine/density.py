"""Exact and Monte Carlo sparseness estimates for the polynomial families"""
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import repeat
from typing import Any, Callable, Dict, Iterator, List, Optional, Tuple

import numpy as np
from scipy.stats import norm

from gconvex.config import get_settings
from gconvex.engine.classify import (
    Outcome,
    QuadraticForm,
    classify,
    classify_monomial,
    classify_quadratic,
    is_univariate_gconvex,
)
from gconvex.engine.linalg import is_psd
from gconvex.engine.polycore import Polynomial
from gconvex.exceptions import InvalidArgument
from gconvex.utils import format_float, format_rational

logger = logging.getLogger(__name__)

FAMILIES = ("univariate", "quadratic", "monomial", "separable", "psdball")

CSV_FIELDS = ["family", "n", "d", "r", "trials", "hits", "estimate", "ci95", "exact", "seed"]


# ============================================================================
# STATISTICS
# ============================================================================

def wilson_interval(hits: int, trials: int, confidence: float = 0.95) -> Tuple[float, float]:
    """Wilson score interval for a binomial proportion"""
    if trials <= 0:
        return 0.0, 1.0
    z = norm.ppf(0.5 + confidence / 2)
    p = hits / trials
    denominator = 1 + z * z / trials
    center = (p + z * z / (2 * trials)) / denominator
    half = z * math.sqrt(p * (1 - p) / trials + z * z / (4 * trials * trials)) / denominator
    return max(0.0, center - half), min(1.0, center + half)


def two_proportion_z_test(hits_a: int, trials_a: int, hits_b: int, trials_b: int) -> Tuple[float, float]:
    """Pooled two-sided z-test; returns (z, p-value)"""
    pooled = (hits_a + hits_b) / (trials_a + trials_b)
    variance = pooled * (1 - pooled) * (1 / trials_a + 1 / trials_b)
    if variance == 0:
        return 0.0, 1.0
    z = (hits_a / trials_a - hits_b / trials_b) / math.sqrt(variance)
    return z, float(2 * norm.sf(abs(z)))


# ============================================================================
# REPORTS
# ============================================================================

@dataclass(frozen=True)
class DensityReport:
    family: str
    n: int
    d: Optional[int]
    r: Optional[float]
    trials: int
    hits: int
    seed: Optional[int]
    exact: Optional[Fraction] = None
    reference: Optional[float] = None
    extras: Dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        if not 0 <= self.hits <= self.trials:
            raise ValueError(f"hits={self.hits} outside [0, {self.trials}]")

    @property
    def estimate(self) -> float:
        return self.hits / self.trials if self.trials else 0.0

    @property
    def ci95(self) -> Tuple[float, float]:
        return wilson_interval(self.hits, self.trials)

    @property
    def ci95_halfwidth(self) -> float:
        lo, hi = self.ci95
        return (hi - lo) / 2

    @property
    def deviation(self) -> Optional[float]:
        if self.exact is None:
            return None
        return abs(self.estimate - float(self.exact))

    def to_dict(self) -> Dict[str, Any]:
        data = {
            "family": self.family,
            "params": {"n": self.n, "d": self.d, "r": self.r},
            "trials": self.trials,
            "hits": self.hits,
            "estimate": format_float(self.estimate),
            "ci95": [format_float(v) for v in self.ci95],
            "ci95_halfwidth": format_float(self.ci95_halfwidth),
            "exact": None if self.exact is None else format_rational(self.exact),
            "deviation": None if self.deviation is None else format_float(self.deviation),
            "seed": self.seed,
        }
        if self.reference is not None:
            data["reference"] = format_float(self.reference)
        data.update(self.extras)
        return data

    def to_csv_row(self) -> Dict[str, Any]:
        return {
            "family": self.family,
            "n": self.n,
            "d": "" if self.d is None else self.d,
            "r": "" if self.r is None else self.r,
            "trials": self.trials,
            "hits": self.hits,
            "estimate": format_float(self.estimate),
            "ci95": format_float(self.ci95_halfwidth),
            "exact": "" if self.exact is None else format_rational(self.exact),
            "seed": "" if self.seed is None else self.seed,
        }


# ============================================================================
# SAMPLERS
# ============================================================================

def _rational_coefficients(values: np.ndarray) -> List[Fraction]:
    """Exact dyadic value of each sampled double"""
    return [Fraction(float(v)) for v in values]


def _ball_point(rng: np.random.Generator, dim: int, radius: float) -> np.ndarray:
    """Uniform point in the Euclidean ball: Gaussian direction, radius·u^(1/dim)"""
    direction = rng.standard_normal(dim)
    direction /= np.linalg.norm(direction)
    return direction * radius * rng.uniform() ** (1.0 / dim)


def _symmetric_from_coordinates(coords: np.ndarray, n: int) -> List[List[Fraction]]:
    """
    Symmetric matrix from orthonormal Frobenius coordinates

    The first n coordinates are the diagonal; each off-diagonal pair (i, j)
    gets coordinate/√2 so the map is an isometry.
    """
    A = np.zeros((n, n))
    A[np.diag_indices(n)] = coords[:n]
    position = n
    for i in range(n):
        for j in range(i + 1, n):
            A[i, j] = A[j, i] = coords[position] / math.sqrt(2)
            position += 1
    return [_rational_coefficients(row) for row in A]


def _univariate_trial(rng: np.random.Generator, params: Dict[str, Any]) -> bool:
    d, r = params["d"], params["r"]
    coefficients = _rational_coefficients(rng.uniform(-r, r, size=d + 1))
    return is_univariate_gconvex(Polynomial.from_coefficients(coefficients))


def _quadratic_trial(rng: np.random.Generator, params: Dict[str, Any]) -> bool:
    n, r = params["n"], params["r"]
    A = _symmetric_from_coordinates(_ball_point(rng, n * (n + 1) // 2, r), n)
    linear = _rational_coefficients(_ball_point(rng, n + 1, r))
    q = QuadraticForm.from_lists(A, linear[:n], linear[n])
    return classify_quadratic(q).outcome == Outcome.GCONVEX


def _psdball_trial(rng: np.random.Generator, params: Dict[str, Any]) -> bool:
    n = params["n"]
    return is_psd(_symmetric_from_coordinates(_ball_point(rng, n * (n + 1) // 2, 1.0), n))


def _separable_trial(rng: np.random.Generator, params: Dict[str, Any]) -> bool:
    n, d, r = params["n"], params["d"], params["r"]
    terms: Dict[Tuple[int, ...], Fraction] = {}
    for j in range(n):
        coefficients = _rational_coefficients(rng.uniform(-r, r, size=d + 1))
        for power, c in enumerate(coefficients):
            exponent = tuple(power if i == j else 0 for i in range(n))
            terms[exponent] = terms.get(exponent, Fraction(0)) + c
    return classify(Polynomial(n, terms)).outcome == Outcome.GCONVEX


_TRIALS: Dict[str, Callable[[np.random.Generator, Dict[str, Any]], bool]] = {
    "univariate": _univariate_trial,
    "quadratic": _quadratic_trial,
    "psdball": _psdball_trial,
    "separable": _separable_trial,
}


def _run_chunk(family: str, params: Dict[str, Any], count: int, seed: np.random.SeedSequence) -> int:
    rng = np.random.default_rng(seed)
    trial = _TRIALS[family]
    return sum(1 for _ in range(count) if trial(rng, params))


def _estimate(family: str, params: Dict[str, Any], trials: int, seed: int, workers: Optional[int]) -> int:
    """
    Hits over ``trials`` split into chunks of density_chunk_size

    Chunk i draws from SeedSequence(seed).spawn(...)[i]; the worker count
    only changes where chunks run.
    """
    settings = get_settings()
    workers = settings.density_workers if workers is None else workers
    size = settings.density_chunk_size
    counts = [size] * (trials // size) + ([trials % size] if trials % size else [])
    seeds = np.random.SeedSequence(seed).spawn(len(counts))
    if workers > 1 and len(counts) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            hits = sum(pool.map(_run_chunk, repeat(family), repeat(params), counts, seeds))
    else:
        hits = sum(map(_run_chunk, repeat(family), repeat(params), counts, seeds))
    logger.info(f"🎲 {family} {params}: {hits}/{trials}")
    return hits


def _check(trials: int, n: int = 1, d: int = 1, r: float = 1.0):
    if trials < 1:
        raise InvalidArgument(f"trials must be ≥ 1, got {trials}")
    if n < 1 or d < 1:
        raise InvalidArgument(f"n and d must be ≥ 1, got n={n}, d={d}")
    if r <= 0:
        raise InvalidArgument(f"r must be positive, got {r}")


def _defaults(trials: Optional[int], seed: Optional[int]) -> Tuple[int, int]:
    settings = get_settings()
    return (settings.trials if trials is None else trials), (settings.seed if seed is None else seed)


def psd_volume_fraction(n: int) -> Fraction:
    """2^(−binom(n+1, 2))"""
    return Fraction(1, 2 ** (n * (n + 1) // 2))


def psd_ball_reference(n: int) -> Optional[float]:
    """Closed form of the PSD share of the Frobenius ball where one is known (n ≤ 2)"""
    if n == 1:
        return 0.5
    if n == 2:
        return (1 - 1 / math.sqrt(2)) / 2
    return None


def sample_univariate(
    d: int,
    r: float = 1.0,
    trials: Optional[int] = None,
    seed: Optional[int] = None,
    workers: Optional[int] = None,
) -> DensityReport:
    """Share of f = Σ a_j x^j, a_j uniform on [−r, r], that is g-convex"""
    trials, seed = _defaults(trials, seed)
    _check(trials, d=d, r=r)
    params = {"n": 1, "d": d, "r": r}
    hits = _estimate("univariate", params, trials, seed, workers)
    return DensityReport("univariate", 1, d, r, trials, hits, seed)


def sample_quadratic(
    n: int,
    r: float = 1.0,
    trials: Optional[int] = None,
    seed: Optional[int] = None,
    workers: Optional[int] = None,
) -> DensityReport:
    """A uniform in the radius-r Frobenius ball, (b, c) uniform in the radius-r ball"""
    trials, seed = _defaults(trials, seed)
    _check(trials, n=n, r=r)
    params = {"n": n, "d": 2, "r": r}
    hits = _estimate("quadratic", params, trials, seed, workers)
    return DensityReport(
        "quadratic", n, 2, r, trials, hits, seed,
        exact=psd_volume_fraction(n),
        reference=psd_ball_reference(n),
    )


def psd_ball_fraction(
    n: int,
    trials: Optional[int] = None,
    seed: Optional[int] = None,
    workers: Optional[int] = None,
) -> DensityReport:
    """Share of the unit Frobenius ball of symmetric matrices that is PSD"""
    trials, seed = _defaults(trials, seed)
    _check(trials, n=n)
    hits = _estimate("psdball", {"n": n}, trials, seed, workers)
    return DensityReport(
        "psdball", n, None, 1.0, trials, hits, seed,
        exact=psd_volume_fraction(n),
        reference=psd_ball_reference(n),
    )


def sample_separable(
    n: int,
    d: int,
    r: float = 1.0,
    trials: Optional[int] = None,
    seed: Optional[int] = None,
    workers: Optional[int] = None,
) -> DensityReport:
    """Share of Σ_j f_j(x_j), each f_j of degree d with uniform coefficients, that is g-convex"""
    trials, seed = _defaults(trials, seed)
    _check(trials, n=n, d=d, r=r)
    hits = _estimate("separable", {"n": n, "d": d, "r": r}, trials, seed, workers)
    return DensityReport("separable", n, d, r, trials, hits, seed)


# ============================================================================
# MONOMIAL COUNTING
# ============================================================================

def enumerate_exponents(n: int, d: int) -> Iterator[Tuple[int, ...]]:
    """All (d_1, ..., d_n) ≥ 0 with Σ d_i ≤ d"""
    if n == 0:
        yield ()
        return
    for first in range(d + 1):
        for rest in enumerate_exponents(n - 1, d - first):
            yield (first,) + rest


@dataclass(frozen=True)
class MonomialDensity:
    n: int
    d: int
    enumerated: int
    even_power_pairs: int
    distinct_even_powers: int
    classifier_hits: int

    @property
    def binomial(self) -> int:
        return math.comb(self.n + self.d, self.n)

    @property
    def printed_binomial(self) -> int:
        return math.comb(self.n + 1 + self.d, self.n)

    @property
    def oracle(self) -> Fraction:
        return Fraction(self.even_power_pairs, 2 * self.enumerated)

    @property
    def deduplicated(self) -> Fraction:
        return Fraction(self.distinct_even_powers, 2 * self.enumerated)

    @property
    def classifier(self) -> Fraction:
        return Fraction(self.classifier_hits, 2 * self.enumerated)

    @property
    def stated_formula(self) -> Fraction:
        return Fraction(self.n * (self.d // 2 + 1), 2 * self.printed_binomial)

    @property
    def match(self) -> bool:
        return self.oracle == self.stated_formula

    def to_dict(self) -> Dict[str, Any]:
        return {
            "family": "monomial",
            "params": {"n": self.n, "d": self.d},
            "enumerated": self.enumerated,
            "binomial": self.binomial,
            "printed_binomial": self.printed_binomial,
            "oracle": format_rational(self.oracle),
            "stated_formula": format_rational(self.stated_formula),
            "match": self.match,
            "deduplicated": format_rational(self.deduplicated),
            "classifier": format_rational(self.classifier),
        }

    def to_csv_row(self) -> Dict[str, Any]:
        return {
            "family": "monomial",
            "n": self.n,
            "d": self.d,
            "r": "",
            "trials": 2 * self.enumerated,
            "hits": self.even_power_pairs,
            "estimate": format_float(float(self.oracle)),
            "ci95": 0.0,
            "exact": format_rational(self.stated_formula),
            "seed": "",
        }


def monomial_density_exact(n: int, d: int) -> MonomialDensity:
    """
    Enumerate N_{n,d} and count sign/exponent configurations

    ``oracle`` counts the pairs (i, 2j) with x_i^{2j}, so the constant
    monomial is counted once per variable; ``deduplicated`` counts each even
    pure power once; ``classifier`` runs classify_monomial on ±x^α.
    """
    _check(1, n=n, d=d)
    enumerated = 0
    pairs = 0
    distinct = 0
    hits = 0
    for exponent in enumerate_exponents(n, d):
        enumerated += 1
        active = [e for e in exponent if e]
        if not active:
            pairs += n
            distinct += 1
        elif len(active) == 1 and active[0] % 2 == 0:
            pairs += 1
            distinct += 1
        for sign in (1, -1):
            verdict = classify_monomial(Polynomial(n, {exponent: sign}))
            hits += verdict.outcome == Outcome.GCONVEX
    return MonomialDensity(n, d, enumerated, pairs, distinct, hits)


# ============================================================================
# SWEEPS
# ============================================================================

def parse_sweep(text: str) -> Tuple[str, List[int]]:
    """
    Parse "d=3..63", "d=3..63:4" or "n=1,2,3" into (name, values)

    Ranges are inclusive.
    """
    try:
        name, spec = text.split("=", 1)
        name = name.strip()
        if name not in ("n", "d"):
            raise InvalidArgument(f"Sweep parameter must be n or d, got {name!r}")
        if ".." in spec:
            bounds, _, step = spec.partition(":")
            lo, hi = bounds.split("..")
            step_value = int(step) if step else 1
            if step_value < 1:
                raise InvalidArgument(f"Sweep step must be ≥ 1, got {step_value}")
            values = list(range(int(lo), int(hi) + 1, step_value))
        else:
            values = [int(v) for v in spec.split(",") if v.strip()]
    except ValueError:
        raise InvalidArgument(f"Malformed sweep {text!r}")
    if not values:
        raise InvalidArgument(f"Sweep {text!r} is empty")
    return name, values
