"""Replicated tail estimation, an exact small-instance oracle, and bound comparisons."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Sequence

import numpy as np
from scipy import stats

from . import bounds
from .bounds import BoundParams, DEFAULT_PARAMS
from .errors import DomainError, NotApplicableError, StateSpaceTooLarge
from .function_classes import GridClassSpec
from .empirical import max_deviation_rows
from .rng import block_generator, map_blocks, stream_key, sum_counts

DEFAULT_CONFIDENCE = 0.99
LEVEL_RULES = ("u", "u_bar", "hat_u", "2*sqrt(n)*sigma2")
MAX_EXACT_STATES = 10**7


@dataclass(frozen=True)
class TailEstimate:
    v: float
    hits: int
    reps: int
    p_hat: float
    ci_low: float
    ci_high: float

    @classmethod
    def from_counts(cls, v: float, hits: int, reps: int, confidence: float = DEFAULT_CONFIDENCE) -> "TailEstimate":
        hits, reps = int(hits), int(reps)
        low, high = wilson_interval(hits, reps, confidence)
        return cls(float(v), hits, reps, hits / reps, float(low), float(high))

    @property
    def half_width(self) -> float:
        return 0.5 * (self.ci_high - self.ci_low)


def wilson_interval(hits: int, reps: int, confidence: float = DEFAULT_CONFIDENCE) -> tuple[float, float]:
    """Wilson score interval for a binomial proportion."""
    if reps < 1 or not (0 <= hits <= reps):
        raise DomainError(f"need 0 <= hits <= reps and reps >= 1, got hits={hits!r}, reps={reps!r}")
    if not (0 < confidence < 1):
        raise DomainError(f"confidence must lie in (0, 1), got {confidence!r}")
    z = float(stats.norm.ppf(0.5 + confidence / 2))
    p = hits / reps
    z2n = z * z / reps
    center = (p + z2n / 2) / (1 + z2n)
    half = z / (1 + z2n) * math.sqrt(p * (1 - p) / reps + z2n / (4 * reps))
    low = 0.0 if hits == 0 else min(p, max(0.0, center - half))
    high = 1.0 if hits == reps else max(p, min(1.0, center + half))
    return low, high


@dataclass(frozen=True)
class ExperimentConfig:
    n: int
    sigma2: float
    levels: tuple
    reps: int
    master_seed: int = 0
    params: BoundParams = field(default_factory=BoundParams)
    L: float = 1.0
    D: float = 1.0

    def __post_init__(self):
        if not isinstance(self.n, (int, np.integer)) or self.n < 1:
            raise DomainError(f"n must be a positive integer, got {self.n!r}")
        if not (0 < self.sigma2 <= 1):
            raise DomainError(f"sigma2 must lie in (0, 1], got {self.sigma2!r}")
        if not isinstance(self.reps, (int, np.integer)) or self.reps < 1:
            raise DomainError(f"reps must be a positive integer, got {self.reps!r}")
        if isinstance(self.levels, (str, int, float)):
            raise DomainError("levels must be a list")
        object.__setattr__(self, "levels", tuple(self.levels))
        if not self.levels:
            raise DomainError("at least one level is required")
        self.resolved_levels()

    def resolve(self, level) -> float:
        """Numeric value of a level, evaluating named rules."""
        if isinstance(level, str):
            rule = level.replace(" ", "")
            if rule == "u":
                return bounds.threshold_u(self.n, self.sigma2, self.L, self.D, self.params)
            if rule == "u_bar":
                return bounds.threshold_u_bar(self.sigma2, self.L, self.D, self.params)
            if rule == "hat_u":
                return bounds.lower_bound_level(self.n, self.sigma2, self.params)
            if rule == "2*sqrt(n)*sigma2":
                return 2 * math.sqrt(self.n) * self.sigma2
            raise DomainError(f"unknown level rule {level!r}; expected a number or one of {LEVEL_RULES}")
        if isinstance(level, bool) or not isinstance(level, (int, float)) or not math.isfinite(level):
            raise DomainError(f"level must be a finite number or a rule name, got {level!r}")
        return float(level)

    def resolved_levels(self) -> list[float]:
        """Levels sorted ascending; duplicates are rejected."""
        values = sorted(self.resolve(lv) for lv in self.levels)
        if any(b <= a for a, b in zip(values, values[1:])):
            raise DomainError(f"levels must be distinct after resolution, got {values}")
        return values


def _tail_hits(values: np.ndarray, levels: np.ndarray) -> np.ndarray:
    # values >= level, counted per level via one sort
    return values.size - np.searchsorted(np.sort(values), levels, side="left")


def estimate_tail(config: ExperimentConfig, workers: int | None = 1) -> list[TailEstimate]:
    """Monte Carlo estimate of ``P(sup_j |S_n(f_j)| >= v)`` for every level.

    Each replication draws one uniform sample, computes the supremum once, and
    scores it against all levels, so the estimates are nonincreasing in ``v``.
    Replication blocks are independent streams; the merged counts do not depend
    on ``workers``.
    """
    levels = np.array(config.resolved_levels())
    spec = GridClassSpec(config.sigma2)
    key = stream_key(config.master_seed, "sup-tail")
    root_n = math.sqrt(config.n)

    def run(block: int, start: int, stop: int) -> np.ndarray:
        rows = block_generator(key, block).random((stop - start, config.n))
        dev, _ = max_deviation_rows(rows, spec.sigma2, spec.k)
        return _tail_hits(dev / root_n, levels)

    hits = sum_counts(map_blocks(run, config.reps, workers))
    return [TailEstimate.from_counts(v, h, config.reps) for v, h in zip(levels, hits)]


def estimate_member_tail(
    n: int,
    sigma2: float,
    levels: Sequence[float],
    reps: int,
    seed: int = 0,
    workers: int | None = 1,
) -> list[TailEstimate]:
    """One-sided tail ``P(S_n(f_1) >= v)`` of the first centered grid member.

    ``sqrt(n) S_n(f_1) = N_1 - n sigma2`` where ``N_1``, the number of sample
    points in the first cell, is Binomial(n, sigma2); it is drawn directly.
    """
    if reps < 1:
        raise DomainError("reps must be positive")
    spec = GridClassSpec(sigma2)
    cell = spec.cell(1)
    p = cell[1] - cell[0]
    levels = np.sort(np.asarray(levels, dtype=np.float64))
    key = stream_key(seed, "member-tail")
    root_n = math.sqrt(n)

    def run(block: int, start: int, stop: int) -> np.ndarray:
        counts = block_generator(key, block).binomial(n, p, size=stop - start)
        return _tail_hits((counts - n * sigma2) / root_n, levels)

    hits = sum_counts(map_blocks(run, reps, workers))
    return [TailEstimate.from_counts(v, h, reps) for v, h in zip(levels, hits)]


@lru_cache(maxsize=None)
def _factorial(m: int) -> int:
    return math.factorial(m)


def _compositions(total: int, parts: int):
    """All tuples of ``parts`` non-negative ints summing to ``total``, lexicographic."""
    if parts == 1:
        yield (total,)
        return
    for bars in itertools.combinations(range(total + parts - 1), parts - 1):
        prev = -1
        out = []
        for b in bars:
            out.append(b - prev - 1)
            prev = b
        out.append(total + parts - 2 - prev)
        yield tuple(out)


def exact_tail_small(n: int, sigma2, v) -> Fraction:
    """Exact ``P(max_j |N_j - n sigma2| / sqrt(n) >= v)`` by multinomial enumeration.

    Cell counts ``(N_1, ..., N_k, N_leftover)`` are multinomial with cell mass
    ``sigma2`` and leftover mass ``1 - k sigma2``.  ``sigma2`` and ``v`` are
    converted to exact rationals, so the result is exact for the values the
    floats represent.
    """
    if n < 1:
        raise DomainError("n must be positive")
    spec = GridClassSpec(float(sigma2))
    k = spec.k
    states = math.comb(n + k, k)
    if states > MAX_EXACT_STATES:
        raise StateSpaceTooLarge(
            f"{states} multinomial states exceed {MAX_EXACT_STATES}; use estimate_tail instead"
        )
    s2 = Fraction(sigma2)
    rest = 1 - k * s2
    v = Fraction(v)
    ns2 = n * s2
    threshold = n * v * v  # compare squared deviations to avoid square roots
    n_fact = _factorial(n)
    total = Fraction(0)
    for left in range(n + 1):
        if rest == 0 and left:
            break
        weight = 0
        for counts in _compositions(n - left, k):
            if v <= 0 or any((c - ns2) ** 2 >= threshold for c in counts):
                coef = n_fact // _factorial(left)
                for c in counts:
                    coef //= _factorial(c)
                weight += coef
        if weight:
            total += weight * s2 ** (n - left) * rest**left
    return total


@dataclass(frozen=True)
class ComparisonRow:
    v: float
    hits: int
    reps: int
    p_hat: float
    ci_low: float
    ci_high: float
    bound_thm1: float | None
    applicable_thm1: bool
    reason_thm1: str
    bound_ext: float | None
    applicable_ext: bool
    reason_ext: str
    bound_bennett: float | None
    applicable_bennett: bool
    reason_bennett: str
    dominance: str


def _try(fn, *args) -> tuple[float | None, bool, str]:
    try:
        return min(1.0, fn(*args)), True, ""
    except NotApplicableError as exc:
        return None, False, str(exc)


def compare_with_bounds(
    estimates: Sequence[TailEstimate],
    n: int,
    sigma2: float,
    L: float = 1.0,
    D: float = 1.0,
    params: BoundParams = DEFAULT_PARAMS,
    target: str = "sup",
) -> list[ComparisonRow]:
    """Put each estimate next to the bounds that apply at its level.

    Bounds are clamped to 1.  ``dominance`` is judged against the smallest
    applicable bound of the target (the supremum bounds for ``target="sup"``,
    Bennett for ``target="member"``):

    ``holds``       the upper confidence limit is at or below the bound
    ``violated``    the lower confidence limit is above the bound
    ``unresolved``  the interval straddles the bound (too few replications)
    ``n/a``         no bound applies
    """
    if target not in ("sup", "member"):
        raise DomainError(f"target must be 'sup' or 'member', got {target!r}")
    rows = []
    for est in estimates:
        v = est.v
        thm1 = _try(bounds.upper_bound_theorem1, n, sigma2, v, L, D, params)
        ext = _try(bounds.upper_bound_extension, n, sigma2, v, L, D, params)
        if v > 0:
            ben = (min(1.0, bounds.bennett_bound(n, sigma2, v)), True, "")
        else:
            ben = (None, False, "Bennett bound needs v > 0")
        candidates = [t[0] for t in ((thm1, ext) if target == "sup" else (ben,)) if t[1]]
        if not candidates:
            verdict = "n/a"
        else:
            bound = min(candidates)
            if est.ci_high <= bound:
                verdict = "holds"
            elif est.ci_low > bound:
                verdict = "violated"
            else:
                verdict = "unresolved"
        rows.append(
            ComparisonRow(
                v, est.hits, est.reps, est.p_hat, est.ci_low, est.ci_high,
                thm1[0], thm1[1], thm1[2],
                ext[0], ext[1], ext[2],
                ben[0], ben[1], ben[2],
                verdict,
            )
        )
    return rows
