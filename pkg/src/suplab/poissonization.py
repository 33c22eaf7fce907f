"""Poisson processes on [0, 1], the Poisson lower-bound construction, and the coupling
of a Poisson process with an empirical sample through a random stopping index.

In the Poisson model the grid-cell counts are i.i.d. Poisson(n sigma2), so the
probability that some cell reaches a count ``m`` is bounded below in closed
form; :func:`analytic_lower_bound` evaluates that bound and
:func:`poisson_max_experiment` checks it by simulation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

from .bounds import BoundParams, DEFAULT_PARAMS, lower_bound_level
from .empirical import DENSE_CELL_LIMIT, SamplePath, max_deviation_rows
from .errors import DomainError
from .function_classes import GridClassSpec, cell_index
from .montecarlo import TailEstimate
from .rng import Seed, block_generator, map_blocks, stream_key, sum_counts

# the coupled Poisson process runs at this fraction of the sample size
COUPLING_RATE = 0.99
# upper end of the construction's range, as a multiple of log(n)/n
POISSON_RANGE_FACTOR = 1.0 / 7.0
# u_hat for the Poisson construction uses this constant
POISSON_LEVEL_CONSTANT = 0.75


@dataclass(frozen=True, eq=False)
class PoissonPath:
    points: np.ndarray
    rate: float
    seed: Seed | None = None

    @property
    def count(self) -> int:
        return int(self.points.size)


def sample_poisson_process(rate: float, seed: Seed) -> PoissonPath:
    """Homogeneous Poisson process on [0, 1] with ``E Z(t) = rate * t``."""
    if not rate > 0:
        raise DomainError(f"rate must be positive, got {rate!r}")
    gen = block_generator(stream_key(seed, "poisson-process"), 0)
    points = np.sort(gen.random(gen.poisson(rate)))
    points.setflags(write=False)
    return PoissonPath(points, float(rate), seed)


def cell_counts(path: PoissonPath, sigma2: float) -> np.ndarray:
    """Counts ``V_j = Z(j sigma2) - Z((j-1) sigma2)`` for cells ``j = 1..k``."""
    spec = GridClassSpec(sigma2)
    if spec.k > 10**8:
        raise DomainError(f"{spec.k} cells are too many to tabulate")
    idx = cell_index(path.points, spec.sigma2, spec.k)
    return np.bincount(idx, minlength=spec.k + 1)[: spec.k]


def _check_poisson_range(n, sigma2) -> None:
    if not n > 1:
        raise DomainError(f"n must exceed 1, got {n!r}")
    upper = POISSON_RANGE_FACTOR * math.log(n) / n
    # the end is inclusive; allow for rounding in how callers form log(n)/(7n)
    if not (0 < sigma2 <= upper * (1 + 1e-12)):
        raise DomainError(f"sigma2 = {sigma2!r} is outside the construction's range (0, {upper!r}]")


def hat_u_poisson(n, sigma2) -> float:
    """``(3 / (4 sqrt n)) log n / log(log n / (n sigma2))``."""
    _check_poisson_range(n, sigma2)
    return POISSON_LEVEL_CONSTANT / math.sqrt(n) * math.log(n) / math.log(math.log(n) / (n * sigma2))


def _round_half_up(x: float) -> int:
    return int(math.floor(x + 0.5))


def poisson_level_count(n, sigma2) -> int:
    """Integer count ``m* = max(1, round(sqrt(n) u_hat))`` at which a cell is probed."""
    return max(1, _round_half_up(math.sqrt(n) * hat_u_poisson(n, sigma2)))


def _exponent(n, sigma2, integer_count: bool) -> float:
    return float(poisson_level_count(n, sigma2)) if integer_count else math.sqrt(n) * hat_u_poisson(n, sigma2)


def log_T(n, sigma2, integer_count: bool = True) -> float:
    """``log T`` with ``T = (1/sigma2) (n sigma2 / m)^m exp(-n sigma2)``."""
    m = _exponent(n, sigma2, integer_count)
    lam = n * sigma2
    return -math.log(sigma2) + m * (math.log(lam) - math.log(m)) - lam


def analytic_lower_bound(n, sigma2, integer_count: bool = True) -> float:
    """``1 - exp(-T)``, a lower bound for ``P(max_j V_j >= m*)`` in the Poisson model.

    ``T`` uses ``1/sigma2`` for the number of cells; with ``k = floor(1/sigma2)``
    the rigorous value differs by the factor ``k sigma2`` in ``[1 - sigma2, 1]``.
    """
    return -math.expm1(-math.exp(log_T(n, sigma2, integer_count)))


def log_poisson_pmf(m: int, lam: float) -> float:
    return m * math.log(lam) - lam - float(gammaln(m + 1))


def check_inequality_24(n, sigma2, delta: float, integer_count: bool = True) -> tuple[bool, float]:
    """Whether ``(n sigma2 / m)^m >= sigma2 exp(n sigma2) log(1/delta)``, with the log margin.

    Equivalent to ``T >= log(1/delta)``, i.e. to ``analytic_lower_bound >= 1 - delta``.
    """
    if not (0 < delta < 1):
        raise DomainError(f"delta must lie in (0, 1), got {delta!r}")
    m = _exponent(n, sigma2, integer_count)
    lam = n * sigma2
    lhs = m * (math.log(lam) - math.log(m))
    rhs = math.log(sigma2) + lam + math.log(math.log(1.0 / delta))
    margin = lhs - rhs
    return margin >= 0, margin


def poisson_max_experiment(n, sigma2, reps: int, seed: Seed, workers: int | None = 1) -> TailEstimate:
    """Simulated ``P(max_j V_j >= m*)`` for a Poisson process of rate ``n``.

    The returned estimate's ``v`` is the count threshold ``m*``.
    """
    if reps < 1:
        raise DomainError("reps must be positive")
    m_star = poisson_level_count(n, sigma2)
    spec = GridClassSpec(sigma2)
    key = stream_key(seed, "poisson-max")

    def largest_count(x: np.ndarray) -> int:
        idx = cell_index(x, spec.sigma2, spec.k)
        if spec.k > DENSE_CELL_LIMIT:
            _, counts = np.unique(idx[idx < spec.k], return_counts=True)
        else:
            counts = np.bincount(idx, minlength=spec.k + 1)[: spec.k]
        return int(counts.max()) if counts.size else 0

    def run(block: int, start: int, stop: int) -> np.ndarray:
        gen = block_generator(key, block)
        hits = sum(largest_count(gen.random(gen.poisson(n))) >= m_star for _ in range(stop - start))
        return np.array([hits])

    hits = int(sum_counts(map_blocks(run, reps, workers))[0])
    return TailEstimate.from_counts(m_star, hits, reps)


@dataclass(frozen=True, eq=False)
class CoupledPair:
    """An empirical sample and a Poisson process built from the same uniform stream.

    ``stream`` holds ``max(n, eta)`` uniforms in draw order; the sample is its
    first ``n`` entries and the Poisson process its first ``eta``.
    """

    stream: np.ndarray
    n: int
    eta: int

    @property
    def uniforms(self) -> SamplePath:
        return SamplePath(self.stream[: self.n])

    @property
    def poisson_prefix(self) -> np.ndarray:
        return np.sort(self.stream[: self.eta])

    @property
    def eta_le_n(self) -> bool:
        return self.eta <= self.n


def _coupled_from(gen: np.random.Generator, n: int) -> CoupledPair:
    eta = int(gen.poisson(COUPLING_RATE * n))
    stream = gen.random(max(n, eta))
    stream.setflags(write=False)
    return CoupledPair(stream, n, eta)


def sample_coupled(n: int, seed: Seed) -> CoupledPair:
    if n < 1:
        raise DomainError(f"n must be positive, got {n!r}")
    return _coupled_from(block_generator(stream_key(seed, "coupling"), 0), n)


def coupling_dominates(pair: CoupledPair, sigma2: float) -> bool:
    """Every grid cell (and the leftover) holds at least as many sample points as Poisson points."""
    spec = GridClassSpec(sigma2)
    size = spec.k + 1
    sample = np.bincount(cell_index(pair.stream[: pair.n], spec.sigma2, spec.k), minlength=size)
    poisson = np.bincount(cell_index(pair.stream[: pair.eta], spec.sigma2, spec.k), minlength=size)
    return bool(np.all(poisson <= sample))


@dataclass(frozen=True)
class CouplingSummary:
    reps: int
    eta_le_n: int
    fraction: TailEstimate
    dominance_failures: dict[float, int]


def coupling_experiment(n: int, reps: int, seed: Seed, sigma2_grid=(0.1, 0.01), workers: int | None = 1) -> CouplingSummary:
    """Replicate the coupling; count ``eta <= n`` and dominance failures on those replications."""
    key = stream_key(seed, "coupling-experiment")
    grid = [float(s) for s in sigma2_grid]

    def run(block: int, start: int, stop: int) -> np.ndarray:
        gen = block_generator(key, block)
        out = np.zeros(1 + len(grid), dtype=np.int64)
        for _ in range(stop - start):
            pair = _coupled_from(gen, n)
            if pair.eta_le_n:
                out[0] += 1
                for i, s2 in enumerate(grid):
                    out[1 + i] += not coupling_dominates(pair, s2)
        return out

    total = sum_counts(map_blocks(run, reps, workers))
    return CouplingSummary(
        reps=reps,
        eta_le_n=int(total[0]),
        fraction=TailEstimate.from_counts(0.0, int(total[0]), reps),
        dominance_failures={s2: int(c) for s2, c in zip(grid, total[1:])},
    )


def lower_bound_experiment(
    n: int,
    sigma2: float,
    reps: int,
    seed: Seed,
    params: BoundParams = DEFAULT_PARAMS,
    level: float | None = None,
    workers: int | None = 1,
) -> TailEstimate:
    """Estimate ``P(sup_j |S_n(f_j)| >= u_hat)`` in the grid model.

    ``level`` defaults to the regime's ``u_hat`` from :func:`lower_bound_level`.
    """
    if reps < 1:
        raise DomainError("reps must be positive")
    v = lower_bound_level(n, sigma2, params) if level is None else float(level)
    spec = GridClassSpec(sigma2)
    key = stream_key(seed, "lower-bound")
    root_n = math.sqrt(n)

    def run(block: int, start: int, stop: int) -> np.ndarray:
        rows = block_generator(key, block).random((stop - start, n))
        dev, _ = max_deviation_rows(rows, spec.sigma2, spec.k)
        return np.array([int(np.count_nonzero(dev / root_n >= v))])

    hits = int(sum_counts(map_blocks(run, reps, workers))[0])
    return TailEstimate.from_counts(v, hits, reps)
