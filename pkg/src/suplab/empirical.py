"""Uniform samples, the empirical distribution function and grid-class suprema."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .function_classes import GridClassSpec, cell_index, evaluate_member
from .rng import Seed, block_generator, stream_key

# above this many cells the per-row sparse path is used instead of bincount
DENSE_CELL_LIMIT = 1 << 20


@dataclass(frozen=True, eq=False)
class SamplePath:
    """Sorted i.i.d. uniform sample on [0, 1]."""

    points: np.ndarray
    seed: Seed | None = None

    def __post_init__(self):
        pts = np.sort(np.asarray(self.points, dtype=np.float64))
        if pts.ndim != 1 or pts.size == 0:
            raise DomainError("a sample path needs at least one point")
        if pts[0] < 0 or pts[-1] > 1:
            raise DomainError("sample points must lie in [0, 1]")
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)

    @property
    def n(self) -> int:
        return int(self.points.size)


def sample_uniform(n: int, seed: Seed) -> SamplePath:
    """``n`` sorted uniform draws from the counter-based stream of ``seed``."""
    if n < 1:
        raise DomainError(f"sample size must be at least 1, got {n!r}")
    points = block_generator(stream_key(seed, "uniform"), 0).random(n)
    return SamplePath(points, seed)


def _check_x(x) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    if np.any(~(x > 0)) or np.any(x > 1):
        raise DomainError("argument must lie in (0, 1]")
    return x


def empirical_cdf(path: SamplePath, x):
    """Fraction of sample points strictly below ``x``."""
    x = _check_x(x)
    out = np.searchsorted(path.points, x, side="left") / path.n
    return out if out.ndim else float(out)


def normalized_process(path: SamplePath, x):
    """``G_n(x) = sqrt(n) (F_n(x) - x)``."""
    x = _check_x(x)
    out = math.sqrt(path.n) * (np.searchsorted(path.points, x, side="left") / path.n - x)
    return out if out.ndim else float(out)


def _sparse_max_deviation(points: np.ndarray, sigma2: float, k: int) -> tuple[float, int]:
    """max_j |N_j - n sigma2| over cells 1..k, visiting only occupied cells."""
    n = points.size
    ns2 = n * sigma2
    idx = cell_index(points, sigma2, k)
    idx = idx[idx < k]
    occupied, counts = np.unique(idx, return_counts=True)
    best, best_j = -1.0, None
    if occupied.size:
        dev = np.abs(counts - ns2)
        a = int(np.argmax(dev))
        best, best_j = float(dev[a]), int(occupied[a]) + 1
    if occupied.size < k:
        # lowest empty cell: first position where the sorted occupied ids skip one
        gaps = np.nonzero(occupied != np.arange(occupied.size))[0]
        first_empty = int(gaps[0]) if gaps.size else int(occupied.size)
        if ns2 > best or (ns2 == best and first_empty + 1 < best_j):
            best, best_j = ns2, first_empty + 1
    return best, best_j


def max_deviation_rows(rows: np.ndarray, sigma2: float, k: int | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Row-wise ``max_j |N_j - n sigma2|`` and its lowest argmax (1-based).

    ``rows`` has shape ``(reps, n)``; each row is a sample (sorting not needed).
    """
    rows = np.atleast_2d(np.asarray(rows, dtype=np.float64))
    reps, n = rows.shape
    if k is None:
        k = GridClassSpec(sigma2).k
    ns2 = n * sigma2
    if k > DENSE_CELL_LIMIT:
        out = [_sparse_max_deviation(r, sigma2, k) for r in rows]
        return np.array([o[0] for o in out]), np.array([o[1] for o in out], dtype=object)
    values = np.empty(reps)
    argmax = np.empty(reps, dtype=np.int64)
    # keep the count matrix around 2**24 entries
    chunk = max(1, (1 << 24) // (k + 1))
    for s in range(0, reps, chunk):
        part = rows[s : s + chunk]
        b = part.shape[0]
        flat = cell_index(part, sigma2, k) + (k + 1) * np.arange(b)[:, None]
        counts = np.bincount(flat.ravel(), minlength=b * (k + 1)).reshape(b, k + 1)[:, :k]
        dev = np.abs(counts - ns2)
        a = np.argmax(dev, axis=1)
        values[s : s + b] = dev[np.arange(b), a]
        argmax[s : s + b] = a + 1
    return values, argmax


def sup_via_increments(path: SamplePath, sigma2: float) -> tuple[float, int]:
    """``max_j |G_n(j sigma2) - G_n((j-1) sigma2)|`` and the lowest maximizing cell.

    Each increment equals ``|N_j - n sigma2| / sqrt(n)`` with ``N_j`` the count in
    cell ``j``, which is how it is computed.
    """
    spec = GridClassSpec(sigma2)
    values, argmax = max_deviation_rows(path.points[None, :], spec.sigma2, spec.k)
    return float(values[0]) / math.sqrt(path.n), int(argmax[0])


def sup_direct(path: SamplePath, spec: GridClassSpec, max_cells: int = 10**6) -> float:
    """``max_j |S_n(f_j)|`` by explicit summation of every member over the sample."""
    if not spec.centered:
        raise DomainError("sup_direct needs the centered class")
    if spec.k > max_cells:
        raise DomainError(f"class has {spec.k} members; explicit summation capped at {max_cells}")
    x = path.points
    chunk = max(1, (1 << 22) // x.size)
    best = 0.0
    for start in range(1, spec.k + 1, chunk):
        js = np.arange(start, min(start + chunk, spec.k + 1))
        sums = evaluate_member(spec, js[:, None], x[None, :]).sum(axis=1)
        best = max(best, float(np.max(np.abs(sums))))
    return best / math.sqrt(path.n)


def _range_max_table(values: np.ndarray) -> list[np.ndarray]:
    table = [values]
    width = 1
    while 2 * width <= values.size:
        prev = table[-1]
        table.append(np.maximum(prev[:-width], prev[width:]))
        width *= 2
    return table


def _range_max(table: list[np.ndarray], lo: np.ndarray, hi: np.ndarray) -> np.ndarray:
    """Max of the base array over inclusive index ranges ``[lo, hi]`` (lo <= hi)."""
    length = hi - lo + 1
    level = np.floor(np.log2(length)).astype(np.int64)
    out = np.empty(lo.size)
    for p in np.unique(level):
        sel = level == p
        row = table[p]
        out[sel] = np.maximum(row[lo[sel]], row[hi[sel] - (1 << p) + 1])
    return out


def modulus_statistic(path: SamplePath, delta: float) -> float:
    """Exact ``sup |G_n(t) - G_n(s)|`` over ``0 <= s, t <= 1``, ``|t - s| <= delta``.

    With ``H(t) = #{x_i < t} - n t`` the supremum is attained (as a limit) at
    pairs of breakpoints: left values ``H(x)`` and right limits ``H(x+)`` at
    sample points, the ends 0 and 1, and window pairs ``(s, s + delta)``.  Pairs
    of sample points are scanned with a sparse range-max table, windows through
    the piecewise-constant count ``#[s, s + delta)``.  O(n log n).
    """
    if not (0 < delta <= 1):
        raise DomainError(f"window width must lie in (0, 1], got {delta!r}")
    x = path.points
    n = path.n
    c_left = np.searchsorted(x, x, side="left").astype(np.float64)
    c_right = np.searchsorted(x, x, side="right").astype(np.float64)
    h_left = c_left - n * x  # H(x_i)
    h_right = c_right - n * x  # H(x_i+)
    h_one = float(np.searchsorted(x, 1.0, side="left")) - n  # H(1)
    idx = np.arange(n)
    best = 0.0

    # H(x_a+) - H(x_b) over x_a - delta < x_b <= x_a
    lo = np.searchsorted(x, x - delta, side="right")
    best = max(best, float(np.max(h_right + _range_max(_range_max_table(-h_left), lo, idx))))
    # H(x_b+) - H(x_a) over x_a - delta <= x_b <= x_a
    lo = np.searchsorted(x, x - delta, side="left")
    best = max(best, float(np.max(_range_max(_range_max_table(h_right), lo, idx) - h_left)))

    # pairs with one end at 0 or 1
    if (x < delta).any():
        best = max(best, float(np.max(h_right[x < delta])))
    if (x <= delta).any():
        best = max(best, float(np.max(-h_left[x <= delta])))
    near1 = x >= 1.0 - delta
    if near1.any():
        best = max(best, float(np.max(h_one - h_left[near1])), float(np.max(h_right[near1] - h_one)))

    # windows (s, s + delta): the count #[s, s + delta) is constant between breakpoints
    top = max(0.0, 1.0 - delta)
    breaks = np.concatenate(([0.0, top], x, x - delta))
    breaks = np.unique(breaks[(breaks >= 0.0) & (breaks <= top)])
    s = np.concatenate((breaks, 0.5 * (breaks[:-1] + breaks[1:])))
    t = np.minimum(s + delta, 1.0)
    inside = np.searchsorted(x, t, side="left") - np.searchsorted(x, s, side="left")
    span = n * (t - s)
    best = max(best, float(np.max(inside - span)), float(np.max(span - inside)))
    return best / math.sqrt(n)
