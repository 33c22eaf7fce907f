"""Grid indicator classes on [0, 1] and their covering numbers.

For ``0 < sigma2 <= 1`` the class has ``k = floor(1/sigma2)`` members.  Member
``j`` (1-based) is the indicator of the cell ``[(j-1) sigma2, j sigma2)``, or,
for the centered class, that indicator minus ``sigma2``.  The leftover interval
``[k sigma2, 1)`` belongs to no cell.  Members are evaluated in closed form and
never tabulated, since ``k`` can be astronomically large.

Cell boundaries are always computed as ``float(j) * sigma2``; every routine in
the package that assigns points to cells uses the same products, so the
different computations of the same statistic agree exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError

# largest k for which integer cell indices are exact in float64
_EXACT_INDEX_LIMIT = 2**53


def _cells(sigma2: float) -> int:
    k = int(math.floor(1.0 / sigma2))
    if k < _EXACT_INDEX_LIMIT:
        while k > 1 and k * sigma2 > 1.0:
            k -= 1
        while (k + 1) * sigma2 <= 1.0:
            k += 1
    return max(k, 1)


@dataclass(frozen=True)
class GridClassSpec:
    sigma2: float
    centered: bool = True
    k: int = field(init=False)

    def __post_init__(self):
        s = self.sigma2
        if isinstance(s, bool) or not isinstance(s, (int, float, np.floating)) or not (0 < s <= 1):
            raise DomainError(f"sigma2 must lie in (0, 1], got {s!r}")
        object.__setattr__(self, "sigma2", float(s))
        object.__setattr__(self, "k", _cells(float(s)))

    @property
    def leftover(self) -> tuple[float, float]:
        """The interval ``[k sigma2, 1)`` covered by no member."""
        return (self.k * self.sigma2, 1.0)

    def cell(self, j: int) -> tuple[float, float]:
        _check_index(self, j)
        return (float(j - 1) * self.sigma2, float(j) * self.sigma2)


def build_grid_class(sigma2: float, centered: bool = True) -> GridClassSpec:
    return GridClassSpec(sigma2, centered)


def _check_index(spec: GridClassSpec, j) -> None:
    j_arr = np.asarray(j)
    if j_arr.dtype.kind not in "iu" and not np.all(j_arr == np.floor(j_arr)):
        raise DomainError(f"member index must be an integer, got {j!r}")
    if np.any(j_arr < 1) or np.any(j_arr > spec.k):
        raise DomainError(f"member index out of range 1..{spec.k}: {j!r}")


def evaluate_member(spec: GridClassSpec, j, x):
    """Value of member ``j`` at ``x``; broadcasts over array ``j`` and ``x``."""
    _check_index(spec, j)
    j_f = np.asarray(j, dtype=np.float64)
    x = np.asarray(x, dtype=np.float64)
    lo = (j_f - 1.0) * spec.sigma2
    hi = j_f * spec.sigma2
    inside = ((lo <= x) & (x < hi)).astype(np.float64)
    out = inside - spec.sigma2 if spec.centered else inside
    return out if out.ndim else float(out)


def cell_index(x, sigma2: float, k: int) -> np.ndarray:
    """0-based cell of each point, with ``k`` marking the leftover interval.

    Uses the same boundary products as :func:`evaluate_member`.  Returns
    ``int64`` when ``k`` is small enough for exact indices, ``float64``
    otherwise.
    """
    x = np.asarray(x, dtype=np.float64)
    shape = x.shape
    x = x.reshape(-1)
    t = x / sigma2
    q = np.floor(t)
    # Division and the boundary products can disagree only when t sits within
    # a few ulps of an integer; redo those points with the products themselves.
    tol = max(1e-9, 16.0 * float(k) * np.finfo(np.float64).eps)
    if tol < 0.25:
        np.subtract(t, q, out=t)
        np.subtract(t, 0.5, out=t)
        np.abs(t, out=t)
        near = np.flatnonzero(t > 0.5 - tol)
    else:
        near = np.arange(x.size)
    if near.size:
        xs, qs = x[near], q[near]
        qs = np.where(qs * sigma2 > xs, qs - 1.0, qs)
        qs = np.where((qs + 1.0) * sigma2 <= xs, qs + 1.0, qs)
        q[near] = qs
    # with q exact, x >= k sigma2 exactly when q >= k
    np.clip(q, 0.0, float(k), out=q)
    q = q.reshape(shape)
    if k < _EXACT_INDEX_LIMIT:
        return q.astype(np.int64)
    return q


def member_moments(spec: GridClassSpec, j: int) -> tuple[float, float]:
    """Mean and second moment of member ``j`` under the uniform law.

    Integrates the step function piece by piece: on the cell the member takes
    ``1 - sigma2`` (or 1), elsewhere ``-sigma2`` (or 0).
    """
    lo, hi = spec.cell(j)
    inside = hi - lo
    outside = 1.0 - inside
    a, b = (1.0 - spec.sigma2, -spec.sigma2) if spec.centered else (1.0, 0.0)
    mean = a * inside + b * outside
    second = a * a * inside + b * b * outside
    return mean, second


def _check_measure(spec: GridClassSpec, nu) -> np.ndarray:
    nu = np.asarray(nu, dtype=np.float64)
    if nu.shape != (spec.k + 1,):
        raise DomainError(f"measure must have k + 1 = {spec.k + 1} cell masses, got shape {nu.shape}")
    if np.any(nu < 0) or abs(float(nu.sum()) - 1.0) > 1e-12:
        raise DomainError("measure must be a probability vector (non-negative, summing to 1)")
    return nu


def uniform_measure(spec: GridClassSpec) -> np.ndarray:
    """Cell masses of Lebesgue measure; the last entry is the leftover."""
    nu = np.full(spec.k + 1, spec.sigma2)
    nu[-1] = 1.0 - spec.k * spec.sigma2
    return nu


def l1_distance(spec: GridClassSpec, i: int, j: int, nu) -> float:
    """L1(nu) distance between members ``i`` and ``j``.

    ``nu`` gives the masses of the k cells followed by the leftover; the class
    differences depend on the measure only through these masses.
    """
    _check_index(spec, i)
    _check_index(spec, j)
    nu = _check_measure(spec, nu)
    if i == j:
        return 0.0
    return float(nu[i - 1] + nu[j - 1])


@dataclass(frozen=True)
class CoverResult:
    centers: list[int]
    epsilon: float
    m: int


def greedy_cover(spec: GridClassSpec, nu, epsilon: float) -> CoverResult:
    """Farthest-point epsilon-net of the class in L1(nu).

    Starts from member 1 and keeps adding the member farthest from the current
    centers (lowest index on ties) until every member is strictly closer than
    ``epsilon`` to some center.
    """
    if not epsilon > 0:
        raise DomainError(f"epsilon must be positive, got {epsilon!r}")
    nu = _check_measure(spec, nu)
    mass = nu[:-1]
    # distance to the nearest center; members are pairwise at nu_i + nu_j
    nearest = mass + mass[0]
    nearest[0] = 0.0
    centers = [1]
    while True:
        far = int(np.argmax(nearest))
        if nearest[far] < epsilon:
            break
        centers.append(far + 1)
        nearest = np.minimum(nearest, mass + mass[far])
        nearest[far] = 0.0
    return CoverResult(centers=centers, epsilon=float(epsilon), m=len(centers))


def fit_dense_parameters(spec: GridClassSpec, epsilon_grid, measures) -> tuple[float, float]:
    """Empirical parameter ``D`` and exponent ``L`` with ``m(eps) <= D eps^-L``.

    For each epsilon the cover size is maximized over ``measures``.  ``L`` is the
    least-squares slope of ``log m`` against ``-log eps`` (clamped to >= 1), and
    ``D`` is then the smallest value making the bound hold on the whole grid
    (clamped to >= 1).
    """
    eps = np.asarray(list(epsilon_grid), dtype=np.float64)
    measures = list(measures)
    if eps.size == 0 or not measures:
        raise DomainError("need a non-empty epsilon grid and at least one measure")
    if np.any(eps <= 0):
        raise DomainError("epsilon values must be positive")
    sizes = np.array([max(greedy_cover(spec, nu, e).m for nu in measures) for e in eps], dtype=np.float64)
    x = -np.log(eps)
    y = np.log(sizes)
    if np.unique(eps).size >= 2:
        slope = float(np.polyfit(x, y, 1)[0])
    else:
        slope = 0.0
    L_hat = max(1.0, slope)
    D_hat = max(1.0, float(np.max(sizes * eps**L_hat)))
    return D_hat, L_hat
