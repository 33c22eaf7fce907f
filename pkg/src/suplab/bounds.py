"""Closed-form thresholds and tail bounds for suprema of normalized partial sums.

Every function here is a pure evaluator.  ``n`` is the sample size, ``sigma2``
the variance bound of the class, ``L`` and ``D`` the exponent and parameter of
the L1-dense class, and ``v`` a level on the scale of ``S_n(f) = n^{-1/2} sum
f(xi_j)``.  Logarithms are natural.

``sigma2`` may be passed as a :class:`fractions.Fraction` when it is too small
for a double (for instance ``Fraction(1, 10**401)``); regime classification and
the thresholds are evaluated in log space so they stay exact in that case.
"""

from __future__ import annotations

import enum
import math
from dataclasses import asdict, dataclass, fields, replace
from fractions import Fraction
from numbers import Real

import numpy as np

from .errors import DomainError, NotApplicableError

__all__ = [
    "Regime",
    "BoundParams",
    "DEFAULT_PARAMS",
    "classify_regime",
    "threshold_u",
    "threshold_u_bar",
    "upper_bound_theorem1",
    "upper_bound_extension",
    "upper_bound_gap",
    "bennett_bound",
    "bennett_simplified",
    "upper_bound_theorem31",
    "lower_bound_level",
    "calibration_report",
]

# regime (a) ends at sigma2 = n ** -REGIME_A_POWER
REGIME_A_POWER = 200
# regime (b) ends at sigma2 = REGIME_B_FACTOR * log(n) / n
REGIME_B_FACTOR = Fraction(1, 8)


class Regime(enum.Enum):
    A = "A"
    B = "B"
    C = "C"

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True)
class BoundParams:
    """Universal constants of the bounds.

    None of these is pinned numerically by the theory; the defaults are
    calibration choices that keep the threshold-dominance and non-vacuity
    properties true on wide sweeps (see :func:`calibration_report`).
    """

    C1: float = 2.0
    C2: float = 0.5
    C3: float = 20.0
    C4: float = 20.0
    C5: float = 20.0
    C6: float = 20.0
    K: float = 0.25
    alpha: float = 0.125
    C: float = 2.0
    alpha_bar: float = 0.125
    A0: float = 16.0
    Cbar: float = 0.5

    def __post_init__(self):
        for f in fields(self):
            value = getattr(self, f.name)
            if not isinstance(value, Real) or not math.isfinite(value) or value <= 0:
                raise DomainError(f"constant {f.name} must be a positive finite number, got {value!r}")
        if self.C2 >= 1:
            raise DomainError(f"constant C2 must satisfy C2 < 1, got {self.C2!r}")

    def with_overrides(self, **overrides: float) -> "BoundParams":
        unknown = set(overrides) - {f.name for f in fields(self)}
        if unknown:
            raise DomainError(f"unknown constant(s): {', '.join(sorted(unknown))}")
        return replace(self, **{k: float(v) for k, v in overrides.items()})

    @classmethod
    def parse(cls, text: str, base: "BoundParams | None" = None) -> "BoundParams":
        """Parse ``"C1=2,C2=0.4"`` into a params object (applied over ``base``)."""
        base = base if base is not None else cls()
        overrides = {}
        for item in filter(None, (s.strip() for s in text.split(","))):
            name, sep, value = item.partition("=")
            if not sep:
                raise DomainError(f"malformed constant assignment {item!r}; expected name=value")
            try:
                overrides[name.strip()] = float(value)
            except ValueError:
                raise DomainError(f"constant {name.strip()} has non-numeric value {value!r}") from None
        return base.with_overrides(**overrides)

    def as_dict(self) -> dict[str, float]:
        return asdict(self)


DEFAULT_PARAMS = BoundParams()


def _log(x) -> float:
    if isinstance(x, Fraction):
        return math.log(x.numerator) - math.log(x.denominator)
    return math.log(x)


def _check_n(n, *, integer: bool = True) -> float:
    if isinstance(n, bool) or not isinstance(n, Real):
        raise DomainError(f"sample size must be a number, got {n!r}")
    if integer and n != math.floor(n):
        raise DomainError(f"sample size must be an integer, got {n!r}")
    if not n >= 2:
        raise DomainError(f"sample size must be at least 2, got {n!r}")
    return float(n)


def _check_sigma2(sigma2) -> float:
    """Validate 0 < sigma2 <= 1 and return log(sigma2)."""
    if isinstance(sigma2, bool) or not isinstance(sigma2, Real):
        raise DomainError(f"sigma2 must be a real number, got {sigma2!r}")
    if not (0 < sigma2 <= 1):
        raise DomainError(f"sigma2 must lie in (0, 1], got {sigma2!r}")
    return _log(sigma2)


def _check_LD(L, D) -> None:
    if not L >= 1:
        raise DomainError(f"exponent L must be >= 1, got {L!r}")
    if not D >= 1:
        raise DomainError(f"parameter D must be >= 1, got {D!r}")


def classify_regime(n, sigma2) -> Regime:
    """Which case of the main theorem ``(n, sigma2)`` falls into.

    Boundaries belong to the lower case: ``sigma2 == n**-200`` is case A and
    ``sigma2 == log(n)/(8n)`` is case B.
    """
    nf = _check_n(n)
    log_s2 = _check_sigma2(sigma2)
    gap = log_s2 + REGIME_A_POWER * math.log(nf)
    if abs(gap) < 1e-9:
        # too close to call in floating point: compare sigma2 * n**200 with 1 exactly
        in_a = Fraction(sigma2) * int(n) ** REGIME_A_POWER <= 1
    else:
        in_a = gap < 0
    if in_a:
        return Regime.A
    # compare against the boundary exactly when both sides are representable
    boundary = float(REGIME_B_FACTOR) * math.log(nf) / nf
    if sigma2 <= boundary:
        return Regime.B
    return Regime.C


def _log_z(nf: float, log_s2: float) -> float:
    """log( log n / (n sigma2) ), the case-(b) divisor."""
    return math.log(math.log(nf)) - math.log(nf) - log_s2


def threshold_u(n, sigma2, L=1.0, D=1.0, params: BoundParams = DEFAULT_PARAMS) -> float:
    """Level ``u(sigma)`` above which the main tail bound holds."""
    regime = classify_regime(n, sigma2)
    _check_LD(L, D)
    nf = float(n)
    log_s2 = _log(sigma2)
    root_n = math.sqrt(nf)
    if regime is Regime.A:
        return params.C3 / root_n * (L + math.log(D) / math.log(nf))
    if regime is Regime.B:
        return params.C4 / root_n * (L * math.log(nf) / _log_z(nf, log_s2) + math.log(D))
    return params.C5 / root_n * (nf * float(sigma2) + L * math.log(nf) + math.log(D))


def threshold_u_bar(sigma2, L=1.0, D=1.0, params: BoundParams = DEFAULT_PARAMS) -> float:
    """Lower end ``u_bar(sigma)`` of the Gaussian-type range."""
    log_s2 = _check_sigma2(sigma2)
    _check_LD(L, D)
    sigma = math.exp(0.5 * log_s2)
    log_2_over_sigma = math.log(2.0) - 0.5 * log_s2
    return params.C6 * sigma * (L ** 0.75 * math.sqrt(log_2_over_sigma) + math.log(D) ** 0.75)


def _log_ratio(nf: float, log_s2: float, v: float) -> float:
    """log( v / (sqrt(n) sigma2) )."""
    return math.log(v) - 0.5 * math.log(nf) - log_s2


def upper_bound_theorem1(n, sigma2, v, L=1.0, D=1.0, params: BoundParams = DEFAULT_PARAMS) -> float:
    """``C1 exp(-C2 sqrt(n) v log(v / (sqrt(n) sigma2)))`` for ``v >= u(sigma)``.

    Raises :class:`NotApplicableError` (carrying ``u``) below the threshold or
    when ``v <= sqrt(n) sigma2``.  The value is not clamped to 1.
    """
    u = threshold_u(n, sigma2, L, D, params)
    if not v >= u:
        raise NotApplicableError(f"level {v!r} is below u(sigma) = {u!r}", condition="lower", threshold=u)
    nf = float(n)
    log_ratio = _log_ratio(nf, _log(sigma2), v)
    if log_ratio <= 0:
        raise NotApplicableError(
            f"level {v!r} does not exceed sqrt(n) sigma2; the exponent would be non-negative",
            condition="ratio",
            threshold=u,
        )
    return params.C1 * math.exp(-params.C2 * math.sqrt(nf) * v * log_ratio)


def _require_regime_c(n, sigma2) -> None:
    regime = classify_regime(n, sigma2)
    if regime is not Regime.C:
        raise NotApplicableError(
            f"(n={n!r}, sigma2={sigma2!r}) is in regime {regime}, bound needs regime C",
            condition="regime",
        )


def upper_bound_extension(n, sigma2, v, L=1.0, D=1.0, params: BoundParams = DEFAULT_PARAMS) -> float:
    """Gaussian-type bound ``C exp(-alpha v^2 / sigma2)`` on ``u_bar <= v <= sqrt(n) sigma2``."""
    _require_regime_c(n, sigma2)
    u_bar = threshold_u_bar(sigma2, L, D, params)
    top = math.sqrt(float(n)) * float(sigma2)
    if not v >= u_bar:
        raise NotApplicableError(f"level {v!r} is below u_bar = {u_bar!r}", condition="lower", threshold=u_bar)
    if not v <= top:
        raise NotApplicableError(f"level {v!r} exceeds sqrt(n) sigma2 = {top!r}", condition="upper", threshold=top)
    return params.C * math.exp(-params.alpha * v * v / float(sigma2))


def upper_bound_gap(sigma2, v, n, params: BoundParams = DEFAULT_PARAMS, L=1.0, D=1.0) -> float:
    """Gaussian-type bound with ``alpha_bar`` on ``u_bar < v <= u``.

    Only meaningful when ``L`` and ``D`` stay bounded independently of
    ``sigma2``; that is the caller's responsibility.
    """
    _require_regime_c(n, sigma2)
    u_bar = threshold_u_bar(sigma2, L, D, params)
    u = threshold_u(n, sigma2, L, D, params)
    if not v > u_bar:
        raise NotApplicableError(f"level {v!r} is not above u_bar = {u_bar!r}", condition="lower", threshold=u_bar)
    if not v <= u:
        raise NotApplicableError(f"level {v!r} exceeds u(sigma) = {u!r}", condition="upper", threshold=u)
    return params.C * math.exp(-params.alpha_bar * v * v / float(sigma2))


def _bennett_exponent(nf: float, log_s2: float, v: float) -> float:
    # n s2 [(1+w) log(1+w) - w] rewritten as (n s2 + sqrt(n) v) log1p(w) - sqrt(n) v
    log_w = _log_ratio(nf, log_s2, v)
    log1p_w = float(np.logaddexp(0.0, log_w))
    ns2 = math.exp(math.log(nf) + log_s2)
    root_n_v = math.sqrt(nf) * v
    if log_w < -8:
        # small w: h(w) = w^2/2 - w^3/6 + w^4/12 - ...
        w = math.exp(log_w)
        return ns2 * w * w * (0.5 - w / 6.0 + w * w / 12.0)
    return (ns2 + root_n_v) * log1p_w - root_n_v


def bennett_bound(n, sigma2, v) -> float:
    """Bennett's bound on ``P(S_n(f) > v)`` for one centered member with variance <= sigma2."""
    nf = _check_n(n, integer=False)
    log_s2 = _check_sigma2(sigma2)
    if v < 0 or not math.isfinite(v):
        raise DomainError(f"level must be a finite non-negative number, got {v!r}")
    if v == 0:
        return 1.0
    return math.exp(-_bennett_exponent(nf, log_s2, v))


def bennett_simplified(n, sigma2, v, params: BoundParams = DEFAULT_PARAMS) -> float:
    """``exp(-K sqrt(n) v log(v/(sqrt(n) sigma2)))``, valid for ``v > 2 sqrt(n) sigma2``."""
    nf = _check_n(n, integer=False)
    log_s2 = _check_sigma2(sigma2)
    log_ratio = _log_ratio(nf, log_s2, v) if v > 0 else -math.inf
    if not log_ratio > math.log(2.0):
        raise NotApplicableError(
            f"level {v!r} must exceed 2 sqrt(n) sigma2", condition="lower",
            threshold=2 * math.sqrt(nf) * float(sigma2),
        )
    return math.exp(-params.K * math.sqrt(nf) * v * log_ratio)


def upper_bound_theorem31(n, sigma2, A, L=1.0, D=1.0, params: BoundParams = DEFAULT_PARAMS) -> float:
    """``exp(-sqrt(A) n sigma2 / 2)``, bounding the tail at level ``A sqrt(n) sigma2``.

    Requires ``n sigma2 > L log n + log D`` and ``A >= A0``.
    """
    nf = _check_n(n)
    _check_sigma2(sigma2)
    _check_LD(L, D)
    ns2 = nf * float(sigma2)
    floor_ = L * math.log(nf) + math.log(D)
    if not ns2 > floor_:
        raise NotApplicableError(
            f"n sigma2 = {ns2!r} must exceed L log n + log D = {floor_!r}",
            condition="variance", threshold=floor_,
        )
    if not A >= params.A0:
        raise NotApplicableError(f"multiplier A = {A!r} is below A0 = {params.A0!r}", condition="A", threshold=params.A0)
    return math.exp(-math.sqrt(A) * ns2 / 2.0)


def lower_bound_level(n, sigma2, params: BoundParams = DEFAULT_PARAMS) -> float:
    """Level ``u_hat(sigma)`` the supremum reaches with high probability in the grid model."""
    regime = classify_regime(n, sigma2)
    nf = float(n)
    if regime is Regime.A:
        return params.Cbar / math.sqrt(nf)
    log_s2 = _log(sigma2)
    if regime is Regime.B:
        return params.Cbar / math.sqrt(nf) * math.log(nf) / _log_z(nf, log_s2)
    sigma = math.exp(0.5 * log_s2)
    return params.Cbar * sigma * math.sqrt(math.log(2.0) - 0.5 * log_s2)


def calibration_report(
    params: BoundParams = DEFAULT_PARAMS,
    n_grid=None,
    sigma2_grid=None,
) -> dict[str, dict]:
    """Sweep the properties the default constants are chosen to satisfy.

    Returns one entry per property with ``ok`` and the worst observed value:

    ``dominance``     u >= 2 sqrt(n) sigma2 in regimes B and C
    ``coherence``     case-(b)/case-(c) ratio of u at the boundary in [1/10, 10]
    ``non_vacuous``   main bound at v = u is <= 1
    ``bennett_K``     simplified Bennett bound >= Bennett bound for v > 2 sqrt(n) sigma2
    """
    if n_grid is None:
        n_grid = np.unique(np.round(np.logspace(math.log10(2), 9, 200)).astype(np.int64))
    if sigma2_grid is None:
        sigma2_grid = np.logspace(-300, 0, 200)
    worst_dom = math.inf
    worst_vac = 0.0
    for n in n_grid:
        n = int(n)
        for s2 in sigma2_grid:
            s2 = float(s2)
            regime = classify_regime(n, s2)
            u = threshold_u(n, s2, 1, 1, params)
            if regime is not Regime.A:
                worst_dom = min(worst_dom, u / (2 * math.sqrt(n) * s2))
            try:
                worst_vac = max(worst_vac, upper_bound_theorem1(n, s2, u, 1, 1, params))
            except NotApplicableError:
                # u at or below sqrt(n) sigma2: the bound says nothing at its own threshold
                worst_vac = math.inf
    ratios = []
    for n in n_grid:
        n = int(n)
        if n < 100:
            continue
        nf = float(n)
        s2 = math.log(nf) / (8 * nf)
        u_b = params.C4 / math.sqrt(nf) * math.log(nf) / _log_z(nf, math.log(s2))
        u_c = params.C5 / math.sqrt(nf) * (nf * s2 + math.log(nf))
        ratios.append(u_b / u_c)
    # ratio of exponents: simplified / Bennett must be <= 1 for the bound order to hold
    w = np.logspace(math.log10(2.0) + 1e-12, 12, 2000)
    bennett_h = (1 + w) * np.log1p(w) - w
    simplified = params.K * w * np.log(w)
    worst_k = float(np.max(simplified / bennett_h))
    return {
        "dominance": {"ok": worst_dom >= 1.0, "min_ratio": worst_dom},
        "coherence": {"ok": all(0.1 <= r <= 10 for r in ratios), "min": min(ratios), "max": max(ratios)},
        "non_vacuous": {"ok": worst_vac <= 1.0, "max_bound": worst_vac},
        "bennett_K": {"ok": worst_k <= 1.0, "max_exponent_ratio": worst_k},
    }
