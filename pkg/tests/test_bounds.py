import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from suplab import bounds
from suplab.bounds import BoundParams, DEFAULT_PARAMS, Regime
from suplab.errors import DomainError, NotApplicableError


# ---- regimes

@pytest.mark.parametrize(
    "n, sigma2, regime",
    [
        (10, 1e-300, Regime.A),
        (10, 0.01, Regime.B),
        (10, 0.5, Regime.C),
        (100, Fraction(1, 10**401), Regime.A),
        (100, 1e-300, Regime.B),  # 100**-200 = 1e-400 is below the smallest double
        (31, 1e-300, Regime.A),
        (32, 1e-300, Regime.B),
        (2, 1.0, Regime.C),
    ],
)
def test_classify_regime_examples(n, sigma2, regime):
    assert bounds.classify_regime(n, sigma2) is regime


def test_regime_boundaries_go_to_lower_case():
    for n in range(2, 300):
        assert bounds.classify_regime(n, Fraction(1, n**200)) is Regime.A
        assert bounds.classify_regime(n, Fraction(1, n**200) * Fraction(1001, 1000)) is Regime.B
        assert bounds.classify_regime(n, math.log(n) / (8 * n)) is Regime.B
        assert bounds.classify_regime(n, np.nextafter(math.log(n) / (8 * n), 1)) is Regime.C
    assert bounds.classify_regime(2, 2.0**-200) is Regime.A


@pytest.mark.parametrize("n, sigma2", [(1, 0.1), (2.5, 0.1), (10, 0.0), (10, 1.5), (10, -1e-3), (True, 0.1)])
def test_classify_regime_rejects_bad_input(n, sigma2):
    with pytest.raises(DomainError):
        bounds.classify_regime(n, sigma2)


# ---- thresholds, against the formulas written out by hand

def test_threshold_u_case_a():
    # C3 / sqrt(n) * (L + log D / log n)
    assert bounds.threshold_u(10, 1e-300) == pytest.approx(20 / math.sqrt(10))
    assert bounds.threshold_u(10, 1e-300, L=2, D=math.e) == pytest.approx(20 / math.sqrt(10) * (2 + 1 / math.log(10)))


def test_threshold_u_case_b():
    n, s2 = 100, 1e-3
    expected = 20 / 10 * math.log(100) / math.log(math.log(100) / (100 * 1e-3))
    assert bounds.threshold_u(n, s2) == pytest.approx(expected, rel=1e-13)
    assert expected == pytest.approx(2.404936, rel=1e-6)


def test_threshold_u_case_c():
    n, s2 = 1000, 0.1
    expected = 20 / math.sqrt(1000) * (100 + math.log(1000))
    assert bounds.threshold_u(n, s2) == pytest.approx(expected, rel=1e-13)


def test_threshold_u_accepts_tiny_fraction():
    # sigma2 = 10**-401 underflows a double but stays in regime A for n = 100
    assert bounds.threshold_u(100, Fraction(1, 10**401)) == pytest.approx(2.0)


def test_threshold_u_bar():
    s2 = 0.01
    expected = 20 * 0.1 * math.sqrt(math.log(2 / 0.1))
    assert bounds.threshold_u_bar(s2) == pytest.approx(expected, rel=1e-13)
    d = 5.0
    expected = 20 * 0.1 * (math.sqrt(math.log(20)) + math.log(d) ** 0.75)
    assert bounds.threshold_u_bar(s2, 1, d) == pytest.approx(expected, rel=1e-13)


@pytest.mark.parametrize("L, D", [(0.5, 1), (1, 0.5)])
def test_thresholds_reject_small_L_or_D(L, D):
    with pytest.raises(DomainError):
        bounds.threshold_u(100, 0.1, L, D)
    with pytest.raises(DomainError):
        bounds.threshold_u_bar(0.1, L, D)


# ---- tail bounds

def test_theorem1_value_and_applicability():
    n, s2 = 1000, 0.1
    u = bounds.threshold_u(n, s2)
    v = 1.5 * u
    expected = 2 * math.exp(-0.5 * math.sqrt(n) * v * math.log(v / (math.sqrt(n) * s2)))
    assert bounds.upper_bound_theorem1(n, s2, v) == pytest.approx(expected, rel=1e-12)
    with pytest.raises(NotApplicableError) as info:
        bounds.upper_bound_theorem1(n, s2, 0.99 * u)
    assert info.value.condition == "lower"
    assert info.value.threshold == pytest.approx(u)


def test_theorem1_ratio_condition():
    # with a tiny C5, u falls below sqrt(n) sigma2 in regime C
    params = DEFAULT_PARAMS.with_overrides(C5=0.01)
    n, s2 = 1000, 0.5
    u = bounds.threshold_u(n, s2, params=params)
    assert u < math.sqrt(n) * s2
    with pytest.raises(NotApplicableError) as info:
        bounds.upper_bound_theorem1(n, s2, u, params=params)
    assert info.value.condition == "ratio"


def test_extension_range():
    n, s2 = 10**6, 0.1
    ub = bounds.threshold_u_bar(s2)
    top = math.sqrt(n) * s2
    v = (ub + top) / 2
    assert bounds.upper_bound_extension(n, s2, v) == pytest.approx(2 * math.exp(-0.125 * v * v / s2))
    for bad, cond in ((0.9 * ub, "lower"), (1.1 * top, "upper")):
        with pytest.raises(NotApplicableError) as info:
            bounds.upper_bound_extension(n, s2, bad)
        assert info.value.condition == cond
    with pytest.raises(NotApplicableError) as info:
        bounds.upper_bound_extension(100, 1e-6, 1.0)
    assert info.value.condition == "regime"


def test_gap_range():
    n, s2 = 10**6, 0.1
    ub, u = bounds.threshold_u_bar(s2), bounds.threshold_u(n, s2)
    v = (ub + u) / 2
    assert bounds.upper_bound_gap(s2, v, n) == pytest.approx(2 * math.exp(-0.125 * v * v / s2))
    with pytest.raises(NotApplicableError):
        bounds.upper_bound_gap(s2, ub, n)
    with pytest.raises(NotApplicableError):
        bounds.upper_bound_gap(s2, 1.01 * u, n)


def _bennett_direct(n, s2, v):
    w = v / (math.sqrt(n) * s2)
    return math.exp(-n * s2 * ((1 + w) * math.log1p(w) - w))


@pytest.mark.parametrize("n, s2, v", [(100, 0.1, 1.0), (1000, 0.25, 3.0), (50, 0.01, 0.2), (10, 0.5, 2.0)])
def test_bennett_matches_textbook_form(n, s2, v):
    assert bounds.bennett_bound(n, s2, v) == pytest.approx(_bennett_direct(n, s2, v), rel=1e-12)


def test_bennett_small_w_series():
    n, s2 = 100, 0.5
    v = 1e-6  # w = 2e-7, series branch
    h = lambda w: w * w / 2 - w**3 / 6 + w**4 / 12
    w = v / (math.sqrt(n) * s2)
    assert bounds.bennett_bound(n, s2, v) == pytest.approx(math.exp(-n * s2 * h(w)), rel=1e-15)


def test_bennett_edges():
    assert bounds.bennett_bound(100, 0.1, 0.0) == 1.0
    assert bounds.bennett_bound(100, 1e-300, 1.0) < 1e-100
    with pytest.raises(DomainError):
        bounds.bennett_bound(100, 0.1, -1.0)


@settings(max_examples=200, deadline=None)
@given(
    n=st.integers(2, 10**9),
    log_s2=st.floats(-300, 0),
    v=st.floats(1e-8, 1e3),
    dv=st.floats(1e-6, 10),
)
def test_bennett_is_a_decreasing_probability(n, log_s2, v, dv):
    s2 = 10.0**log_s2
    a, b = bounds.bennett_bound(n, s2, v), bounds.bennett_bound(n, s2, v + dv)
    assert 0 <= b <= a <= 1


@settings(max_examples=200, deadline=None)
@given(n=st.integers(2, 10**9), log_s2=st.floats(-300, 0), factor=st.floats(1.0001, 1e4))
def test_simplified_bennett_dominates_bennett(n, log_s2, factor):
    s2 = 10.0**log_s2
    v = factor * 2 * math.sqrt(n) * s2
    assert bounds.bennett_simplified(n, s2, v) >= bounds.bennett_bound(n, s2, v)


def test_simplified_bennett_requires_large_level():
    n, s2 = 100, 0.1
    with pytest.raises(NotApplicableError):
        bounds.bennett_simplified(n, s2, 2 * math.sqrt(n) * s2)


def test_theorem31_conditions():
    n, s2 = 10**4, 0.01  # n s2 = 100 > log n
    assert bounds.upper_bound_theorem31(n, s2, 16) == pytest.approx(math.exp(-4 * 100 / 2))
    with pytest.raises(NotApplicableError) as info:
        bounds.upper_bound_theorem31(n, s2, 15.9)
    assert info.value.condition == "A"
    with pytest.raises(NotApplicableError) as info:
        bounds.upper_bound_theorem31(n, 1e-4, 16)
    assert info.value.condition == "variance"


def test_lower_bound_level_cases():
    assert bounds.lower_bound_level(10, 1e-300) == pytest.approx(0.5 / math.sqrt(10))
    n, s2 = 10**4, 1e-6
    expected = 0.5 / 100 * math.log(n) / math.log(math.log(n) / (n * s2))
    assert bounds.lower_bound_level(n, s2) == pytest.approx(expected, rel=1e-13)
    s2 = 0.04
    assert bounds.lower_bound_level(n, s2) == pytest.approx(0.5 * 0.2 * math.sqrt(math.log(10)), rel=1e-13)


# ---- constants

def test_params_validation_and_parsing():
    with pytest.raises(DomainError):
        BoundParams(C2=1.0)
    with pytest.raises(DomainError):
        BoundParams(C1=-1)
    p = BoundParams.parse("C1=3, K=0.1")
    assert p.C1 == 3 and p.K == 0.1 and p.C2 == DEFAULT_PARAMS.C2
    with pytest.raises(DomainError):
        BoundParams.parse("nope=1")
    with pytest.raises(DomainError):
        BoundParams.parse("C1")
    assert BoundParams(**DEFAULT_PARAMS.as_dict()) == DEFAULT_PARAMS


def test_default_constants_are_calibrated():
    report = bounds.calibration_report()
    assert all(entry["ok"] for entry in report.values()), report
    assert report["dominance"]["min_ratio"] >= 1
    assert report["non_vacuous"]["max_bound"] <= 1


def test_calibration_detects_bad_constants():
    report = bounds.calibration_report(DEFAULT_PARAMS.with_overrides(C4=0.01, C5=0.01))
    assert not report["dominance"]["ok"]
