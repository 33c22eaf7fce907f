from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from suplab import function_classes as fc
from suplab.errors import DomainError


@pytest.mark.parametrize(
    "sigma2, k",
    [(1.0, 1), (0.5, 2), (0.3, 3), (0.1, 10), (0.25, 4), (1 / 3, 3), (1e-300, int(1e300))],
)
def test_member_count(sigma2, k):
    spec = fc.build_grid_class(sigma2)
    if k < 2**53:
        assert spec.k == k
    assert spec.k * spec.sigma2 <= 1.0
    if spec.k < 2**53:
        assert (spec.k + 1) * spec.sigma2 > 1.0


def test_cells_and_leftover():
    spec = fc.GridClassSpec(0.3)
    assert spec.cell(1) == (0.0, 0.3)
    assert spec.cell(3) == (float(2) * 0.3, float(3) * 0.3)
    assert spec.leftover == (3 * 0.3, 1.0)


@pytest.mark.parametrize("sigma2", [0.0, -0.1, 1.5, float("nan"), True])
def test_bad_sigma2(sigma2):
    with pytest.raises(DomainError):
        fc.GridClassSpec(sigma2)


def test_evaluate_member_values():
    spec = fc.GridClassSpec(0.3)
    x = np.array([0.0, 0.29, 0.3, 0.65, 0.95])
    assert np.allclose(fc.evaluate_member(spec, 1, x), [0.7, 0.7, -0.3, -0.3, -0.3])
    assert np.allclose(fc.evaluate_member(spec, 3, x), [-0.3, -0.3, -0.3, 0.7, -0.3])
    raw = fc.GridClassSpec(0.3, centered=False)
    assert fc.evaluate_member(raw, 2, 0.3) == 1.0
    assert fc.evaluate_member(raw, 2, 0.6) == 0.0  # right end belongs to the next cell


@pytest.mark.parametrize("j", [0, 4, 1.5, -1])
def test_member_index_range(j):
    with pytest.raises(DomainError):
        fc.evaluate_member(fc.GridClassSpec(0.3), j, 0.5)


def test_members_partition_the_grid():
    rng = np.random.default_rng(1)
    for s2 in (0.3, 0.07, 0.011, 1.0):
        spec = fc.GridClassSpec(s2, centered=False)
        x = rng.random(2000)
        total = fc.evaluate_member(spec, np.arange(1, spec.k + 1)[:, None], x[None, :]).sum(axis=0)
        assert np.array_equal(total, (x < spec.k * spec.sigma2).astype(float))


@settings(max_examples=300, deadline=None)
@given(log_s2=st.floats(-12, 0), x=st.floats(0, 1, exclude_max=True))
def test_cell_index_agrees_with_members(log_s2, x):
    s2 = 10.0**log_s2
    spec = fc.GridClassSpec(s2, centered=False)
    idx = int(fc.cell_index(np.array([x]), spec.sigma2, spec.k)[0])
    if idx < spec.k:
        assert fc.evaluate_member(spec, idx + 1, x) == 1.0
    else:
        assert x >= spec.k * spec.sigma2


def test_cell_index_huge_class_uses_float_indices():
    idx = fc.cell_index(np.array([0.5]), 1e-300, int(1e300))
    assert idx.dtype == np.float64 and idx[0] == pytest.approx(0.5e300)


@pytest.mark.parametrize("sigma2", [1.0, 0.5, 0.3, 0.1, 1e-3, 1e-6, 1e-9])
def test_member_moments_exact(sigma2):
    spec = fc.GridClassSpec(sigma2)
    s = Fraction(sigma2)
    exact = float(s * (1 - s))
    for j in {1, spec.k}:
        mean, second = fc.member_moments(spec, j)
        assert abs(mean) < 1e-14
        assert abs(second - exact) < 1e-14
        assert second <= sigma2
    raw_mean, raw_second = fc.member_moments(fc.GridClassSpec(sigma2, centered=False), 1)
    assert raw_mean == pytest.approx(sigma2) and raw_second == pytest.approx(sigma2)


def test_l1_distance_uniform():
    spec = fc.GridClassSpec(0.1)
    nu = fc.uniform_measure(spec)
    assert fc.l1_distance(spec, 2, 7, nu) == pytest.approx(0.2)
    assert fc.l1_distance(spec, 3, 3, nu) == 0.0


def test_l1_distance_matches_numerical_integration():
    spec = fc.GridClassSpec(0.3)
    nu = np.array([0.1, 0.5, 0.2, 0.2])  # cells 1..3 and the leftover
    # integrate |f_i - f_j| against a density piecewise constant on the cells
    edges = [0.0, 0.3, 0.6, 0.9, 1.0]
    x = np.concatenate([np.linspace(a, b, 4001)[:-1] + (b - a) / 8000 for a, b in zip(edges, edges[1:])])
    w = np.concatenate([np.full(4000, m / 4000) for m in nu])
    diff = np.abs(fc.evaluate_member(spec, 1, x) - fc.evaluate_member(spec, 2, x))
    assert fc.l1_distance(spec, 1, 2, nu) == pytest.approx(float(np.sum(diff * w)), abs=1e-9)


def test_measure_validation():
    spec = fc.GridClassSpec(0.3)
    with pytest.raises(DomainError):
        fc.l1_distance(spec, 1, 2, [0.5, 0.5])
    with pytest.raises(DomainError):
        fc.l1_distance(spec, 1, 2, [0.5, 0.5, 0.5, -0.5])


def test_greedy_cover_extremes():
    spec = fc.GridClassSpec(0.1)
    nu = fc.uniform_measure(spec)
    # every pair is at distance 0.2: a larger epsilon needs one center, 0.2 itself needs all
    assert fc.greedy_cover(spec, nu, 0.2001).m == 1
    assert fc.greedy_cover(spec, nu, 0.2).m == 10
    with pytest.raises(DomainError):
        fc.greedy_cover(spec, nu, 0.0)


@settings(max_examples=60, deadline=None)
@given(k=st.integers(1, 30), alpha=st.floats(0.1, 5), seed=st.integers(0, 2**32 - 1), eps=st.floats(1e-3, 1))
def test_greedy_cover_covers(k, alpha, seed, eps):
    spec = fc.GridClassSpec(1.0 / (k + 0.5))
    nu = np.random.default_rng(seed).dirichlet(np.full(spec.k + 1, alpha))
    nu = nu / nu.sum()
    cover = fc.greedy_cover(spec, nu, eps)
    for j in range(1, spec.k + 1):
        assert min(fc.l1_distance(spec, j, c, nu) for c in cover.centers) < eps
    assert len(set(cover.centers)) == cover.m


def test_cover_size_nonincreasing_in_epsilon():
    spec = fc.GridClassSpec(0.02)
    rng = np.random.default_rng(3)
    for nu in (fc.uniform_measure(spec), rng.dirichlet(np.ones(spec.k + 1))):
        nu = nu / nu.sum()
        sizes = [fc.greedy_cover(spec, nu, e).m for e in np.logspace(-3, 0, 40)]
        assert all(b <= a for a, b in zip(sizes, sizes[1:]))


def test_fit_dense_parameters():
    spec = fc.GridClassSpec(0.01)
    rng = np.random.default_rng(0)
    measures = [fc.uniform_measure(spec)] + [p / p.sum() for p in rng.dirichlet(np.ones(spec.k + 1), 5)]
    eps = np.logspace(-2.5, -0.5, 12)
    D, L = fc.fit_dense_parameters(spec, eps, measures)
    assert L >= 1 and D >= 1
    for e in eps:
        m = max(fc.greedy_cover(spec, nu, e).m for nu in measures)
        assert m <= D * e**-L * (1 + 1e-12)
