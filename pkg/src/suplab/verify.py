"""Invariant suite run by ``suplab verify``.

Each check is a function of a :class:`Context` returning ``(passed, detail)``.
Checks run at full scale; a complete run takes several minutes, dominated by
the Poisson simulation at ``n = 10**6``.
"""

from __future__ import annotations

import math
import os
import tempfile
import time
from dataclasses import dataclass, field
from decimal import Decimal, localcontext
from fractions import Fraction
from typing import Callable, TextIO

import numpy as np
from scipy import stats

from . import bounds, function_classes as fc, montecarlo as mc, poissonization as po
from .bounds import BoundParams, Regime
from .empirical import (
    SamplePath,
    max_deviation_rows,
    modulus_statistic,
    normalized_process,
    sample_uniform,
    sup_direct,
    sup_via_increments,
)
from .rng import block_generator, stream_key


@dataclass
class Context:
    seed: int = 0
    constants: str = ""
    workers: int = 1
    params: BoundParams | None = None
    cache: dict = field(default_factory=dict)

    def rng(self, check_id: str) -> np.random.Generator:
        return block_generator(stream_key(self.seed, "verify", check_id), 0)

    def require_params(self) -> BoundParams:
        if self.params is None:
            raise RuntimeError("constants are invalid; see bounds.params")
        return self.params

    def calibration(self) -> dict:
        if "calibration" not in self.cache:
            self.cache["calibration"] = bounds.calibration_report(self.require_params())
        return self.cache["calibration"]


@dataclass(frozen=True)
class CheckResult:
    id: str
    passed: bool
    seconds: float
    detail: str


Check = Callable[[Context], tuple[bool, str]]
CHECKS: dict[str, Check] = {}


def check(check_id: str):
    def register(fn: Check) -> Check:
        CHECKS[check_id] = fn
        return fn

    return register


# ---------------------------------------------------------------- bounds


@check("bounds.params")
def _params(ctx: Context) -> tuple[bool, str]:
    ctx.params = BoundParams.parse(ctx.constants)
    return True, ", ".join(f"{k}={v!r}" for k, v in ctx.params.as_dict().items())


@check("bounds.regime_partition")
def _regime_partition(ctx: Context) -> tuple[bool, str]:
    rng = ctx.rng("regime")
    ns = np.unique(np.round(np.exp(rng.uniform(math.log(2), math.log(1e9), 10**4))).astype(np.int64))
    bad = 0
    count = 0
    for n in ns:
        n = int(n)
        for log10_s2 in rng.uniform(-300, 0, 10**4 // ns.size + 1):
            s2 = 10.0**log10_s2
            if s2 == 0:
                continue
            count += 1
            got = bounds.classify_regime(n, s2)
            if Fraction(s2) * n**200 <= 1:
                want = Regime.A
            elif s2 <= math.log(n) / (8 * n):
                want = Regime.B
            else:
                want = Regime.C
            bad += got is not want
    # exact boundary points belong to the lower case
    edges = [n for n in range(2, 200) if bounds.classify_regime(n, Fraction(1, n**200)) is not Regime.A]
    edges += [n for n in range(2, 200) if bounds.classify_regime(n, math.log(n) / (8 * n)) is not Regime.B]
    return bad == 0 and not edges, f"{count} pairs, {bad} mislabelled, {len(edges)} boundary misfits"


@check("bounds.threshold_dominance")
def _dominance(ctx: Context) -> tuple[bool, str]:
    rep = ctx.calibration()["dominance"]
    return rep["ok"], f"min u / (2 sqrt(n) sigma2) over regimes B, C = {rep['min_ratio']:.4g}"


@check("bounds.boundary_coherence")
def _coherence(ctx: Context) -> tuple[bool, str]:
    rep = ctx.calibration()["coherence"]
    return rep["ok"], f"case (b)/(c) ratio in [{rep['min']:.4g}, {rep['max']:.4g}], required [0.1, 10]"


@check("bounds.non_vacuous")
def _non_vacuous(ctx: Context) -> tuple[bool, str]:
    rep = ctx.calibration()["non_vacuous"]
    return rep["ok"], f"max bound at v = u: {rep['max_bound']:.4g}"


def _bennett_grid():
    for n in (10, 100, 10**3, 10**4, 10**6, 10**9):
        for s2 in (0.5, 0.1, 1e-2, 1e-4, 1e-8, 1e-30):
            yield n, s2


@check("bounds.bennett_simplified_order")
def _bennett_k(ctx: Context) -> tuple[bool, str]:
    params = ctx.require_params()
    rep = ctx.calibration()["bennett_K"]
    bad = 0
    for n, s2 in _bennett_grid():
        base = 2 * math.sqrt(n) * s2
        for v in base * np.logspace(1e-9, 4, 60):
            if bounds.bennett_simplified(n, s2, v, params) < bounds.bennett_bound(n, s2, v):
                bad += 1
    ok = rep["ok"] and bad == 0
    return ok, f"max exponent ratio {rep['max_exponent_ratio']:.4g}; {bad} grid points with simplified < Bennett"


@check("bounds.bennett_shape")
def _bennett_shape(ctx: Context) -> tuple[bool, str]:
    problems = []
    for n, s2 in _bennett_grid():
        if bounds.bennett_bound(n, s2, 0.0) != 1.0:
            problems.append(f"({n}, {s2}) at v=0")
        v = np.concatenate(([0.0], np.logspace(-6, 3, 400)))
        b = np.array([bounds.bennett_bound(n, s2, x) for x in v])
        if np.any(b > 1):
            problems.append(f"({n}, {s2}) exceeds 1")
        positive = b > 0
        if np.any(np.diff(b[positive]) >= 0) or np.any(np.diff(b) > 0):
            problems.append(f"({n}, {s2}) not strictly decreasing")
    return not problems, "; ".join(problems[:3]) or f"{len(list(_bennett_grid()))} (n, sigma2) pairs"


def _nonincreasing(fn, grid) -> int:
    """Number of increases of ``fn`` along ``grid`` where it applies."""
    values = []
    for v in grid:
        try:
            values.append(fn(v))
        except bounds.NotApplicableError:
            values.append(None)
    bad = 0
    for a, b in zip(values, values[1:]):
        if a is not None and b is not None and b > a:
            bad += 1
    return bad


@check("bounds.monotone_in_v")
def _monotone(ctx: Context) -> tuple[bool, str]:
    params = ctx.require_params()
    bad = 0
    cases = 0
    for n in (10, 10**3, 10**5, 10**8):
        for s2 in (1e-300, 1e-50, 1e-6, math.log(n) / (8 * n), 0.05, 0.3):
            if s2 > 1:
                continue
            grid = np.logspace(-4, 4, 300)
            fns = [
                lambda v: bounds.upper_bound_theorem1(n, s2, v, 1, 1, params),
                lambda v: bounds.bennett_bound(n, s2, v),
                lambda v: bounds.bennett_simplified(n, s2, v, params),
            ]
            if bounds.classify_regime(n, s2) is Regime.C:
                fns += [
                    lambda v: bounds.upper_bound_extension(n, s2, v, 1, 1, params),
                    lambda v: bounds.upper_bound_gap(s2, v, n, params),
                ]
            for fn in fns:
                bad += _nonincreasing(fn, grid)
                cases += 1
            # the large-level bound, as a function of the multiplier A
            if n * s2 > math.log(n):
                bad += _nonincreasing(lambda A: bounds.upper_bound_theorem31(n, s2, A, 1, 1, params), np.linspace(1, 400, 200))
                cases += 1
    return bad == 0, f"{cases} evaluator sweeps, {bad} increases"


# ------------------------------------------------------- function classes


def _sigma2_values(count: int = 50) -> list[float]:
    return [float(s) for s in np.logspace(-6, 0, count)]


@check("function_classes.hypotheses")
def _hypotheses(ctx: Context) -> tuple[bool, str]:
    worst_mean = worst_second = 0.0
    bad_sup = bad_order = 0
    for s2 in _sigma2_values():
        spec = fc.GridClassSpec(s2)
        exact_s2 = Fraction(s2)
        exact_second = float(exact_s2 * (1 - exact_s2))
        for j in sorted({1, (spec.k + 1) // 2, spec.k}):
            mean, second = fc.member_moments(spec, j)
            worst_mean = max(worst_mean, abs(mean))
            worst_second = max(worst_second, abs(second - exact_second))
            bad_order += not exact_second <= s2
            lo, hi = spec.cell(j)
            probe = np.array([0.0, lo, (lo + hi) / 2, min(hi, 0.5), np.nextafter(1.0, 0)])
            bad_sup += bool(np.any(np.abs(fc.evaluate_member(spec, j, probe)) > 1))
    ok = worst_mean < 1e-14 and worst_second < 1e-14 and bad_sup == 0 and bad_order == 0
    return ok, f"max |mean| {worst_mean:.3g}, max second-moment error {worst_second:.3g}"


@check("function_classes.partition")
def _partition(ctx: Context) -> tuple[bool, str]:
    rng = ctx.rng("partition")
    bad = 0
    for s2 in np.concatenate((rng.uniform(1e-3, 1, 40), [1.0, 0.5, 0.3, 0.1])):
        spec = fc.GridClassSpec(float(s2), centered=False)
        x = np.concatenate((rng.random(500), [0.0, spec.k * spec.sigma2, np.nextafter(1.0, 0)]))
        x = x[x < 1]
        js = np.arange(1, spec.k + 1)[:, None]
        total = fc.evaluate_member(spec, js, x[None, :]).sum(axis=0)
        want = np.where(x < spec.k * spec.sigma2, 1.0, 0.0)
        bad += int(np.count_nonzero(total != want))
    return bad == 0, f"{bad} points with member sum different from the cell indicator"


@check("function_classes.cover")
def _cover(ctx: Context) -> tuple[bool, str]:
    rng = ctx.rng("cover")
    bad_cover = bad_mono = 0
    for s2 in (0.5, 0.1, 0.03, 0.01):
        spec = fc.GridClassSpec(s2)
        nus = [fc.uniform_measure(spec)] + [rng.dirichlet(np.full(spec.k + 1, a)) for a in (0.3, 1.0, 5.0)]
        for nu in nus:
            nu = nu / nu.sum()
            sizes = []
            for eps in np.logspace(-3, 0.5, 25):
                cover = fc.greedy_cover(spec, nu, eps)
                sizes.append(cover.m)
                for j in range(1, spec.k + 1):
                    if not min(fc.l1_distance(spec, j, c, nu) for c in cover.centers) < eps:
                        bad_cover += 1
            bad_mono += int(np.count_nonzero(np.diff(sizes) > 0))
    return bad_cover == 0 and bad_mono == 0, f"{bad_cover} uncovered members, {bad_mono} size increases in epsilon"


# ------------------------------------------------------------- empirical


@check("empirical.identity")
def _identity(ctx: Context) -> tuple[bool, str]:
    rng = ctx.rng("identity")
    worst = 0.0
    for i in range(1000):
        n = int(rng.integers(2, 10**4, endpoint=True))
        s2 = float(10.0 ** rng.uniform(-3, 0))
        path = sample_uniform(n, [ctx.seed, i])
        a = sup_direct(path, fc.GridClassSpec(s2))
        b, _ = sup_via_increments(path, s2)
        worst = max(worst, abs(a - b))
    return worst <= 1e-12, f"1000 configurations, max |difference| {worst:.3g}"


@check("empirical.merge_scaling")
def _merge(ctx: Context) -> tuple[bool, str]:
    bad = 0
    cases = 0
    for i, n in enumerate((10, 100, 1000, 10**4)):
        path = sample_uniform(n, [ctx.seed, 7, i])
        for m in range(1, 12):
            s2 = 2.0**-m
            base, _ = sup_via_increments(path, s2)
            for A in (2, 3, 4, 5, 8):
                if A * s2 > 1:
                    continue
                merged, _ = sup_via_increments(path, A * s2)
                cases += 1
                bad += merged > A * base + 1e-12
    return bad == 0, f"{cases} (path, sigma2, A) cases, {bad} violations"


@check("empirical.step_monotone")
def _step(ctx: Context) -> tuple[bool, str]:
    bad = 0
    for i, n in enumerate((1, 5, 50, 5000)):
        path = sample_uniform(n, [ctx.seed, 8, i])
        x = np.unique(np.concatenate((np.linspace(0, 1, 2001)[1:], path.points, np.nextafter(path.points, 2))))
        x = x[(x > 0) & (x <= 1)]
        g = normalized_process(path, x) + math.sqrt(n) * x
        bad += int(np.count_nonzero(np.diff(g) < -1e-9))
    return bad == 0, f"{bad} decreases of G_n(x) + sqrt(n) x"


@check("empirical.permutation_invariance")
def _perm(ctx: Context) -> tuple[bool, str]:
    rng = ctx.rng("perm")
    bad = 0
    for s2 in (0.3, 0.01, 1e-5, 1e-200):
        rows = rng.random((50, 200))
        a, ja = max_deviation_rows(rows, s2)
        b, jb = max_deviation_rows(rng.permuted(rows, axis=1), s2)
        bad += int(np.count_nonzero(a != b)) + int(np.count_nonzero(ja != jb))
    return bad == 0, f"{bad} mismatches after permuting samples"


@check("empirical.modulus_full_window")
def _modulus_full(ctx: Context) -> tuple[bool, str]:
    worst = 0.0
    for i, n in enumerate((1, 2, 10, 1000)):
        path = sample_uniform(n, [ctx.seed, 9, i])
        x = path.points
        h = np.concatenate(([0.0], np.arange(n) - n * x, np.arange(1, n + 1) - n * x, [0.0]))
        spread = (h.max() - h.min()) / math.sqrt(n)
        worst = max(worst, abs(modulus_statistic(path, 1.0) - spread))
    return worst <= 1e-12, f"max |modulus(1) - range of G_n| = {worst:.3g}"


# -------------------------------------------------------- poissonization


@check("poissonization.partition")
def _pois_partition(ctx: Context) -> tuple[bool, str]:
    bad = 0
    for i, (rate, s2) in enumerate([(10, 0.3), (1000, 0.01), (10**5, 0.0007), (50, 1.0)]):
        path = po.sample_poisson_process(rate, [ctx.seed, 10, i])
        spec = fc.GridClassSpec(s2)
        leftover = int(np.count_nonzero(path.points >= spec.k * spec.sigma2))
        bad += int(po.cell_counts(path, s2).sum()) + leftover != path.count
    return bad == 0, f"{bad} paths where counts do not add up"


@check("poissonization.pmf_exact")
def _pmf(ctx: Context) -> tuple[bool, str]:
    worst = 0.0
    with localcontext() as dc:
        dc.prec = 60
        for lam in np.linspace(0.05, 30, 120):
            lam = float(lam)
            for m in range(0, 21):
                exact = Decimal(lam) ** m * (-Decimal(lam)).exp() / math.factorial(m)
                got = math.exp(po.log_poisson_pmf(m, lam))
                worst = max(worst, float(abs(Decimal(got) - exact) / exact))
    return worst <= 1e-12, f"max relative error {worst:.3g}"


@check("poissonization.exp_chain")
def _chain(ctx: Context) -> tuple[bool, str]:
    bad = 0
    for p in np.concatenate(([0.0, 1.0], np.logspace(-20, 0, 200))):
        for k in np.unique(np.logspace(0, 12, 100).astype(np.int64)):
            bad += -math.expm1(k * math.log1p(-p)) < -math.expm1(-k * p) if p < 1 else False
    return bad == 0, f"{bad} grid points where 1 - (1-p)^k < 1 - exp(-kp)"


@check("poissonization.inequality_implies_bound")
def _implication(ctx: Context) -> tuple[bool, str]:
    bad = held = 0
    for n in np.logspace(2, 12, 60):
        for frac in np.linspace(0.02, 1.0, 25):
            s2 = frac * po.POISSON_RANGE_FACTOR * math.log(n) / n
            for delta in (0.5, 0.1, 0.01, 1e-4):
                for integer in (True, False):
                    holds, _ = po.check_inequality_24(n, s2, delta, integer)
                    if holds:
                        held += 1
                        bad += po.analytic_lower_bound(n, s2, integer) < 1 - delta - 1e-12
    return bad == 0, f"inequality held at {held} points, bound below 1 - delta at {bad}"


@check("poissonization.lower_bound")
def _pois_lower(ctx: Context) -> tuple[bool, str]:
    n = 10**6
    s2 = math.log(n) / 7 / n
    holds, margin = po.check_inequality_24(n, s2, 0.1)
    analytic = po.analytic_lower_bound(n, s2)
    est = po.poisson_max_experiment(n, s2, 10**4, ctx.seed, ctx.workers)
    sim_ok = est.p_hat >= analytic - 3 * est.half_width
    ok = holds and analytic >= 0.9 and sim_ok
    return ok, (
        f"margin {margin:.4g}, 1 - exp(-T) = {analytic:.6g}, "
        f"simulated {est.p_hat:.6g} (half-width {est.half_width:.3g}, m* = {int(est.v)})"
    )


@check("poissonization.coupling")
def _coupling(ctx: Context) -> tuple[bool, str]:
    summary = po.coupling_experiment(10**4, 10**4, ctx.seed, (0.1, 0.01), ctx.workers)
    frac = summary.eta_le_n / summary.reps
    failures = sum(summary.dominance_failures.values())
    ok = frac >= 0.99 and failures == 0
    return ok, f"eta <= n on {frac:.4f} of replications (needs >= 0.99); {failures} dominance failures"


# ------------------------------------------------------------ montecarlo


@check("montecarlo.exact_small")
def _exact_small(ctx: Context) -> tuple[bool, str]:
    exact = mc.exact_tail_small(4, 0.5, 1.0)
    config = mc.ExperimentConfig(4, 0.5, [1.0], 10**5, ctx.seed)
    (est,) = mc.estimate_tail(config, ctx.workers)
    pvalue = stats.binomtest(est.hits, est.reps, float(exact)).pvalue
    ok = exact == Fraction(1, 8) and pvalue >= 0.001
    return ok, f"exact {exact}, simulated {est.p_hat:.5f}, two-sided p-value {pvalue:.3g}"


def _oracle_levels(n: int, s2: float) -> list[float]:
    """Five levels strictly between attainable deviations, so ties cannot occur."""
    devs = np.unique(np.abs(np.arange(n + 1) - n * s2)) / math.sqrt(n)
    mids = (devs[:-1] + devs[1:]) / 2 if devs.size > 1 else devs / 2
    picks = np.unique(np.quantile(mids, [0.0, 0.25, 0.5, 0.75, 1.0], method="nearest"))
    levels = list(picks)
    extra = float(devs[-1]) + 0.1
    while len(levels) < 5:
        levels.append(extra)
        extra += 0.1
    return sorted(levels)


def _oracle_configs():
    for n in range(1, 9):
        for k in range(1, 5):
            yield n, k, 1.0 / (k + 0.25)


@check("montecarlo.oracle_grid")
def _oracle_grid(ctx: Context) -> tuple[bool, str]:
    worst = 1.0
    fails = []
    for i, (n, k, s2) in enumerate(_oracle_configs()):
        levels = _oracle_levels(n, s2)
        ests = mc.estimate_tail(mc.ExperimentConfig(n, s2, levels, 10**5, [ctx.seed, i]), ctx.workers)
        for est in ests:
            p = float(mc.exact_tail_small(n, s2, est.v))
            pvalue = stats.binomtest(est.hits, est.reps, p).pvalue if 0 < p < 1 else float(est.hits == round(p * est.reps))
            worst = min(worst, pvalue)
            if pvalue < 0.001:
                fails.append(f"n={n} k={k} v={est.v:.4g}")
    return not fails, f"32 (n, k) pairs x 5 levels; smallest p-value {worst:.3g}" + (f"; outside: {', '.join(fails)}" if fails else "")


@check("montecarlo.level_monotone")
def _level_monotone(ctx: Context) -> tuple[bool, str]:
    bad = 0
    for i, (n, s2) in enumerate([(50, 0.1), (500, 0.01), (100, 1e-300), (10, 0.5)]):
        levels = list(np.linspace(0.05, 4, 40))
        ests = mc.estimate_tail(mc.ExperimentConfig(n, s2, levels, 2000, [ctx.seed, 11, i]), ctx.workers)
        p = [e.p_hat for e in ests]
        bad += int(np.count_nonzero(np.diff(p) > 0))
    return bad == 0, f"{bad} increases of p_hat in v"


@check("montecarlo.chi_square")
def _chi_square(ctx: Context) -> tuple[bool, str]:
    reps = 20000
    configs = []
    for n, k, s2 in _oracle_configs():
        for v in _oracle_levels(n, s2)[:3]:
            p = float(mc.exact_tail_small(n, s2, v))
            if 0.001 < p < 0.999:
                configs.append((n, s2, v, p))
                break
    configs = configs[:: max(1, len(configs) // 20)][:20]
    stat = 0.0
    for i, (n, s2, v, p) in enumerate(configs):
        (est,) = mc.estimate_tail(mc.ExperimentConfig(n, s2, [v], reps, [ctx.seed, 12, i]), ctx.workers)
        stat += (est.hits - reps * p) ** 2 / (reps * p * (1 - p))
    df = len(configs)
    pvalue = float(stats.chi2.sf(stat, df))
    return df == 20 and pvalue >= 0.001, f"chi-square {stat:.4g} on {df} configurations, p-value {pvalue:.3g}"


def _bennett_configs():
    for n in (10**3, 10**4):
        for s2 in (0.25, 0.01):
            base = 2 * math.sqrt(n) * s2
            yield n, s2, [base * f for f in (1.0, 1.25, 1.5, 1.75, 2.0)]


def _bennett_rows(ctx: Context) -> list[tuple[int, float, mc.TailEstimate, float]]:
    if "bennett" not in ctx.cache:
        rows = []
        for i, (n, s2, levels) in enumerate(_bennett_configs()):
            for est in mc.estimate_member_tail(n, s2, levels, 10**5, [ctx.seed, 13, i], ctx.workers):
                rows.append((n, s2, est, bounds.bennett_bound(n, s2, est.v)))
        ctx.cache["bennett"] = rows
    return ctx.cache["bennett"]


@check("montecarlo.bennett_dominance")
def _bennett_dominance(ctx: Context) -> tuple[bool, str]:
    rows = _bennett_rows(ctx)
    bad = [r for r in rows if r[2].ci_high > r[3]]
    worst = max(rows, key=lambda r: r[2].ci_high - r[3])
    return not bad, (
        f"{len(rows) - len(bad)}/{len(rows)} levels with Wilson upper limit <= Bennett; "
        f"worst: n={worst[0]} sigma2={worst[1]} upper limit {worst[2].ci_high:.3g} vs bound {worst[3]:.3g}"
    )


@check("montecarlo.bennett_no_violation")
def _bennett_no_violation(ctx: Context) -> tuple[bool, str]:
    rows = _bennett_rows(ctx)
    bad = [r for r in rows if r[2].ci_low > r[3]]
    hits = sum(r[2].hits for r in rows)
    return not bad, f"{len(bad)} levels with Wilson lower limit above Bennett; {hits} exceedances in total"


@check("montecarlo.regime_a_lower")
def _regime_a(ctx: Context) -> tuple[bool, str]:
    params = ctx.require_params()
    n, s2 = 100, 1e-300
    level = params.Cbar / math.sqrt(n)
    est = po.lower_bound_experiment(n, s2, 10**4, ctx.seed, params, level=level, workers=ctx.workers)
    regime = bounds.classify_regime(n, s2)
    return est.p_hat == 1.0, f"P(sup >= {level:.4g}) estimated {est.p_hat} over {est.reps}; classified regime {regime}"


# ------------------------------------------------------------------- cli


@check("cli.determinism")
def _determinism(ctx: Context) -> tuple[bool, str]:
    import json

    from .cli import main

    config = {"n": 200, "sigma2": 0.01, "levels": ["u_bar", "2*sqrt(n)*sigma2", 0.5, 1.0], "reps": 5000, "seed": ctx.seed}
    with tempfile.TemporaryDirectory() as tmp:
        cfg = os.path.join(tmp, "config.json")
        with open(cfg, "w") as fh:
            json.dump(config, fh)
        outs = []
        for tag, workers in (("a", 1), ("b", 4)):
            out = os.path.join(tmp, f"{tag}.csv")
            code = main(["simulate", "--config", cfg, "--out", out, "--workers", str(workers)])
            if code != 0:
                return False, f"simulate exited {code}"
            outs.append(out)
        # re-run from the manifest written next to the first result
        out = os.path.join(tmp, "c.csv")
        code = main(["simulate", "--config", outs[0] + ".manifest.json", "--out", out])
        if code != 0:
            return False, f"simulate from manifest exited {code}"
        outs.append(out)
        data = [open(p, "rb").read() for p in outs]
    same = all(d == data[0] for d in data)
    return same, "serial, 4-worker and manifest re-run outputs " + ("identical" if same else "differ")


def run_suite(
    seed: int = 0,
    constants: str = "",
    only: list[str] | None = None,
    workers: int = 1,
    stream: TextIO | None = None,
) -> list[CheckResult]:
    """Run the checks (those whose id starts with one of ``only``, if given)."""
    ctx = Context(seed=seed, constants=constants, workers=workers)
    results = []
    for check_id, fn in CHECKS.items():
        # constants are always validated, since most checks depend on them
        if only and check_id != "bounds.params" and not any(check_id.startswith(p) for p in only):
            continue
        start = time.perf_counter()
        try:
            passed, detail = fn(ctx)
        except Exception as exc:  # a crashing check is a failing check
            passed, detail = False, f"{type(exc).__name__}: {exc}"
        result = CheckResult(check_id, bool(passed), time.perf_counter() - start, detail)
        results.append(result)
        if stream is not None:
            print(format_result(result), file=stream, flush=True)
    return results


def format_result(r: CheckResult) -> str:
    return f"{'PASS' if r.passed else 'FAIL'}  {r.id:<42} {r.seconds:8.2f}s  {r.detail}"
