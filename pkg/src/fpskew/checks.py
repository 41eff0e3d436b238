"""Oracle comparisons shared by the ``verify`` command and the test-suite."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy import stats

from . import oracle, wcdf
from .calibration import solve_raking
from .designs import draw, srswor, stratified_srswor
from .estimators import BASES, EstimatorKind, PopulationAux
from .population import FinitePopulation, true_parameters
from .variance import GFunctionParams, g2_values, g3_values, infer, syg_quadratic, variance_hajek


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str


def syg_micro(y=(1.0, 2.0, 4.0, 7.0, 11.0, 20.0), n: int = 2) -> tuple[float, float]:
    """(design variance of the Hajek mean, design mean of its SYG estimate)."""
    y = np.asarray(y, dtype=float)
    design = srswor(y.size, n)
    truth, est = oracle.syg_expectation_check(
        design, y, lambda s, ys: variance_hajek(s, ys, y.size).v2_syg
    )
    return float(truth.variance), float(est.expectation)


def syg_micro_stratified() -> tuple[float, float]:
    y = np.array([1.0, 3.0, 4.0, 10.0, 12.0, 19.0, 30.0])
    design = stratified_srswor(np.array([1, 1, 1, 2, 2, 2, 2]), 4, n_h=[2, 2])
    pop_N = y.size
    yq = [Fraction(v) for v in y.tolist()]
    # pi_i per stratum as exact rationals
    pis = [Fraction(2, 3)] * 3 + [Fraction(1, 2)] * 4

    def ht_mean(s):
        return sum((yq[u] / pis[u] for u in s.units.tolist()), Fraction(0)) / pop_N

    truth = oracle.enumerate_design(design, ht_mean)

    def syg(s):
        return syg_quadratic(s, y[s.units] / s.pi1) / pop_N**2

    est = oracle.enumerate_design(design, syg)
    return float(truth.variance), float(est.expectation)


def raking_agreement(n_instances: int = 50, seed: int = 0) -> float:
    """Max |beta_newton - beta_bisection| over random 3-unit instances."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(n_instances):
        x = np.sort(rng.uniform(0.5, 5.0, 3))
        pi = rng.uniform(0.2, 0.9, 3)
        d = 1.0 / pi
        N = float(np.sum(d)) * rng.uniform(0.8, 1.25)
        # target mean strictly inside the sample x-range keeps the system solvable
        xbar = x[0] + (x[-1] - x[0]) * rng.uniform(0.2, 0.8)
        fit = solve_raking(x, pi, N, N * xbar)
        ref = oracle.grid_solve_raking(x, pi, N, N * xbar)
        worst = max(worst, abs(fit.beta[0] - ref[0]), abs(fit.beta[1] - ref[1]))
    return worst


@dataclass
class InfluenceComparison:
    levels: np.ndarray
    probes: np.ndarray
    finite_difference: np.ndarray
    analytic: np.ndarray

    @property
    def rel_errors(self) -> np.ndarray:
        return np.abs(self.finite_difference - self.analytic) / np.abs(self.analytic)


def reference_grid(K: int, dist=None):
    dist = dist if dist is not None else stats.lognorm(0.5)
    return dist, wcdf.WeightedCdf(dist.ppf((np.arange(K) + 0.5) / K))


def influence_comparison(
    target: str, K: int, eps: float, n_probes: int = 20, r: float = 0.25, dist=None, min_share: float = 0.25
) -> InfluenceComparison:
    """Finite-difference von Mises derivatives against g-function integrals.

    The reference cdf is an equal-weight K-point quantile grid of ``dist``
    (lognormal by default) and the g-functions get the analytic densities.
    Probe points are quantiles of ``dist`` on an even grid of levels; levels
    where |IF| is below ``min_share`` of its largest probed value are replaced
    by the next admissible level, since relative error is meaningless at a
    sign change.
    """
    dist, F = reference_grid(K, dist)
    grid = F.values
    nu = wcdf.median(F)
    if target == "b3":
        params = GFunctionParams(
            "b3", nu=nu, delta=wcdf.mad_about_median(F), b_value=wcdf.b3(F), f_nu=float(dist.pdf(nu))
        )
        g = lambda t: g3_values(params, t)  # noqa: E731
    else:
        q_r, q_1mr = wcdf.quantile(F, r), wcdf.quantile(F, 1 - r)
        params = GFunctionParams(
            "b2",
            nu=nu,
            b_value=wcdf.b2(F, r),
            f_nu=float(dist.pdf(nu)),
            r=r,
            nu_r=q_r,
            nu_1mr=q_1mr,
            f_nu_r=float(dist.pdf(q_r)),
            f_nu_1mr=float(dist.pdf(q_1mr)),
        )
        g = lambda t: g2_values(params, t)  # noqa: E731
    g_mean = float(np.mean(g(grid)))

    dense = np.linspace(0.02, 0.98, 20 * n_probes)
    influence = g(dist.ppf(dense)) - g_mean
    keep = np.abs(influence) >= min_share * np.max(np.abs(influence))
    candidates = dense[keep]
    idx = np.linspace(0, candidates.size - 1, n_probes).round().astype(int)
    levels = candidates[idx]
    probes = dist.ppf(levels)
    fd = np.array([oracle.contamination_derivative(F, target, float(t), eps, r) for t in probes])
    return InfluenceComparison(levels, probes, fd, g(probes) - g_mean)


def census_values(y=(1.0, 2.0, 3.0, 4.0), r: float = 0.25) -> dict:
    """Every basis/target on the census sample: (estimate, v2_syg, v2_ht, truth)."""
    y = np.asarray(y, dtype=float)
    x = np.arange(1.0, y.size + 1)
    pop = FinitePopulation(np.arange(1, y.size + 1), x, y, np.zeros(y.size, dtype=int))
    params = true_parameters(pop, r)
    design = srswor(y.size, y.size)
    sample = draw(design, 0)
    aux = PopulationAux(pop.N, pop.sum_x)
    truth = {"b2": params.b2, "b3": params.b3, "mean": params.mu}
    out = {}
    for basis in BASES:
        for target in ("b2", "b3", "mean"):
            kind = EstimatorKind(basis, target, r if target == "b2" else None)
            rec = infer(kind, sample, y[sample.units], x[sample.units], aux)
            out[kind.label] = (rec.estimate, rec.v2_syg, rec.v2_ht, truth[target])
    return out


def run_checks(quick: bool = True) -> list[CheckResult]:
    results = []

    def add(name, passed, detail):
        results.append(CheckResult(name, bool(passed), detail))

    e = oracle.enumerate_design(srswor(3, 2), lambda s: float(np.mean(np.array([1.0, 2.0, 3.0])[s.units])))
    add("enumeration N=3 n=2 Hajek mean variance 1/6", abs(e.variance - 1 / 6) < 1e-15, f"{e.variance!r}")

    tv, ev = syg_micro()
    rel = abs(ev - tv) / tv
    add("SYG unbiased for Hajek mean, SRSWOR N=6 n=2", rel <= 1e-12, f"rel err {rel:.2e}")

    tv, ev = syg_micro_stratified()
    rel = abs(ev - tv) / tv
    add("SYG unbiased for HT mean, stratified micro design", rel <= 1e-12, f"rel err {rel:.2e}")

    worst = raking_agreement(20 if quick else 200)
    add("Newton raking vs bisection oracle (3 units)", worst <= 1e-6, f"max |dbeta| {worst:.2e}")

    rng = np.random.default_rng(1)
    worst_mad, worst_b3 = 0.0, 0.0
    for _ in range(20):
        k = int(rng.integers(2, 12))
        F = wcdf.WeightedCdf(rng.normal(size=k).round(2), rng.uniform(0.1, 2.0, k))
        worst_mad = max(worst_mad, abs(oracle.mad_by_integration(F) - wcdf.mad_about_median(F)))
        if wcdf.mad_about_median(F) > 0:
            worst_b3 = max(worst_b3, abs(oracle.b3_quantile_integral(F, 20_000) - wcdf.b3(F)))
    add("mad integral identity on step cdfs", worst_mad < 1e-12, f"max diff {worst_mad:.1e}")
    add("b3 quantile-integral form", worst_b3 < 1e-3, f"max diff {worst_b3:.1e}")

    K, eps = (10**6, 1e-3) if quick else (4 * 10**6, 1e-4)
    for target in ("b3", "b2"):
        cmp = influence_comparison(target, K, eps)
        m = float(cmp.rel_errors.max())
        add(f"contamination derivative vs g-integral ({target}, K={K}, eps={eps:g})", m <= 0.02, f"max rel err {m:.3%}")

    cen = census_values()
    bad = [k for k, (est, vs, vh, tr) in cen.items() if est != tr or vs != 0 or vh != 0]
    add("census consistency (all bases and targets)", not bad, "ok" if not bad else ", ".join(bad))
    return results


def format_table(results: list[CheckResult]) -> str:
    width = max(len(r.name) for r in results)
    lines = [f"{'check':<{width}}  result  detail"]
    for r in results:
        lines.append(f"{r.name:<{width}}  {'PASS' if r.passed else 'FAIL':<6}  {r.detail}")
    return "\n".join(lines)


def all_passed(results) -> bool:
    return all(r.passed for r in results)

