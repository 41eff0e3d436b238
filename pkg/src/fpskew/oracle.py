"""Brute-force verifiers: design enumeration, contamination derivatives,
a bisection raking solver and integral forms of the skewness functionals.

Nothing here calls the Newton solver or the variance formulas, so these can
check them independently.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable

import numpy as np

from . import wcdf
from .designs import DrawnSample, SamplingDesign, sample_from_units
from .wcdf import WeightedCdf

MAX_SAMPLES = 10**6


class EnumerationTooLarge(ValueError):
    pass


class NoBracketError(RuntimeError):
    pass


@dataclass
class Enumeration:
    expectation: float
    variance: float
    values: list
    samples: list[np.ndarray]
    probability: Fraction

    def inclusion_frequencies(self, N: int) -> list[Fraction]:
        counts = [0] * N
        for s in self.samples:
            for u in s.tolist():
                counts[u] += 1
        return [c * self.probability for c in counts]


def count_samples(design: SamplingDesign) -> int:
    if design.kind == "srswor":
        return math.comb(design.N, design.n)
    return math.prod(math.comb(int(a), int(b)) for a, b in zip(design.N_h, design.n_h))


def iter_samples(design: SamplingDesign):
    """Every possible sample (sorted unit arrays), lexicographic per stratum."""
    h = design.stratum_index()
    if design.kind == "srswor":
        groups = [(np.arange(design.N), design.n)]
    else:
        groups = [(np.flatnonzero(h == k), int(design.n_h[k])) for k in range(design.n_h.size)]
    for parts in itertools.product(*(itertools.combinations(g.tolist(), k) for g, k in groups)):
        yield np.array(sorted(itertools.chain.from_iterable(parts)))


def enumerate_design(
    design: SamplingDesign,
    statistic: Callable[[DrawnSample], float],
    limit: int = MAX_SAMPLES,
) -> Enumeration:
    """Exact design moments of ``statistic`` over all equally likely samples.

    If the statistic returns Fractions the moments are exact rationals;
    floats are accumulated with ``math.fsum``.
    """
    total = count_samples(design)
    if total > limit:
        raise EnumerationTooLarge(f"{total} samples exceed the limit {limit}")
    samples, values = [], []
    for units in iter_samples(design):
        samples.append(units)
        values.append(statistic(sample_from_units(design, units)))
    prob = Fraction(1, total)
    if all(isinstance(v, (Fraction, int)) for v in values):
        mean = sum(values, Fraction(0)) * prob
        var = sum(((v - mean) ** 2 for v in values), Fraction(0)) * prob
    else:
        vals = [float(v) for v in values]
        mean = math.fsum(vals) / total
        var = math.fsum((v - mean) ** 2 for v in vals) / total
    return Enumeration(mean, var, values, samples, prob)


def functional_value(cdf: WeightedCdf, target: str, r: float | None = None) -> float:
    if target == "b3":
        return wcdf.b3(cdf)
    if target == "b2":
        return wcdf.b2(cdf, r)
    raise ValueError(f"unknown target {target!r}")


def contamination_derivative(
    cdf: WeightedCdf, target: str, t: float, eps: float, r: float | None = None
) -> float:
    """(T((1 - eps) F + eps delta_t) - T(F)) / eps."""
    if not 0 < eps <= 0.01:
        raise ValueError("eps must lie in (0, 0.01]")
    base = functional_value(cdf, target, r)
    return (functional_value(cdf.contaminate(t, eps), target, r) - base) / eps


def _profile_beta0(x, d, N, b1):
    # closed form of the first equation for fixed b1, computed in log space
    e = b1 * x
    m = e.max()
    return math.log(N) - (m + math.log(np.sum(d * np.exp(e - m))))


def grid_solve_raking(x, pi, N, sum_x, tol: float = 1e-8, max_bracket: float = 1e6) -> tuple[float, float]:
    """Bisection on b1 with b0 profiled out of the first raking equation.

    The second residual is increasing in b1, so a sign change brackets the
    unique root.
    """
    x = np.asarray(x, dtype=float)
    d = 1.0 / np.asarray(pi, dtype=float)

    def h(b1):
        b0 = _profile_beta0(x, d, N, b1)
        return math.fsum(d * np.exp(b0 + b1 * x) * x) - sum_x

    span = 1.0 / max(np.ptp(x), 1e-300)
    lo, hi = -span, span
    while h(lo) > 0 or h(hi) < 0:
        lo *= 2
        hi *= 2
        if hi > max_bracket * span:
            raise NoBracketError("no sign change of the calibration residual")
    scale = tol * max(N, abs(sum_x))
    for _ in range(400):
        mid = 0.5 * (lo + hi)
        hm = h(mid)
        if abs(hm) <= scale * 1e-4 or hi - lo <= 1e-15 * max(1.0, abs(mid)):
            break
        if hm < 0:
            lo = mid
        else:
            hi = mid
    b1 = 0.5 * (lo + hi)
    return _profile_beta0(x, d, N, b1), b1


def mad_by_integration(cdf: WeightedCdf) -> float:
    """int_{-inf}^{nu} F(t) dt + int_{nu}^{inf} (1 - F(t)) dt on the step function."""
    nu = wcdf.median(cdf)
    v = cdf.values
    F = cdf.cumulative
    parts = []
    # F is constant at F[k] on [v[k], v[k+1])
    for k in range(v.size - 1):
        a, b = v[k], v[k + 1]
        if b <= nu:
            parts.append(F[k] * (b - a))
        elif a >= nu:
            parts.append((1.0 - F[k]) * (b - a))
        else:
            parts.append(F[k] * (nu - a) + (1.0 - F[k]) * (b - nu))
    return math.fsum(parts)


def b3_quantile_integral(cdf: WeightedCdf, grid: int = 200_000) -> float:
    """Ratio of the quantile integrals defining b3, midpoint rule on r in (0, 1/2).

    Over the full unit interval the spread integral vanishes identically, so
    both integrals run over the lower half.
    """
    r = (np.arange(grid) + 0.5) / (2 * grid)

    def q(levels):
        k = np.searchsorted(cdf.cumulative, levels, side="left")
        return cdf.values[np.minimum(k, cdf.values.size - 1)]

    lower, upper = q(r), q(1.0 - r)
    med = wcdf.median(cdf)
    return math.fsum(upper + lower - 2 * med) / math.fsum(upper - lower)


def syg_expectation_check(design: SamplingDesign, y, syg: Callable[[DrawnSample, np.ndarray], float]):
    """Design variance of the Hajek mean and the design mean of ``syg``.

    Uses exact rational arithmetic for the true variance.
    """
    yq = [Fraction(v) for v in np.asarray(y, dtype=float).tolist()]

    def hajek_mean(s: DrawnSample):
        d = [Fraction(1) / Fraction(p) for p in s.pi1.tolist()]
        return sum((di * yq[u] for di, u in zip(d, s.units.tolist())), Fraction(0)) / sum(d, Fraction(0))

    truth = enumerate_design(design, hajek_mean)
    est = enumerate_design(design, lambda s: syg(s, np.asarray(y, dtype=float)[s.units]))
    return truth, est
