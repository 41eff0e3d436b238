"""Synthetic finite populations, x-based stratification and population targets."""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import numpy.typing as npt

from . import wcdf

DEFAULT_GENERATOR = "PCG64"


class EmptyPopulationError(ValueError):
    pass


class DegeneratePopulationError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class FinitePopulation:
    """Labels 1..N with auxiliary x > 0, study y and stratum labels.

    ``strata`` holds 0 for every unit when the population is unstratified,
    otherwise contiguous labels 1..H.
    """

    ids: np.ndarray
    x: np.ndarray
    y: np.ndarray
    strata: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        n = self.ids.size
        if n == 0:
            raise EmptyPopulationError("population must contain at least one unit")
        if not (self.x.size == self.y.size == self.strata.size == n):
            raise ValueError("ids, x, y and strata must have equal length")
        if np.any(self.x <= 0):
            raise ValueError("auxiliary values must be strictly positive")
        labels = np.unique(self.strata)
        if not (labels.tolist() == [0] or labels.tolist() == list(range(1, labels.size + 1))):
            raise ValueError("strata must be all 0 or contiguous labels 1..H")

    @property
    def N(self) -> int:
        return int(self.ids.size)

    @property
    def H(self) -> int:
        """Number of strata (0 when unstratified)."""
        return int(self.strata.max())

    @property
    def sum_x(self) -> float:
        return float(np.sum(self.x))

    def cdf(self) -> wcdf.WeightedCdf:
        """Equal-weight population cdf of y."""
        return wcdf.WeightedCdf(self.y)

    def __eq__(self, other):
        if not isinstance(other, FinitePopulation):
            return NotImplemented
        return all(
            np.array_equal(getattr(self, a), getattr(other, a)) for a in ("ids", "x", "y", "strata")
        )


@dataclass(frozen=True)
class PopulationParams:
    mu: float
    nu: float
    delta: float
    b2: float
    b3: float
    r: float


def generate_population(
    seed: int, N: int, gamma: float, generator: str = DEFAULT_GENERATOR
) -> FinitePopulation:
    """Lognormal x with E ln X = 0, var ln X = 1; y = x + x**gamma * eps."""
    if N < 1:
        raise EmptyPopulationError("N must be at least 1")
    bitgen = getattr(np.random, generator)(seed)
    rng = np.random.Generator(bitgen)
    x = np.exp(rng.standard_normal(N))
    eps = rng.standard_normal(N)
    y = x + x**gamma * eps
    return FinitePopulation(
        ids=np.arange(1, N + 1),
        x=x,
        y=y,
        strata=np.zeros(N, dtype=int),
        meta={"seed": seed, "gamma": gamma, "generator": generator},
    )


def equal_total_cuts(x_sorted: npt.ArrayLike, H: int) -> list[int]:
    """Cut positions splitting ``x_sorted`` into H runs with near-equal sums.

    Greedy prefix cut: the h-th boundary is placed where the running sum is
    closest to h * total / H, keeping at least one unit per stratum.
    """
    xs = np.asarray(x_sorted, dtype=float)
    n = xs.size
    cum = np.cumsum(xs)
    total = cum[-1]
    cuts = []
    prev = 0
    for h in range(1, H):
        target = h * total / H
        lo = prev + 1
        hi = n - (H - h)
        cand = np.arange(lo, hi + 1)
        # cut after position c-1, so stratum h ends with cum[c-1]
        dev = np.abs(cum[cand - 1] - target)
        c = int(cand[np.argmin(dev)])
        cuts.append(c)
        prev = c
    return cuts


def stratify_by_x(pop: FinitePopulation, H: int) -> FinitePopulation:
    """Assign strata 1..H as x-intervals with approximately equal x totals."""
    if H < 1:
        raise ValueError("H must be at least 1")
    if H > pop.N:
        raise ValueError(f"cannot form {H} strata from {pop.N} units")
    if H > np.unique(pop.x).size:
        raise ValueError("H exceeds the number of distinct x values")
    order = np.argsort(pop.x, kind="stable")
    bounds = [0, *equal_total_cuts(pop.x[order], H), pop.N]
    strata = np.empty(pop.N, dtype=int)
    for h in range(H):
        strata[order[bounds[h] : bounds[h + 1]]] = h + 1
    return FinitePopulation(pop.ids, pop.x, pop.y, strata, dict(pop.meta, H=H))


def true_parameters(pop: FinitePopulation, r: float = 0.25) -> PopulationParams:
    cdf = pop.cdf()
    delta = wcdf.mad_about_median(cdf)
    if delta == 0:
        raise DegeneratePopulationError("all study values are equal")
    return PopulationParams(
        mu=wcdf.mean(cdf),
        nu=wcdf.median(cdf),
        delta=delta,
        b2=wcdf.b2(cdf, r),
        b3=wcdf.b3(cdf),
        r=r,
    )


def _fmt(v: float) -> str:
    return format(float(v), ".17g")


def write_csv(pop: FinitePopulation, path: str | Path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["id", "x", "y", "stratum"])
        for i, x, y, s in zip(pop.ids.tolist(), pop.x, pop.y, pop.strata.tolist()):
            w.writerow([i, _fmt(x), _fmt(y), s])


def read_csv(path: str | Path) -> FinitePopulation:
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != ["id", "x", "y", "stratum"]:
            raise ValueError(f"expected header id,x,y,stratum, got {reader.fieldnames}")
        rows = list(reader)
    if not rows:
        raise EmptyPopulationError(f"{path} has no rows")
    return FinitePopulation(
        ids=np.array([int(r["id"]) for r in rows]),
        x=np.array([float(r["x"]) for r in rows]),
        y=np.array([float(r["y"]) for r in rows]),
        strata=np.array([int(r["stratum"]) for r in rows]),
        meta={"source": str(path)},
    )
