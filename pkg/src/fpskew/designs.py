"""Fixed-size designs (SRSWOR, stratified SRSWOR) with exact inclusion probabilities."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal

import numpy as np
import numpy.typing as npt


class AllocationError(ValueError):
    pass


def as_rng(seed) -> np.random.Generator:
    """Generator from an int, a SeedSequence or an existing Generator."""
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.Generator(np.random.PCG64(seed))


@dataclass(frozen=True, eq=False)
class SamplingDesign:
    """Fixed-size design over units 0..N-1.

    For ``stratified_srswor`` the per-unit ``strata`` labels run 1..H and
    ``N_h``/``n_h`` give population and sample sizes per stratum (index h-1).
    """

    kind: Literal["srswor", "stratified_srswor"]
    N: int
    n: int
    strata: np.ndarray | None = None
    N_h: np.ndarray | None = None
    n_h: np.ndarray | None = None

    def __post_init__(self):
        if not 1 <= self.n <= self.N:
            raise ValueError(f"need 1 <= n <= N, got n={self.n}, N={self.N}")
        if self.kind == "stratified_srswor":
            if self.strata is None or self.N_h is None or self.n_h is None:
                raise ValueError("stratified design needs strata, N_h and n_h")
            if int(self.n_h.sum()) != self.n or np.any(self.n_h < 1) or np.any(self.n_h > self.N_h):
                raise AllocationError(f"invalid allocation n_h={self.n_h.tolist()} for N_h={self.N_h.tolist()}")
        elif self.kind != "srswor":
            raise ValueError(f"unknown design kind {self.kind!r}")

    @property
    def is_census(self) -> bool:
        return self.n == self.N

    def stratum_index(self) -> np.ndarray:
        """Zero-based stratum index per unit (all zeros for SRSWOR)."""
        if self.kind == "srswor":
            return np.zeros(self.N, dtype=int)
        return self.strata - 1

    def _sizes(self) -> tuple[np.ndarray, np.ndarray]:
        if self.kind == "srswor":
            return np.array([self.N]), np.array([self.n])
        return self.N_h, self.n_h

    def pi1(self, units: npt.ArrayLike | None = None) -> np.ndarray:
        """First-order inclusion probabilities for ``units`` (default: all)."""
        Nh, nh = self._sizes()
        h = self.stratum_index()
        if units is not None:
            h = h[np.asarray(units)]
        return nh[h] / Nh[h]

    def pi2(self, i: int, j: int) -> float:
        """Joint inclusion probability; i == j returns pi_i."""
        if i == j:
            return float(self.pi1([i])[0])
        return float(self.joint([i, j])[0, 1])

    def joint(self, units: npt.ArrayLike) -> np.ndarray:
        """Matrix of pi_ij over ``units`` with pi_i on the diagonal."""
        units = np.asarray(units)
        Nh, nh = self._sizes()
        h = self.stratum_index()[units]
        p = nh[h] / Nh[h]
        with np.errstate(invalid="ignore", divide="ignore"):
            same = np.where(Nh > 1, nh * (nh - 1) / (Nh * (Nh - 1.0)), 0.0)
        out = np.where(h[:, None] == h[None, :], same[h][:, None], np.outer(p, p))
        np.fill_diagonal(out, p)
        return out


def srswor(N: int, n: int) -> SamplingDesign:
    return SamplingDesign("srswor", N, n)


def proportional_allocation(N_h: npt.ArrayLike, n: int) -> np.ndarray:
    """Largest-remainder proportional allocation with n_h >= 1."""
    N_h = np.asarray(N_h, dtype=int)
    if n < N_h.size:
        raise AllocationError(f"n={n} is smaller than the number of strata {N_h.size}")
    quota = n * N_h / N_h.sum()
    alloc = np.floor(quota).astype(int)
    short = n - int(alloc.sum())
    # ties broken by stratum order
    order = np.argsort(-(quota - alloc), kind="stable")
    alloc[order[:short]] += 1
    while np.any(alloc < 1):
        k = int(np.argmin(alloc))
        donor = int(np.argmax(alloc))
        if alloc[donor] <= 1:
            raise AllocationError("cannot give every stratum a unit")
        alloc[donor] -= 1
        alloc[k] += 1
    if np.any(alloc > N_h):
        raise AllocationError(f"allocation {alloc.tolist()} exceeds stratum sizes {N_h.tolist()}")
    return alloc


def stratified_srswor(strata: npt.ArrayLike, n: int, n_h: npt.ArrayLike | None = None) -> SamplingDesign:
    """Stratified SRSWOR; proportional allocation unless ``n_h`` is given."""
    strata = np.asarray(strata, dtype=int)
    H = int(strata.max())
    if H < 1 or strata.min() < 1:
        raise ValueError("stratum labels must run 1..H")
    N_h = np.bincount(strata, minlength=H + 1)[1:]
    alloc = proportional_allocation(N_h, n) if n_h is None else np.asarray(n_h, dtype=int)
    return SamplingDesign("stratified_srswor", int(strata.size), int(n), strata, N_h, alloc)


@dataclass(frozen=True, eq=False)
class DrawnSample:
    units: np.ndarray
    pi1: np.ndarray
    design: SamplingDesign

    @property
    def n(self) -> int:
        return int(self.units.size)

    def joint(self) -> np.ndarray:
        return self.design.joint(self.units)


def _partial_fisher_yates(rng: np.random.Generator, pool: np.ndarray, k: int) -> np.ndarray:
    a = pool.copy()
    m = a.size
    for i in range(k):
        j = i + int(rng.integers(m - i))
        a[i], a[j] = a[j], a[i]
    return a[:k]


def draw(design: SamplingDesign, seed) -> DrawnSample:
    """Draw one sample; units are returned in increasing order."""
    rng = as_rng(seed)
    if design.kind == "srswor":
        units = _partial_fisher_yates(rng, np.arange(design.N), design.n)
    else:
        h = design.stratum_index()
        parts = [
            _partial_fisher_yates(rng, np.flatnonzero(h == k), int(design.n_h[k]))
            for k in range(design.n_h.size)
        ]
        units = np.concatenate(parts)
    units = np.sort(units)
    return DrawnSample(units, design.pi1(units), design)


def sample_from_units(design: SamplingDesign, units: npt.ArrayLike) -> DrawnSample:
    """Wrap an explicit unit set (e.g. from enumeration) as a sample."""
    units = np.sort(np.asarray(units, dtype=int))
    return DrawnSample(units, design.pi1(units), design)
