"""Weighted step-function cdf and the quantile-based skewness functionals.

Every population truth and every plug-in estimate in the package goes through
:class:`WeightedCdf`, so Hajek, Horvitz-Thompson and calibration estimates
share one implementation of quantiles, means and skewness indices.
"""

from __future__ import annotations

import math

import numpy as np
import numpy.typing as npt

# Slack for the F(x) >= r comparison; absorbs rounding in normalized cumulative
# sums (e.g. 3 * (1/6) vs 0.5) without moving any genuine jump.
_JUMP_TOL = 8 * np.finfo(float).eps


class DegenerateError(ValueError):
    """A functional is undefined for the given cdf (zero spread, zero mad, ...)."""


class EmptyCdfError(ValueError):
    """The cdf carries no positive mass."""


def compensated_cumsum(values: npt.ArrayLike) -> np.ndarray:
    """Running sums with Neumaier compensation."""
    vals = np.asarray(values, dtype=float)
    out = np.empty_like(vals)
    total = 0.0
    comp = 0.0
    for k, v in enumerate(vals.tolist()):
        t = total + v
        if abs(total) >= abs(v):
            comp += (total - t) + v
        else:
            comp += (v - t) + total
        total = t
        out[k] = total + comp
    return out


class WeightedCdf:
    """Normalized step function F(t) = sum(mass[value <= t]) / total_mass.

    Values are sorted and ties merged at construction. Masses need not sum
    to one; ``total_mass`` keeps the raw total (useful as a Horvitz-Thompson
    diagnostic) and all functionals use the normalized masses.
    """

    __slots__ = ("values", "masses", "total_mass", "_cum")

    def __init__(self, values: npt.ArrayLike, masses: npt.ArrayLike | None = None):
        v = np.asarray(values, dtype=float).ravel()
        if masses is None:
            m = np.ones_like(v)
        else:
            m = np.asarray(masses, dtype=float).ravel()
        if v.shape != m.shape:
            raise ValueError("values and masses must have the same length")
        if np.any(m < 0) or not np.all(np.isfinite(m)) or not np.all(np.isfinite(v)):
            raise ValueError("masses must be finite and nonnegative, values finite")
        keep = m > 0
        v, m = v[keep], m[keep]
        if v.size == 0:
            raise EmptyCdfError("cdf has no positive mass")

        order = np.argsort(v, kind="stable")
        v, m = v[order], m[order]
        uniq, start = np.unique(v, return_index=True)
        if uniq.size != v.size:
            # merge ties with compensated group sums
            bounds = np.append(start, v.size)
            m = np.array([math.fsum(m[a:b]) for a, b in zip(bounds[:-1], bounds[1:])])
            v = uniq

        if np.all(m == m[0]):
            # equal masses: k/K is exact up to one rounding
            total = m[0] * m.size
            cum = np.arange(1, m.size + 1) / m.size
        else:
            total = math.fsum(m)
            cum = compensated_cumsum(m) / total
        cum[-1] = 1.0
        self.values = v
        self.masses = m
        self.total_mass = total
        self._cum = cum

    @classmethod
    def _from_parts(cls, values, masses, total, cum) -> WeightedCdf:
        obj = cls.__new__(cls)
        obj.values = values
        obj.masses = masses
        obj.total_mass = total
        obj._cum = cum
        return obj

    def __len__(self) -> int:
        return self.values.size

    def __repr__(self) -> str:
        return f"WeightedCdf(points={self.values.size}, total_mass={self.total_mass:.6g})"

    @property
    def probs(self) -> np.ndarray:
        """Normalized point masses."""
        return self.masses / self.total_mass

    @property
    def cumulative(self) -> np.ndarray:
        """Normalized cumulative masses at the stored values."""
        return self._cum

    def effective_size(self) -> float:
        """Kish effective number of points, (sum m)^2 / sum m^2."""
        p = self.probs
        return 1.0 / float(np.dot(p, p))

    def __call__(self, t: npt.ArrayLike) -> np.ndarray | float:
        """Evaluate F at ``t`` (right-continuous)."""
        t_arr = np.asarray(t, dtype=float)
        idx = np.searchsorted(self.values, t_arr, side="right")
        out = np.where(idx > 0, self._cum[np.maximum(idx - 1, 0)], 0.0)
        return float(out) if out.ndim == 0 else out

    def rescaled(self, c: float) -> WeightedCdf:
        """Same distribution with every mass multiplied by ``c > 0``."""
        if c <= 0:
            raise ValueError("scale must be positive")
        return WeightedCdf._from_parts(self.values, self.masses * c, self.total_mass * c, self._cum)

    def contaminate(self, t: float, eps: float) -> WeightedCdf:
        """Return (1 - eps) F + eps * (point mass at t), with total mass one."""
        if not 0 <= eps < 1:
            raise ValueError("eps must lie in [0, 1)")
        p = self.probs * (1.0 - eps)
        k = int(np.searchsorted(self.values, t, side="left"))
        hit = k < self.values.size and self.values[k] == t
        cum = self._cum * (1.0 - eps)
        cum[k:] += eps
        if hit:
            p[k] += eps
            values = self.values
        else:
            values = np.insert(self.values, k, t)
            p = np.insert(p, k, eps)
            cum = np.insert(cum, k, (cum[k - 1] if k > 0 else 0.0) + eps)
        cum[-1] = 1.0
        return WeightedCdf._from_parts(values, p, 1.0, cum)


def quantile(cdf: WeightedCdf, r: float) -> float:
    """Generalized inverse inf{x : F(x) >= r} for 0 < r <= 1."""
    if not 0 < r <= 1:
        raise ValueError(f"quantile level must lie in (0, 1], got {r}")
    k = int(np.searchsorted(cdf._cum, r - _JUMP_TOL, side="left"))
    return float(cdf.values[min(k, cdf.values.size - 1)])


def median(cdf: WeightedCdf) -> float:
    return quantile(cdf, 0.5)


def mean(cdf: WeightedCdf) -> float:
    return float(np.sum(cdf.probs * cdf.values))


def mad_about_median(cdf: WeightedCdf) -> float:
    """Mean absolute deviation about the (inf-)median."""
    nu = median(cdf)
    return float(np.sum(cdf.probs * np.abs(cdf.values - nu)))


def _check_b2_level(r: float) -> None:
    if not 0 < r < 1:
        raise ValueError(f"r must lie in (0, 1), got {r}")
    if r == 0.5:
        raise ValueError("b2 is undefined at r = 0.5")


def b2(cdf: WeightedCdf, r: float) -> float:
    """Hinkley's generalization of Bowley's quartile skewness at level r."""
    _check_b2_level(r)
    upper = quantile(cdf, 1.0 - r)
    lower = quantile(cdf, r)
    mid = quantile(cdf, 0.5)
    spread = upper - lower
    if spread == 0:
        raise DegenerateError(f"zero quantile spread at r={r}")
    return (upper + lower - 2.0 * mid) / spread


def b3(cdf: WeightedCdf) -> float:
    """Groeneveld-Meeden index (mean - median) / E|X - median|."""
    nu = median(cdf)
    p = cdf.probs
    delta = float(np.sum(p * np.abs(cdf.values - nu)))
    if delta == 0:
        raise DegenerateError("mean absolute deviation about the median is zero")
    return (float(np.sum(p * cdf.values)) - nu) / delta
