"""cdf estimators from a drawn sample and the plug-in point estimators."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal

import numpy as np

from . import wcdf
from .calibration import CalibrationWeights, calibration_cdf, solve_raking
from .designs import DrawnSample
from .wcdf import WeightedCdf

Basis = Literal["hajek", "ht", "calibration"]
Target = Literal["b2", "b3", "mean"]

BASES = ("hajek", "ht", "calibration")
TARGETS = ("b2", "b3", "mean")


@dataclass(frozen=True)
class EstimatorKind:
    basis: Basis
    target: Target
    r: float | None = None

    def __post_init__(self):
        if self.basis not in BASES:
            raise ValueError(f"unknown basis {self.basis!r}")
        if self.target not in TARGETS:
            raise ValueError(f"unknown target {self.target!r}")
        if self.target == "b2" and self.r is None:
            raise ValueError("b2 needs a level r")

    @property
    def label(self) -> str:
        short = {"hajek": "Ha", "ht": "HT", "calibration": "cal"}[self.basis]
        if self.target == "mean":
            return f"mean_{short}"
        if self.target == "b2":
            return f"b2_{short}({self.r:g})"
        return f"b3_{short}"

    @classmethod
    def parse(cls, label: str) -> EstimatorKind:
        """Inverse of :attr:`label`, e.g. ``"b2_cal(0.75)"`` or ``"mean_Ha"``."""
        bases = {"Ha": "hajek", "HT": "ht", "cal": "calibration"}
        head, _, rest = label.partition("_")
        if head == "b2":
            short, _, r = rest.partition("(")
            return cls(bases[short], "b2", float(r.rstrip(")")))
        return cls(bases[rest], head)


@dataclass(frozen=True)
class PopulationAux:
    """Population-level auxiliary information available to the sampler."""

    N: int
    sum_x: float


def hajek_cdf(sample: DrawnSample, y_s) -> WeightedCdf:
    """Masses (1/pi_i) / N_hat; total mass is one up to rounding."""
    d = 1.0 / sample.pi1
    return WeightedCdf(y_s, d / np.sum(d))


def ht_cdf(sample: DrawnSample, y_s, N: float) -> WeightedCdf:
    """Masses (1/pi_i) / N. ``total_mass`` keeps the raw (unnormalized) total."""
    return WeightedCdf(y_s, 1.0 / (sample.pi1 * N))


def raking_weights(sample: DrawnSample, x_s, aux: PopulationAux, **solver_kw) -> CalibrationWeights:
    return solve_raking(x_s, sample.pi1, aux.N, aux.sum_x, **solver_kw)


def build_cdf(
    basis: Basis,
    sample: DrawnSample,
    y_s,
    x_s=None,
    aux: PopulationAux | None = None,
    weights: CalibrationWeights | None = None,
) -> WeightedCdf:
    if basis == "hajek":
        return hajek_cdf(sample, y_s)
    if basis == "ht":
        if aux is None:
            raise ValueError("ht basis needs N")
        return ht_cdf(sample, y_s, aux.N)
    if weights is None:
        if aux is None or x_s is None:
            raise ValueError("calibration basis needs x and population totals")
        weights = raking_weights(sample, x_s, aux)
    return calibration_cdf(y_s, weights, aux.N if aux is not None else np.sum(weights.w))


def functional(kind: EstimatorKind, cdf: WeightedCdf) -> float:
    if kind.target == "b2":
        return wcdf.b2(cdf, kind.r)
    if kind.target == "b3":
        return wcdf.b3(cdf)
    return wcdf.mean(cdf)


def estimate(
    kind: EstimatorKind,
    sample: DrawnSample,
    y_s,
    x_s=None,
    aux: PopulationAux | None = None,
    weights: CalibrationWeights | None = None,
) -> float:
    """Plug-in estimate of ``kind.target`` from the ``kind.basis`` cdf.

    For the mean this gives sum(y/pi)/N_hat under Hajek and HT (after
    normalization) and (1/N) sum(w y) under calibration, to rounding.
    """
    if kind.target == "mean" and kind.basis == "calibration":
        if weights is None:
            weights = raking_weights(sample, x_s, aux)
        return float(np.dot(weights.w, y_s) / aux.N)
    return functional(kind, build_cdf(kind.basis, sample, y_s, x_s, aux, weights))
