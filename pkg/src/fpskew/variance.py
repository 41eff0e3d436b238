"""Linearization variance estimation for the plug-in skewness estimators.

The pieces are: the linearizing g-functions of b3 and b2(r), Woodruff-type
density estimates at sample quantiles, Horvitz-Thompson and Sen-Yates-Grundy
variance estimators for the Hajek and calibration cdf bases, and normal
confidence intervals. All variances are returned on the estimator scale,
i.e. including the 1/N^2 factor.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import norm

from . import wcdf
from .calibration import CalibrationWeights
from .designs import DrawnSample
from .estimators import EstimatorKind, PopulationAux, build_cdf, estimate, raking_weights
from .wcdf import DegenerateError, WeightedCdf

log = logging.getLogger(__name__)

Z_025 = float(norm.ppf(0.975))


class DensityDegeneracyError(DegenerateError):
    """Woodruff interval of zero length (flat spot or zero sigma)."""


@dataclass(frozen=True)
class GFunctionParams:
    target: str
    nu: float
    delta: float = math.nan
    b_value: float = 0.0
    f_nu: float = math.nan
    F_nu: float = 0.5
    r: float | None = None
    nu_r: float = math.nan
    nu_1mr: float = math.nan
    f_nu_r: float = math.nan
    f_nu_1mr: float = math.nan


@dataclass(frozen=True)
class VarianceEstimate:
    v2_ht: float
    v2_syg: float
    method: str = "syg"

    @property
    def v2(self) -> float:
        return self.v2_syg if self.method == "syg" else self.v2_ht

    @property
    def sigma_scale(self) -> float:
        return math.sqrt(max(self.v2, 0.0))


def g3_values(params: GFunctionParams, y) -> np.ndarray:
    """g(t) = (1/delta) {t(1 - b3) + I(t <= nu)(1/f(nu) - 2 nu b3 + 2 t b3)}."""
    if not params.f_nu > 0:
        raise ValueError("density at the median must be positive")
    if not params.delta > 0:
        raise ValueError("delta must be positive")
    t = np.asarray(y, dtype=float)
    b = params.b_value
    below = t <= params.nu
    return (t * (1.0 - b) + below * (1.0 / params.f_nu - 2.0 * params.nu * b + 2.0 * t * b)) / params.delta


def g2_values(params: GFunctionParams, y) -> np.ndarray:
    """Piecewise-constant linearization of b2 at the quantiles nu_r < nu < nu_{1-r}."""
    spread = params.nu_1mr - params.nu_r
    if spread == 0:
        raise DegenerateError("zero quantile spread")
    if not (params.f_nu_r > 0 and params.f_nu_1mr > 0 and params.f_nu > 0):
        raise ValueError("densities must be positive")
    t = np.asarray(y, dtype=float)
    b = params.b_value
    return (
        (t <= params.nu_1mr) * (b - 1.0) / params.f_nu_1mr
        - (t <= params.nu_r) * (1.0 + b) / params.f_nu_r
        + 2.0 * (t <= params.nu) / params.f_nu
    ) / spread


def _pair_terms(sample: DrawnSample) -> tuple[np.ndarray, np.ndarray]:
    pij = sample.joint()
    p = sample.pi1
    return pij, pij - np.outer(p, p)


def syg_quadratic(sample: DrawnSample, u) -> float:
    """-(1/2) sum_ij ((pi_ij - pi_i pi_j)/pi_ij) (u_i - u_j)^2 over the sample."""
    u = np.asarray(u, dtype=float)
    pij, delta = _pair_terms(sample)
    diff = u[:, None] - u[None, :]
    return -0.5 * math.fsum((delta / pij * diff * diff).ravel())


def ht_quadratic(sample: DrawnSample, u) -> float:
    """sum_ij ((pi_ij - pi_i pi_j)/pi_ij) u_i u_j over the sample."""
    u = np.asarray(u, dtype=float)
    pij, delta = _pair_terms(sample)
    return math.fsum((delta / pij * np.outer(u, u)).ravel())


def woodruff_sigma(
    sample: DrawnSample,
    y_s,
    basis: str,
    nu_hat: float,
    N: float,
    weights: CalibrationWeights | None = None,
) -> float:
    """SYG standard deviation of the basis cdf estimator at ``nu_hat``."""
    y_s = np.asarray(y_s, dtype=float)
    ind = (y_s <= nu_hat).astype(float)
    if basis == "calibration":
        if weights is None:
            raise ValueError("calibration sigma needs the raking weights")
        v = syg_quadratic(sample, weights.w * ind / N)
    else:
        d = 1.0 / sample.pi1
        N_hat = math.fsum(d)
        a = ind - math.fsum(d * ind) / N_hat
        v = syg_quadratic(sample, a * d) / N_hat**2
    if v < 0:
        if v < -1e-12:
            log.warning("negative cdf variance estimate %.3g clamped to 0", v)
        v = 0.0
    return math.sqrt(v)


def woodruff_density(cdf_hat: WeightedCdf, r: float, sigma_hat: float, z: float = Z_025) -> float:
    """Density at the r-quantile from the Woodruff interval length.

    Probe levels r -/+ z*sigma are clamped to [eps, 1 - eps] with
    eps = 1 / (2 * effective size of ``cdf_hat``).
    """
    if not 0 < r < 1:
        raise ValueError("r must lie in (0, 1)")
    if sigma_hat < 0:
        raise ValueError("sigma_hat must be nonnegative")
    eps = 1.0 / (2.0 * cdf_hat.effective_size())
    lo = min(max(r - z * sigma_hat, eps), 1.0 - eps)
    hi = min(max(r + z * sigma_hat, eps), 1.0 - eps)
    length = wcdf.quantile(cdf_hat, hi) - wcdf.quantile(cdf_hat, lo)
    if sigma_hat == 0 or length <= 0:
        raise DensityDegeneracyError(f"zero-length Woodruff interval at r={r}")
    return 2.0 * z * sigma_hat / length


def variance_hajek(sample: DrawnSample, g_hat, N: float, method: str = "syg") -> VarianceEstimate:
    g_hat = np.asarray(g_hat, dtype=float)
    p = sample.pi1
    d = 1.0 / p
    g_bar = math.fsum(d * g_hat) / math.fsum(d)
    c = g_hat - g_bar
    v_ht = ht_quadratic(sample, c / p) / N**2
    v_syg = syg_quadratic(sample, c / p) / N**2
    return VarianceEstimate(v_ht, v_syg, method)


def regression_residuals(g_hat, x_s, reg_weights) -> np.ndarray:
    """Residuals of the weighted LS fit of g_hat on (1, x)."""
    g_hat = np.asarray(g_hat, dtype=float)
    x_s = np.asarray(x_s, dtype=float)
    sw = np.sqrt(np.asarray(reg_weights, dtype=float))
    X = np.column_stack([np.ones_like(x_s), x_s])
    coef, _, rank, _ = np.linalg.lstsq(X * sw[:, None], g_hat * sw, rcond=None)
    if rank < 2:
        log.warning("rank-deficient calibration regression, using weighted mean-centering")
        return g_hat - np.dot(reg_weights, g_hat) / np.sum(reg_weights)
    return g_hat - X @ coef


def variance_calibration(
    sample: DrawnSample,
    g_hat,
    x_s,
    weights: CalibrationWeights,
    N: float,
    use_inverse_pi: bool = False,
    method: str = "syg",
) -> VarianceEstimate:
    mult = 1.0 / sample.pi1 if use_inverse_pi else weights.w
    e = regression_residuals(g_hat, x_s, mult)
    u = mult * e
    v_ht = ht_quadratic(sample, u) / N**2
    v_syg = syg_quadratic(sample, u) / N**2
    return VarianceEstimate(v_ht, v_syg, method)


def normal_ci(estimate: float, v: float, level: float) -> tuple[float, float]:
    """Interval estimate +/- z_{alpha/2} sqrt(v), v on the estimator scale."""
    if v < 0:
        raise ValueError("variance must be nonnegative")
    if not 0 < level < 1:
        raise ValueError("level must lie in (0, 1)")
    half = float(norm.ppf(0.5 + level / 2.0)) * math.sqrt(v)
    return (estimate - half, estimate + half)


def plugin_g_params(
    kind: EstimatorKind,
    cdf_hat: WeightedCdf,
    sample: DrawnSample,
    y_s,
    N: float,
    weights: CalibrationWeights | None = None,
) -> GFunctionParams:
    """Plug-in g-function parameters from the same cdf basis as the estimate.

    For b2 the level is canonicalized to r' = min(r, 1 - r).
    """
    basis = "calibration" if kind.basis == "calibration" else "hajek"

    def density(level):
        q = wcdf.quantile(cdf_hat, level)
        sigma = woodruff_sigma(sample, y_s, basis, q, N, weights)
        return q, woodruff_density(cdf_hat, level, sigma)

    nu, f_nu = density(0.5)
    F_nu = float(cdf_hat(nu))
    if kind.target == "b3":
        return GFunctionParams(
            "b3", nu=nu, delta=wcdf.mad_about_median(cdf_hat), b_value=wcdf.b3(cdf_hat), f_nu=f_nu, F_nu=F_nu
        )
    r = min(kind.r, 1.0 - kind.r)
    nu_r, f_r = density(r)
    nu_1mr, f_1mr = density(1.0 - r)
    return GFunctionParams(
        "b2",
        nu=nu,
        b_value=wcdf.b2(cdf_hat, r),
        f_nu=f_nu,
        F_nu=F_nu,
        r=r,
        nu_r=nu_r,
        nu_1mr=nu_1mr,
        f_nu_r=f_r,
        f_nu_1mr=f_1mr,
    )


@dataclass
class EstimateRecord:
    estimator: str
    estimate: float
    v2_ht: float
    v2_syg: float
    method: str
    intervals: dict[float, tuple[float, float]] = field(default_factory=dict)
    diagnostics: dict = field(default_factory=dict)

    @property
    def v2(self) -> float:
        return self.v2_syg if self.method == "syg" else self.v2_ht

    @property
    def sd(self) -> float:
        return math.sqrt(max(self.v2, 0.0))

    def to_dict(self) -> dict:
        return {
            "estimator": self.estimator,
            "estimate": self.estimate,
            "v2_ht": self.v2_ht,
            "v2_syg": self.v2_syg,
            "method": self.method,
            "sd": self.sd,
            "intervals": {f"{lv:g}": list(ci) for lv, ci in self.intervals.items()},
            "diagnostics": self.diagnostics,
        }


def infer(
    kind: EstimatorKind,
    sample: DrawnSample,
    y_s,
    x_s,
    aux: PopulationAux,
    method: str = "syg",
    use_inverse_pi: bool = False,
    levels=(0.90, 0.95, 0.99),
    weights: CalibrationWeights | None = None,
) -> EstimateRecord:
    """Point estimate, linearization variance and normal intervals for one sample."""
    if method not in ("syg", "ht"):
        raise ValueError(f"unknown variance method {method!r}")
    y_s = np.asarray(y_s, dtype=float)
    diagnostics: dict = {}
    if kind.basis == "calibration" and weights is None:
        weights = raking_weights(sample, x_s, aux)
    if weights is not None and kind.basis == "calibration":
        diagnostics["calibration"] = weights.diagnostics()

    cdf_hat = build_cdf(kind.basis, sample, y_s, x_s, aux, weights)
    if kind.basis == "ht":
        diagnostics["ht_total_mass"] = cdf_hat.total_mass
    point = estimate(kind, sample, y_s, x_s, aux, weights)

    if np.all(sample.pi1 == 1.0):
        # census: no design variability, so no density estimation either
        var = VarianceEstimate(0.0, 0.0, method)
    else:
        if kind.target == "mean":
            g_hat = y_s
        else:
            params = plugin_g_params(kind, cdf_hat, sample, y_s, aux.N, weights)
            g_hat = g3_values(params, y_s) if kind.target == "b3" else g2_values(params, y_s)
            diagnostics["g_params"] = {k: v for k, v in params.__dict__.items() if v is not None}
        if kind.basis == "calibration":
            var = variance_calibration(sample, g_hat, x_s, weights, aux.N, use_inverse_pi, method)
        else:
            var = variance_hajek(sample, g_hat, aux.N, method)

    rec = EstimateRecord(kind.label, point, var.v2_ht, var.v2_syg, method, diagnostics=diagnostics)
    v = max(rec.v2, 0.0)
    rec.intervals = {lv: normal_ci(point, v, lv) for lv in levels}
    return rec
