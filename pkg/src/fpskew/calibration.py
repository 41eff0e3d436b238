"""Exponential-form (raking) calibration on (1, x).

Weights are w_i = exp(b0 + b1 * x_i) / pi_i, with (b0, b1) solving

    sum_s w_i = N,    sum_s w_i x_i = sum_U x_i.

The system is solved by damped Newton iteration in standardized x
coordinates; the reported ``beta`` is in the original x units.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
import numpy.typing as npt

from .wcdf import WeightedCdf

log = logging.getLogger(__name__)


class CalibrationError(RuntimeError):
    pass


class CollinearityError(CalibrationError):
    """The calibration constraints are (numerically) linearly dependent."""


class InfeasibleCalibrationError(CalibrationError):
    """sum_x / N lies outside the open hull of the sample x values."""


class NonConvergenceError(CalibrationError):
    def __init__(self, msg: str, residual: float):
        super().__init__(msg)
        self.residual = residual


@dataclass(frozen=True)
class CalibrationWeights:
    beta: tuple[float, float]
    w: np.ndarray
    iterations: int
    residual_norm: float

    def diagnostics(self) -> dict:
        return {
            "beta0": self.beta[0],
            "beta1": self.beta[1],
            "iterations": self.iterations,
            "residual_norm": self.residual_norm,
        }


def calibration_residuals(w, x, N, sum_x) -> np.ndarray:
    return np.array([np.sum(w) - N, np.dot(w, x) - sum_x])


def solve_raking(
    x: npt.ArrayLike,
    pi: npt.ArrayLike,
    N: float,
    sum_x: float,
    tol: float = 1e-10,
    max_iter: int = 50,
    cond_limit: float = 1e12,
) -> CalibrationWeights:
    """Solve the two raking equations for the sample ``x`` with inclusion probs ``pi``.

    Raises CollinearityError for constant x (or an ill-conditioned Jacobian),
    InfeasibleCalibrationError when no positive weights can meet the x total,
    and NonConvergenceError when ``max_iter`` Newton steps do not bring both
    residuals below ``tol * max(N, |sum_x|)``.
    """
    x = np.asarray(x, dtype=float)
    d = 1.0 / np.asarray(pi, dtype=float)
    if tol <= 0:
        raise ValueError("tol must be positive")
    center = float(np.mean(x))
    scale = float(np.std(x))
    if x.size < 2 or scale == 0 or scale < 1e-12 * max(1.0, abs(center)):
        raise CollinearityError("auxiliary values are constant over the sample")
    # positive weights make sum w x / sum w a convex combination of the sample x
    xbar = sum_x / N
    if not x.min() < xbar < x.max():
        raise InfeasibleCalibrationError(
            f"population mean of x ({xbar:.6g}) is outside the sample range [{x.min():.6g}, {x.max():.6g}]"
        )
    z = (x - center) / scale
    target = np.array([N, (sum_x - N * center) / scale])
    bound = tol * max(N, abs(sum_x))

    def weights(a):
        return d * np.exp(a[0] + a[1] * z)

    def resid(w):
        return np.array([np.sum(w), np.dot(w, z)]) - target

    def orig_resid(w):
        return calibration_residuals(w, x, N, sum_x)

    a = np.zeros(2)
    w = weights(a)
    g = resid(w)
    it = 0
    while np.max(np.abs(orig_resid(w))) > bound:
        if it >= max_iter:
            raise NonConvergenceError(
                f"raking did not converge in {max_iter} iterations", float(np.max(np.abs(orig_resid(w))))
            )
        it += 1
        J = np.array([[np.sum(w), np.dot(w, z)], [np.dot(w, z), np.dot(w, z * z)]])
        if not np.all(np.isfinite(J)) or np.linalg.cond(J) > cond_limit:
            raise CollinearityError("calibration Jacobian is singular")
        step = np.linalg.solve(J, -g)
        norm0 = np.linalg.norm(g)
        t = 1.0
        for _ in range(60):
            a_new = a + t * step
            with np.errstate(over="ignore"):
                w_new = weights(a_new)
            g_new = resid(w_new)
            if np.all(np.isfinite(g_new)) and np.linalg.norm(g_new) < norm0:
                break
            t *= 0.5
        else:
            raise NonConvergenceError("step halving failed to reduce the residual", float(norm0))
        a, w, g = a_new, w_new, g_new

    log.debug("raking converged after %d Newton steps", it)
    b1 = a[1] / scale
    b0 = a[0] - a[1] * center / scale
    return CalibrationWeights((float(b0), float(b1)), w, it, float(np.max(np.abs(orig_resid(w)))))


def calibration_cdf(y: npt.ArrayLike, weights: CalibrationWeights, N: float) -> WeightedCdf:
    """F_cal(t) = (1/N) sum_s w_i I(y_i <= t)."""
    return WeightedCdf(y, weights.w / N)
