import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from fpskew import oracle
from fpskew.calibration import (
    CollinearityError,
    InfeasibleCalibrationError,
    NonConvergenceError,
    calibration_cdf,
    calibration_residuals,
    solve_raking,
)


def random_instance(rng, n):
    x = rng.lognormal(size=n)
    pi = rng.uniform(0.05, 0.9, n)
    N = float(np.sum(1 / pi)) * rng.uniform(0.7, 1.4)
    # population mean strictly inside the sample x range
    xbar = np.quantile(x, rng.uniform(0.2, 0.8))
    return x, pi, N, N * xbar


def test_fixed_point():
    x = np.array([1.0, 2.0, 4.0])
    pi = np.full(3, 0.5)
    fit = solve_raking(x, pi, 6.0, 14.0)
    assert fit.iterations == 0
    assert fit.beta == (0.0, 0.0)
    np.testing.assert_array_equal(fit.w, 1 / pi)
    b0, b1 = oracle.grid_solve_raking(x, pi, 6.0, 14.0)
    assert abs(b0) < 1e-8 and abs(b1) < 1e-8
    F = calibration_cdf([3.0, 1.0, 2.0], fit, 6.0)
    np.testing.assert_allclose(F.probs, fit.w / 6)


def test_oracle_agreement_nontrivial():
    x = np.array([1.0, 2.0, 4.0])
    pi = np.array([0.5, 0.4, 0.6])
    fit = solve_raking(x, pi, 6.0, 13.0)
    ref = oracle.grid_solve_raking(x, pi, 6.0, 13.0)
    assert np.max(np.abs(np.array(fit.beta) - ref)) <= 1e-6
    np.testing.assert_allclose(calibration_cdf(x, fit, 6.0).masses, fit.w / 6)


def test_constant_x():
    with pytest.raises(CollinearityError):
        solve_raking(np.full(4, 2.0), np.full(4, 0.5), 8, 16)


def test_unsolvable_target():
    # sum_x / N outside the sample x range has no exponential-form solution
    with pytest.raises(InfeasibleCalibrationError):
        solve_raking(np.array([1.0, 2.0, 3.0]), np.full(3, 0.5), 6, 6 * 5.0)
    with pytest.raises(InfeasibleCalibrationError):
        solve_raking(np.array([1.0, 2.0, 3.0]), np.full(3, 0.5), 6, 6 * 3.0)


def test_iteration_cap():
    x = np.array([1.0, 2.0, 30.0])
    with pytest.raises(NonConvergenceError) as exc:
        solve_raking(x, np.full(3, 0.5), 6, 6 * 29.0, max_iter=2)
    assert exc.value.residual > 0


def test_bad_tol():
    with pytest.raises(ValueError):
        solve_raking(np.array([1.0, 2.0]), np.full(2, 0.5), 4, 6, tol=0)


def test_census():
    x = np.array([0.5, 1.0, 2.0, 7.0])
    fit = solve_raking(x, np.ones(4), 4, x.sum())
    assert fit.beta == (0.0, 0.0)


@given(st.integers(0, 10_000), st.integers(2, 200))
def test_randomized_solves(seed, n):
    rng = np.random.default_rng(seed)
    x, pi, N, sum_x = random_instance(rng, n)
    fit = solve_raking(x, pi, N, sum_x)
    res = calibration_residuals(fit.w, x, N, sum_x)
    assert np.max(np.abs(res)) <= 1e-8 * max(N, abs(sum_x))
    assert np.all(fit.w > 0)
    np.testing.assert_allclose(fit.w, np.exp(fit.beta[0] + fit.beta[1] * x) / pi, rtol=1e-8)
    F = calibration_cdf(rng.normal(size=n), fit, N)
    assert F.total_mass == pytest.approx(1.0, abs=1e-9)


@given(st.integers(0, 10_000), st.floats(-5, 50))
def test_shift_invariance(seed, c):
    rng = np.random.default_rng(seed)
    x, pi, N, sum_x = random_instance(rng, 12)
    a = solve_raking(x, pi, N, sum_x)
    b = solve_raking(x + c, pi, N, sum_x + N * c)
    np.testing.assert_allclose(a.w, b.w, rtol=1e-7)
    assert b.beta[1] == pytest.approx(a.beta[1], rel=1e-7, abs=1e-9)


def test_three_unit_oracle_sweep():
    rng = np.random.default_rng(2)
    for _ in range(50):
        x = np.sort(rng.uniform(0.5, 5.0, 3))
        pi = rng.uniform(0.2, 0.9, 3)
        N = float(np.sum(1 / pi)) * rng.uniform(0.8, 1.25)
        sum_x = N * (x[0] + (x[2] - x[0]) * rng.uniform(0.2, 0.8))
        fit = solve_raking(x, pi, N, sum_x)
        ref = oracle.grid_solve_raking(x, pi, N, sum_x)
        assert np.max(np.abs(np.array(fit.beta) - ref)) <= 1e-6
