import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate, special

from parentvol.betafit import (
    FitError,
    fit_beta_cdf,
    fit_beta_points,
    regularized_incomplete_beta,
    small_eps_approximant,
    small_eps_coefficient,
)
from parentvol.montecarlo import EmpiricalCurve

pos = st.floats(0.05, 50.0)
unit = st.floats(0.0, 1.0)


def quad_ibeta(x, a, b):
    num = integrate.quad(lambda t: t ** (a - 1) * (1 - t) ** (b - 1), 0, x, epsabs=1e-14, epsrel=1e-13)[0]
    return num / special.beta(a, b)


def test_uniform_case():
    x = np.linspace(0, 1, 11)
    np.testing.assert_allclose(regularized_incomplete_beta(x, 1, 1), x, atol=1e-15)


def test_symmetric_midpoint():
    assert regularized_incomplete_beta(0.5, 2, 2) == pytest.approx(0.5, abs=1e-14)
    assert regularized_incomplete_beta(0.5, 2, 2) == pytest.approx(quad_ibeta(0.5, 2, 2), abs=1e-13)


@pytest.mark.parametrize("x,a,b", [(0.3, 2.5, 4.0), (0.01, 0.7, 3.0), (0.9, 5.0, 1.5), (0.5, 1.3, 1.3)])
def test_against_quadrature(x, a, b):
    assert regularized_incomplete_beta(x, a, b) == pytest.approx(quad_ibeta(x, a, b), abs=1e-11)


@settings(max_examples=200, deadline=None)
@given(unit, pos, pos)
def test_reflection(y, a, b):
    # use the exact float pair (x, 1 - x) on both sides
    x = 1.0 - y
    lhs = regularized_incomplete_beta(x, a, b)
    rhs = 1 - regularized_incomplete_beta(1.0 - x, b, a)
    assert lhs == pytest.approx(rhs, abs=1e-12)


@settings(max_examples=200, deadline=None)
@given(unit, pos, pos)
def test_against_scipy(x, a, b):
    assert regularized_incomplete_beta(x, a, b) == pytest.approx(special.betainc(a, b, x), rel=1e-10, abs=1e-14)


def test_endpoints_and_monotonicity():
    x = np.linspace(0, 1, 400)
    y = regularized_incomplete_beta(x, 2.7, 0.8)
    assert y[0] == 0.0 and y[-1] == 1.0
    assert np.all(np.diff(y) >= 0)


def test_domain_errors():
    with pytest.raises(ValueError):
        regularized_incomplete_beta(1.2, 1, 1)
    with pytest.raises(ValueError):
        regularized_incomplete_beta(0.5, 0, 1)
    with pytest.raises(ValueError):
        regularized_incomplete_beta(0.5, 1, -2)


def test_small_eps_coefficient_examples():
    assert small_eps_coefficient(1, 1) == pytest.approx(1.0)
    assert small_eps_coefficient(2, 1) == pytest.approx(1.0)
    assert small_eps_coefficient(2, 5) == pytest.approx(special.gamma(7) / (2 * special.gamma(2) * special.gamma(5)))


@pytest.mark.parametrize("a", [0.5, 1.0, 2.0, 4.0])
@pytest.mark.parametrize("b", [0.5, 1.0, 2.0, 4.0])
def test_small_eps_approximant_is_leading_order(a, b):
    eps = 1e-3
    exact = regularized_incomplete_beta(eps, a, b)
    assert small_eps_approximant(eps, a, b) == pytest.approx(exact, rel=0.01)


GRID = np.linspace(0.02, 0.98, 30)


@pytest.mark.parametrize("a,b", [(2.0, 5.0), (1.0, 1.0), (0.7, 3.0)])
def test_recovers_noiseless_parameters(a, b):
    fit = fit_beta_points(GRID, regularized_incomplete_beta(GRID, a, b))
    assert fit.alpha == pytest.approx(a, rel=1e-4)
    assert fit.beta == pytest.approx(b, rel=1e-4)
    assert fit.rmse < 1e-6


def test_refit_is_idempotent():
    rng = np.random.default_rng(4)
    y = np.clip(regularized_incomplete_beta(GRID, 2, 3) + rng.normal(0, 0.01, GRID.size), 0, 1)
    first = fit_beta_points(GRID, y)
    again = fit_beta_points(GRID, y, init=(first.alpha, first.beta))
    assert again.alpha == pytest.approx(first.alpha, rel=1e-6)
    assert again.beta == pytest.approx(first.beta, rel=1e-6)


def test_fit_from_curve():
    trials = 100_000
    hits = np.round(regularized_incomplete_beta(GRID, 1.5, 2.5) * trials).astype(int)
    fit = fit_beta_cdf(EmpiricalCurve(GRID, hits, trials, "fidelity"))
    assert fit.alpha == pytest.approx(1.5, rel=1e-3)
    assert fit.n_points == GRID.size
    assert set(fit.to_dict()) >= {"alpha", "beta", "rmse", "small_eps_coeff"}


def test_fit_errors():
    with pytest.raises(FitError):
        fit_beta_points([0.1, 0.2, 0.3, 0.4], [0.1, 0.2, 0.3, 0.4])
    with pytest.raises(FitError):
        fit_beta_points(GRID, np.zeros_like(GRID))
    with pytest.raises(FitError):
        fit_beta_points(GRID, np.ones_like(GRID))
    with pytest.raises(FitError):
        fit_beta_points(GRID, GRID[:-1])
