import math

import numpy as np
import pytest

from snb.core.compensators import (a_of, alpha, alpha_derivative, eta_tilde, kappa, omega,
                                   omega_inverse)
from snb.core.errors import DomainError


class TestExamples:
    def test_omega(self):
        assert omega(1.0, 0.37) == 0.0
        assert omega(0.5, 1.0) == pytest.approx(1.0, rel=1e-15)
        assert omega(math.exp(-1.0), 1e-12) == pytest.approx(1.0, abs=1e-9)

    def test_alpha(self):
        assert alpha(0.25, 0.0) == 4.0
        assert alpha(1.0, 1.0) == pytest.approx(0.693147, abs=1e-6)
        assert alpha(0.5, 0.5) == pytest.approx(1.386294, abs=1e-6)

    def test_eta_tilde(self):
        assert eta_tilde(0.09, 0.0) == pytest.approx(0.3, rel=1e-15)
        assert eta_tilde(0.0, 0.3) == 0.0
        assert eta_tilde(0.21, 0.04) == pytest.approx(0.3, rel=1e-15)

    def test_kappa(self):
        assert kappa(0.5, 0.0) == 2.0
        assert kappa(0.5, 0.5) == 1.0
        assert kappa(1.0, 1.0) == 0.5

    def test_a_of(self):
        assert a_of(0.0) == 1.0
        assert a_of(1.0) == pytest.approx(0.632121, abs=1e-6)
        nu = 1e-14
        assert abs(a_of(nu) - (1.0 - nu / 2.0 + nu * nu / 6.0)) <= 1e-12

    def test_domain(self):
        with pytest.raises(DomainError):
            omega(0.0, 0.1)
        with pytest.raises(DomainError):
            alpha(-1.0, 0.5)
        with pytest.raises(DomainError):
            eta_tilde(-0.1, 0.1)


@pytest.mark.parametrize("nu", [1e-3, 1e-6, 1e-9])
def test_uniform_square_root_convergence(nu):
    xs = np.linspace(0.0, 1.0, 10_001)[1:]
    err = max(abs(eta_tilde(x, nu) - math.sqrt(x)) for x in xs)
    assert err <= math.sqrt(nu)


@pytest.mark.parametrize("nu", [1e-3, 1e-6, 1e-9])
def test_pointwise_limits(nu):
    for x in np.geomspace(1e-6, 1.0, 61):
        assert abs(omega(x, nu) + math.log(x)) <= 10 * nu * max(1.0, math.log(x) ** 2)
        assert abs(alpha(x, nu) - 1.0 / x) * x * x <= 10 * nu
        assert abs(kappa(x, nu) - 1.0 / x) * x * x <= 10 * nu
        assert abs(alpha(x, nu) - alpha(x, 0.0)) <= nu / (x * x)


@pytest.mark.parametrize("nu", [0.1, 0.01])
def test_alpha_is_log_of_inverse_omega(nu):
    for x in np.linspace(0.1, 1.0, 50):
        assert abs(alpha(x, nu) + math.log(omega_inverse(1.0 / x, nu))) <= 1e-9


def test_omega_inverse_round_trip():
    for nu in (0.0, 0.05, 0.5):
        for y in (0.0, 0.3, 4.0):
            assert omega(omega_inverse(y, nu), nu) == pytest.approx(y, abs=1e-12)


def _central(fn, x, h):
    return (8.0 * (fn(x + h) - fn(x - h)) - (fn(x + 2 * h) - fn(x - 2 * h))) / (12.0 * h)


@pytest.mark.parametrize("nu", [0.0, 0.01, 0.5])
def test_derivative_identities(nu):
    for x in np.geomspace(0.1, 1.0, 20):
        h = 1e-4 * x
        for k in (1, 2, 3):
            fd = _central(lambda t: kappa(t, nu) ** k, x, h)
            assert fd == pytest.approx(-k * kappa(x, nu) ** (k + 1), rel=1e-6)
        assert _central(lambda t: math.log(t + nu), x, h) == pytest.approx(kappa(x, nu), rel=1e-6)
        assert _central(lambda t: alpha(t, nu), x, h) == pytest.approx(-kappa(x, nu) / x, rel=1e-6)


@pytest.mark.parametrize("nu", [0.0, 0.01, 0.5])
def test_alpha_derivative_polynomials(nu):
    for x in np.geomspace(0.1, 1.0, 20):
        h = 1e-4 * x
        for k in (1, 2, 3):
            fd = _central(lambda t: alpha_derivative(t, nu, k - 1), x, h)
            assert fd == pytest.approx(alpha_derivative(x, nu, k), rel=1e-6)


def test_alpha_derivative_order_limit():
    with pytest.raises(ValueError):
        alpha_derivative(0.5, 0.1, 4)
