"""
Compensators and the bounded factor a(nu).

All functions are exact at nu = 0 through an analytic branch. For nu != 0 they
go through expm1 / log1p, so the approach to nu = 0 is continuous to machine
precision.
"""

import math

from scipy.optimize import brentq

from .errors import DomainError

_RTOL = 4 * 2.220446049250313e-16


def omega(x: float, nu: float) -> float:
    """Ecalle-Roussarie compensator (x^-nu - 1)/nu; -log x at nu = 0."""
    if x <= 0.0:
        raise DomainError(f"omega needs x > 0, got {x!r}")
    if nu == 0.0:
        return -math.log(x)
    return math.expm1(-nu * math.log(x)) / nu


def omega_inverse(y: float, nu: float) -> float:
    """
    The x > 0 with omega(x, nu) = y, for y >= 0 and nu >= 0.

    Found by bracketed root finding in s = log x, where omega is
    expm1(-nu s)/nu and strictly decreasing.
    """
    if y < 0.0 or nu < 0.0:
        raise DomainError(f"omega_inverse needs y >= 0 and nu >= 0, got {y!r}, {nu!r}")
    if nu == 0.0:
        return math.exp(-y)

    def residual(s: float) -> float:
        return math.expm1(-nu * s) / nu - y

    lo = -(2.0 * y + 1.0)
    s = brentq(residual, lo, 0.0, xtol=1e-15, rtol=_RTOL, maxiter=200)
    return math.exp(s)


def alpha(x: float, nu: float) -> float:
    """Inverse compensator log(1 + nu/x)/nu; 1/x at nu = 0."""
    if x <= 0.0 or x + nu <= 0.0:
        raise DomainError(f"alpha needs x > 0 and x + nu > 0, got x={x!r}, nu={nu!r}")
    if nu == 0.0:
        return 1.0 / x
    return math.log1p(nu / x) / nu


def eta_tilde(x: float, nu: float) -> float:
    """Square-root compensator sqrt(x + nu) - sqrt(nu), free of cancellation."""
    if x < 0.0 or nu < 0.0:
        raise DomainError(f"eta_tilde needs x >= 0 and nu >= 0, got x={x!r}, nu={nu!r}")
    if x == 0.0:
        return 0.0
    return x / (math.sqrt(x + nu) + math.sqrt(nu))


def kappa(x: float, nu: float) -> float:
    """1/(x + nu)."""
    if x + nu <= 0.0:
        raise DomainError(f"kappa needs x + nu > 0, got x={x!r}, nu={nu!r}")
    return 1.0 / (x + nu)


def a_of(nu: float) -> float:
    """(1 - e^-nu)/nu with a(0) = 1."""
    if nu == 0.0:
        return 1.0
    return -math.expm1(-nu) / nu


def alpha_derivative(x: float, nu: float, k: int) -> float:
    """
    k-th x-derivative of alpha for k <= 3, as a polynomial in 1/x and kappa.

    alpha'   = -kappa/x
    alpha''  = kappa/x^2 + kappa^2/x
    alpha''' = -2 kappa/x^3 - 2 kappa^2/x^2 - 2 kappa^3/x
    """
    q = 1.0 / x
    c = kappa(x, nu)
    if k == 0:
        return alpha(x, nu)
    if k == 1:
        return -q * c
    if k == 2:
        return q * q * c + q * c * c
    if k == 3:
        return -2.0 * (q ** 3 * c + q * q * c * c + q * c ** 3)
    raise ValueError("alpha derivatives are available for k <= 3 only")
