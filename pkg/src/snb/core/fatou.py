"""
Fatou coordinates, the flow, the time-one map and the displacement function.

Everything right of the attracting fixed point x1 is computed in offset
coordinates u = x - x1, so quantities that vanish at x1 (gaps, displacements,
the compensator variable eta) keep full relative precision.

Psi is the antiderivative of 1/F. For the model family it is closed form:

    Psi(x1 + u) = alpha(u, 2 sqrt(nu)) - (rho/2) (log u + log(u + 2 sqrt(nu)))

For generic fields the singular part of 1/F at x1 (c/u at a simple root,
A/u^2 + B/u at the parabolic double root) is integrated exactly and the
analytic remainder is tabulated on adaptive Chebyshev panels.
"""

import logging
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
from numpy.polynomial import chebyshev as C
from scipy.integrate import quad, solve_ivp
from scipy.optimize import brentq

from .errors import (BracketError, ConvergenceError, DomainError, FixedPointInIntervalError,
                     MonotonicityError, RangeError)
from .field import Field, ModelParams, attracting_fixed_point, fixed_points

logger = logging.getLogger(__name__)

CLOSED_FORM_MODEL = "closed_form_model"
NUMERIC_QUADRATURE = "numeric_quadrature"

QUAD_ABS_TOL = 1e-10
FLOW_CROSS_CHECK_TOL = 1e-7
MULTIPLIER_TOL = 1e-7
JET_RICHARDSON_LEVELS = 3
JET_ORDER_MAX = 4

_EPS = float(np.finfo(float).eps)
_RTOL = 4 * _EPS
_LOG_TINY = math.log(1e-300)
_PANEL_DEGREE = 24
_PANEL_TOL = 1e-13
_PANEL_MAX_DEPTH = 48
_INITIAL_PANEL_LEVELS = 10
_BISECTION_STEPS = 200


@dataclass(frozen=True)
class DisplacementJet:
    x1: float
    coeffs: Tuple[float, ...]
    method: str = "richardson"


# ---------------------------------------------------------------------------
# Closed form for the model family

def _model_psi_offset(u, s: float, rho: float):
    """Psi of the model at x = s + u, s = sqrt(nu); u > 0, scalar or array."""
    u = np.asarray(u, dtype=float)
    if s == 0.0:
        main = 1.0 / u
        log_part = 2.0 * np.log(u)
    else:
        main = np.log1p(2.0 * s / u) / (2.0 * s)
        log_part = np.log(u) + np.log(u + 2.0 * s)
    if rho == 0.0:
        return main
    return main - 0.5 * rho * log_part


def fatou_model(x: float, nu: float, rho: ModelParams) -> float:
    """
    Closed-form Fatou coordinate of the model family.

    Args:
        x: Point right of sqrt(nu)
        nu: Parameter, nu >= 0
        rho: Coefficients of rho(nu)

    Returns:
        (1/(2 sqrt nu)) ln((x + sqrt nu)/(x - sqrt nu)) - (rho(nu)/2) log(x^2 - nu),
        or 1/x - rho(0) log x at nu = 0

    Raises:
        DomainError: x <= sqrt(nu)
    """
    if nu < 0.0:
        raise DomainError(f"nu must be >= 0, got {nu!r}")
    s = math.sqrt(nu)
    if not x > s:
        raise DomainError(f"Fatou coordinate needs x > sqrt(nu) = {s!r}, got {x!r}")
    return float(_model_psi_offset(x - s, s, rho.rho(nu)))


# ---------------------------------------------------------------------------
# Chebyshev panels for the regular part of 1/F

class _ChebyshevPanels:
    """Antiderivative of a smooth integrand on [0, upper], normalized at upper."""

    def __init__(self, integrand: Callable[[np.ndarray], np.ndarray],
                 noise: Callable[[np.ndarray], np.ndarray], upper: float):
        self.upper = upper
        nodes = C.chebpts1(_PANEL_DEGREE + 1)

        pending = [(0.0, upper * 2.0 ** -_INITIAL_PANEL_LEVELS, 0)]
        for k in range(_INITIAL_PANEL_LEVELS):
            pending.append((upper * 2.0 ** -(k + 1), upper * 2.0 ** -k, 0))

        accepted = []
        while pending:
            a, b, depth = pending.pop()
            u = 0.5 * (a + b) + 0.5 * (b - a) * nodes
            with np.errstate(all="ignore"):
                values = integrand(u)
            if not np.all(np.isfinite(values)):
                raise DomainError(f"non-finite integrand on Fatou panel [{a!r}, {b!r}]")
            coefs = C.chebfit(nodes, values, _PANEL_DEGREE)
            tail = np.max(np.abs(coefs[-3:]))
            bound = _PANEL_TOL * max(1.0, np.max(np.abs(values))) + 64 * _EPS * np.max(noise(u))
            if tail <= bound or depth >= _PANEL_MAX_DEPTH:
                if tail > bound:
                    logger.warning("Fatou panel [%g, %g] accepted at max depth (tail %.3g)", a, b, tail)
                accepted.append((a, b, C.Chebyshev(coefs, domain=[a, b])))
            else:
                mid = 0.5 * (a + b)
                pending.append((a, mid, depth + 1))
                pending.append((mid, b, depth + 1))

        accepted.sort(key=lambda panel: panel[0])
        self._lefts = np.array([a for a, _, _ in accepted])
        self._anti = [poly.integ(lbnd=b) for _, b, poly in accepted]
        offsets = np.zeros(len(accepted))
        for j in range(len(accepted) - 2, -1, -1):
            a_next = accepted[j + 1][0]
            offsets[j] = offsets[j + 1] - self._anti[j + 1](a_next)
        self._offsets = offsets
        logger.debug("Fatou table: %d panels on [0, %g]", len(accepted), upper)

    def integral_from_upper(self, u: np.ndarray) -> np.ndarray:
        idx = np.clip(np.searchsorted(self._lefts, u, side="right") - 1, 0, len(self._anti) - 1)
        out = np.empty_like(u)
        for j in np.unique(idx):
            mask = idx == j
            out[mask] = self._anti[j](u[mask]) - self._offsets[j]
        return out


# ---------------------------------------------------------------------------
# The Fatou coordinate

class FatouCoordinate:
    """
    Psi on the real sector x1 < x of one field at one parameter value.

    Instances are immutable once built; use :func:`fatou_coordinate` to get a
    cached one.
    """

    def __init__(self, field: Field, nu: float, x_ref: Optional[float] = None):
        field.box.check_nu(nu)
        attracting = attracting_fixed_point(field, nu)
        self.field = field
        self.nu = nu
        self.x1 = attracting.x
        self.parabolic = attracting.multiplicity == 2
        self.x_ref = field.box.x_max if x_ref is None else float(x_ref)
        if not self.x_ref > self.x1:
            raise DomainError(f"x_ref={self.x_ref!r} must lie right of x1={self.x1!r}")
        self.u_ref = self.x_ref - self.x1
        self.offset_F = field.offset_function(nu, self.x1)

        if field.is_model:
            self.branch = CLOSED_FORM_MODEL
            self._s = math.sqrt(nu)
            self._rho = field.variant.rho(nu)
            self._table = None
        else:
            self.branch = NUMERIC_QUADRATURE
            for point in fixed_points(field, nu):
                if self.x1 < point.x <= self.x_ref:
                    raise FixedPointInIntervalError(self.x1, self.x_ref, point.x)
            self._singular, self._singular_integral = _singular_part(field, nu, self.x1,
                                                                     self.parabolic)
            singular = self._singular
            offset_F = self.offset_F

            def regular(u):
                return 1.0 / offset_F(u) - singular(u)

            self._table = _ChebyshevPanels(regular, lambda u: np.abs(singular(u)), self.u_ref)

    # -- evaluation --------------------------------------------------------

    def _check_offsets(self, u: np.ndarray):
        if np.any(u <= 0.0):
            raise DomainError(f"Fatou coordinate is defined for x > x1={self.x1!r}")
        if self.branch == NUMERIC_QUADRATURE and np.any(u > self.u_ref * (1.0 + 1e-12)):
            raise DomainError(f"numeric Fatou coordinate is tabulated up to x_ref={self.x_ref!r}")

    def _psi(self, u: np.ndarray) -> np.ndarray:
        if self.branch == CLOSED_FORM_MODEL:
            return _model_psi_offset(u, self._s, self._rho)
        u = np.minimum(u, self.u_ref)
        return self._table.integral_from_upper(u) + self._singular_integral(u, self.u_ref)

    def value_offset(self, u):
        """Psi(x1 + u) for scalar or array offsets u > 0."""
        arr = np.atleast_1d(np.asarray(u, dtype=float))
        self._check_offsets(arr)
        values = self._psi(arr)
        return float(values[0]) if np.ndim(u) == 0 else values

    def value(self, x):
        """Psi(x) for scalar or array x > x1."""
        return self.value_offset(np.asarray(x, dtype=float) - self.x1)

    def derivative(self, x: float) -> float:
        """Psi'(x) = 1/F(x, nu)."""
        return 1.0 / self.field.F(x, self.nu)

    # -- inversion ---------------------------------------------------------

    @property
    def has_closed_inverse(self) -> bool:
        return self.branch == CLOSED_FORM_MODEL and self._rho == 0.0

    def inverse_offset(self, targets, u_upper: float) -> np.ndarray:
        """
        Offsets u with Psi(x1 + u) = target, vectorized.

        Every target must satisfy target >= Psi(x1 + u_upper); the solution then
        lies in (0, u_upper]. Closed form when rho == 0, otherwise bisection in
        log u followed by one safeguarded Newton step.
        """
        T = np.atleast_1d(np.asarray(targets, dtype=float))
        if self.has_closed_inverse:
            s = self._s
            if s == 0.0:
                return 1.0 / T
            return 2.0 * s / np.expm1(2.0 * s * T)

        s_hi = np.full(T.shape, math.log(u_upper))
        step = np.ones_like(T)
        s_lo = s_hi - step
        while True:
            short = self._psi(np.exp(s_lo)) < T
            if not short.any():
                break
            if np.any(s_lo[short] <= _LOG_TINY):
                raise BracketError("Psi inverse bracket reached the underflow limit")
            s_hi = np.where(short, s_lo, s_hi)
            step = np.where(short, 2.0 * step, step)
            s_lo = np.where(short, np.maximum(s_lo - step, _LOG_TINY), s_lo)

        for _ in range(_BISECTION_STEPS):
            mid = 0.5 * (s_lo + s_hi)
            above = self._psi(np.exp(mid)) >= T
            s_lo = np.where(above, mid, s_lo)
            s_hi = np.where(above, s_hi, mid)
            if np.all(s_hi - s_lo <= 2.0 * _EPS * np.maximum(1.0, np.abs(s_hi))):
                break

        u = np.exp(0.5 * (s_lo + s_hi))
        residual = self._psi(u) - T
        candidate = u - residual * self.offset_F(u)
        inside = (candidate > np.exp(s_lo) * (1.0 - 1e-12)) & (candidate < np.exp(s_hi) * (1.0 + 1e-12))
        candidate = np.where(inside, candidate, u)
        better = np.abs(self._psi(candidate) - T) <= np.abs(residual)
        return np.where(better, candidate, u)

    def flow_offset(self, u0: float, t: float) -> float:
        """
        Offset reached from u0 after time t >= 0, by Brent's method on the
        bracket (0, u0].
        """
        if t < 0.0:
            raise DomainError(f"flow is computed for t >= 0, got {t!r}")
        if t == 0.0:
            return u0
        target = self.value_offset(u0) + t

        def residual(u: float) -> float:
            return float(self._psi(np.array([u]))[0]) - target

        lo = u0
        f_lo = -t
        while f_lo <= 0.0:
            lo *= 0.5
            if lo < 1e-300:
                raise BracketError("flow bracket (x1, x0] failed", lo, u0, f_lo, -t)
            f_lo = residual(lo)
        return brentq(residual, lo, u0, xtol=1e-300, rtol=_RTOL, maxiter=500)


def _singular_part(field: Field, nu: float, x1: float, parabolic: bool):
    """Singular terms of 1/F at x1 and their integral from u_ref to u."""
    coeffs = field.taylor_coefficients(x1, nu, 3)
    if not parabolic:
        if coeffs[1] == 0.0:
            raise DomainError(f"simple fixed point x1={x1!r} has Fx = 0 at nu={nu!r}")
        c = 1.0 / coeffs[1]

        def simple(u):
            return c / u

        def simple_integral(u, u_ref):
            return c * (np.log(u) - math.log(u_ref))
        return simple, simple_integral

    a2, a3 = coeffs[2], coeffs[3]
    if a2 == 0.0:
        raise DomainError(f"double fixed point x1={x1!r} has Fxx = 0 at nu={nu!r}; not a saddle-node")
    A = 1.0 / a2
    B = -a3 / (a2 * a2)

    def double(u):
        return A / (u * u) + B / u

    def double_integral(u, u_ref):
        return -A / u + A / u_ref + B * (np.log(u) - math.log(u_ref))
    return double, double_integral


@lru_cache(maxsize=128)
def fatou_coordinate(field: Field, nu: float) -> FatouCoordinate:
    """Cached Fatou coordinate with x_ref at the right edge of the box."""
    return FatouCoordinate(field, nu)


def fatou_numeric(field: Field, nu: float, x: float, x_ref: Optional[float] = None) -> float:
    """
    Integral of 1/F(t, nu) from x_ref to x by adaptive quadrature.

    When both points lie right of the attracting fixed point its singular part
    is subtracted from the integrand and integrated in closed form.

    Raises:
        FixedPointInIntervalError: A zero of F lies between x_ref and x
    """
    if x_ref is None:
        x_ref = field.box.x_max
    lo, hi = min(x, x_ref), max(x, x_ref)
    for point in fixed_points(field, nu):
        if lo <= point.x <= hi:
            raise FixedPointInIntervalError(lo, hi, point.x)

    attracting = attracting_fixed_point(field, nu)
    x1 = attracting.x
    if lo > x1:
        singular, singular_integral = _singular_part(field, nu, x1, attracting.multiplicity == 2)
        offset_F = field.offset_function(nu, x1)

        def integrand(t):
            u = t - x1
            return float(1.0 / offset_F(u) - singular(u))

        closed = float(singular_integral(x - x1, x_ref - x1))
    else:
        def integrand(t):
            return 1.0 / field.F(t, nu)

        closed = 0.0

    value, abserr = quad(integrand, x_ref, x, epsabs=QUAD_ABS_TOL, epsrel=1e-12, limit=400)
    if abserr > 10 * QUAD_ABS_TOL:
        logger.warning("Fatou quadrature error estimate %.3g above tolerance", abserr)
    return value + closed


# ---------------------------------------------------------------------------
# Flow, time-one map, displacement

def _offset_of(coord: FatouCoordinate, x: float) -> float:
    u = x - coord.x1
    if u < 0.0:
        raise DomainError(f"x={x!r} lies left of the attracting fixed point {coord.x1!r}")
    return u


def _rk_displacement(offset_F: Callable, u0: float, t: float) -> float:
    """u(t) - u0 along du/dt = F(x1 + u), integrated with DOP853."""
    if t == 0.0:
        return 0.0
    f0 = abs(float(np.atleast_1d(offset_F(u0))[0]))
    atol = max(1e-16 * f0 * t, 1e-300)

    def rhs(_, d):
        return offset_F(u0 + d)

    sol = solve_ivp(rhs, (0.0, t), [0.0], method="DOP853", rtol=1e-13, atol=atol)
    if not sol.success:
        raise ConvergenceError(f"Runge-Kutta flow failed: {sol.message}")
    return float(sol.y[0, -1])


def flow_rk(field: Field, nu: float, x0: float, t: float) -> float:
    """Flow of dx/dt = F(x, nu) by adaptive Runge-Kutta integration."""
    coord = fatou_coordinate(field, nu)
    return x0 + _rk_displacement(coord.offset_F, x0 - coord.x1, t)


def flow(field: Field, nu: float, x0: float, t: float,
         cross_check: Optional[bool] = None) -> float:
    """
    Psi^-1(Psi(x0) + t) for x0 right of the attracting fixed point.

    Generic fields are cross-checked against Runge-Kutta integration unless
    cross_check is False; a disagreement is logged.

    Raises:
        DomainError: x0 left of x1 or t < 0
        BracketError: The root bracket could not be established
    """
    coord = fatou_coordinate(field, nu)
    u0 = _offset_of(coord, x0)
    if t == 0.0:
        return x0
    if u0 == 0.0:
        return x0
    x = coord.x1 + coord.flow_offset(u0, t)
    if cross_check is None:
        cross_check = not field.is_model
    if cross_check:
        x_rk = flow_rk(field, nu, x0, t)
        if abs(x - x_rk) > FLOW_CROSS_CHECK_TOL * max(1.0, abs(x)):
            logger.warning("flow of %s at nu=%g: Fatou %r vs Runge-Kutta %r",
                           field.label, nu, x, x_rk)
    return x


def time_one_map(field: Field, nu: float, x: float) -> float:
    """f_nu(x) = flow(x, 1)."""
    return flow(field, nu, x, 1.0)


def displacement_offset(coord: FatouCoordinate, u: float) -> float:
    """g at x1 + u, computed as u - f in offsets."""
    if u == 0.0:
        return 0.0
    return u - coord.flow_offset(u, 1.0)


def displacement(field: Field, nu: float, x: float) -> float:
    """g_nu(x) = x - f_nu(x)."""
    coord = fatou_coordinate(field, nu)
    return displacement_offset(coord, _offset_of(coord, x))


def displacement_inverse_offset(coord: FatouCoordinate, y: float,
                                u_max: Optional[float] = None) -> float:
    """
    Offset u in (0, u_max] with g(x1 + u) = y.

    Solves the Abel form Psi(u - y) - Psi(u) = 1, which is strictly decreasing
    in u exactly when g is increasing, so one bracketed search suffices.

    Raises:
        RangeError: y above g(x1 + u_max)
        MonotonicityError: The Abel residual is not monotone on the bracket
    """
    if not y > 0.0:
        raise DomainError(f"displacement_inverse needs y > 0, got {y!r}")
    if u_max is None:
        u_max = coord.u_ref

    def residual(u: float) -> float:
        values = coord._psi(np.array([u - y, u]))
        return float(values[0] - values[1]) - 1.0

    if u_max <= y:
        raise RangeError("y above range", y, u_max)
    f_hi = residual(u_max)
    if f_hi > 0.0:
        rounding = 64 * _EPS * max(1.0, abs(coord.value_offset(u_max - y)))
        if f_hi > rounding:
            raise RangeError("y above range", y, u_max, None, f_hi)
        return u_max
    if f_hi == 0.0:
        return u_max

    gap = 0.5 * (u_max - y)
    lo = y + gap
    f_lo = residual(lo)
    while f_lo <= 0.0:
        gap *= 0.5
        lo = y + gap
        if gap < 1e-300 or lo == y:
            raise RangeError("y above range", lo, u_max, f_lo, f_hi)
        f_lo = residual(lo)

    probes = np.minimum(np.geomspace(lo - y, u_max - y, 17) + y, u_max)
    values = np.array([residual(u) for u in probes])
    steps = np.diff(values)
    slack = 1e-12 * np.maximum(np.abs(values[:-1]), 1.0)
    if np.any(steps > slack):
        raise MonotonicityError("monotonicity violated on bracket", lo, u_max, f_lo, f_hi)

    return brentq(residual, lo, u_max, xtol=1e-300, rtol=_RTOL, maxiter=500)


def displacement_inverse(field: Field, nu: float, y: float) -> float:
    """The x in (x1, x_max] with g_nu(x) = y."""
    coord = fatou_coordinate(field, nu)
    return coord.x1 + displacement_inverse_offset(coord, y)


# ---------------------------------------------------------------------------
# Local data at x1

def _jet_step(nu: float, order: int) -> float:
    base = 1e-3 * max(math.sqrt(nu), 1e-2)
    return base * 10.0 ** max(order - 2, 0)


_STENCILS: Dict[int, Dict[int, float]] = {
    1: {1: 0.5, -1: -0.5},
    2: {1: 1.0, 0: -2.0, -1: 1.0},
    3: {2: 0.5, 1: -1.0, -1: 1.0, -2: -0.5},
    4: {2: 1.0, 1: -4.0, 0: 6.0, -1: -4.0, -2: 1.0},
}


def _richardson(estimate: Callable[[float], float], h: float, levels: int) -> List[float]:
    table = [[estimate(h / 2.0 ** i)] for i in range(levels)]
    for i in range(1, levels):
        for j in range(1, i + 1):
            finer, coarser = table[i][j - 1], table[i - 1][j - 1]
            table[i].append(finer + (finer - coarser) / (4.0 ** j - 1.0))
    return table[-1]


def multiplier(field: Field, nu: float) -> float:
    """
    f_nu'(x1) = exp(Fx(x1, nu)), checked against a central difference of the
    Runge-Kutta time-one map.

    Raises:
        ConvergenceError: The two values disagree by more than 1e-7
    """
    coord = fatou_coordinate(field, nu)
    value = math.exp(field.Fx(coord.x1, nu))
    h = 0.1 * _jet_step(nu, 1)
    g_plus = -_rk_displacement(coord.offset_F, h, 1.0)
    g_minus = -_rk_displacement(coord.offset_F, -h, 1.0)
    difference = 1.0 - (g_plus - g_minus) / (2.0 * h)
    if abs(difference - value) > MULTIPLIER_TOL:
        raise ConvergenceError("multiplier cross-check failed", [difference, value])
    return value


def displacement_jet(field: Field, nu: float, order: int = 3) -> DisplacementJet:
    """
    Taylor coefficients c0..c_order of g_nu at x1.

    Central differences of g, sampled on both sides of x1 by Runge-Kutta
    integration in offset coordinates, are extrapolated over three step
    halvings. Orders above 2 use proportionally larger steps.

    Raises:
        ConvergenceError: The last two extrapolants disagree, or c1 misses
            1 - exp(Fx(x1, nu))
    """
    if not 0 <= order <= JET_ORDER_MAX:
        raise ValueError(f"jet order must be in 0..{JET_ORDER_MAX}")
    coord = fatou_coordinate(field, nu)
    cache: Dict[float, float] = {}

    def g(u: float) -> float:
        if u not in cache:
            cache[u] = -_rk_displacement(coord.offset_F, u, 1.0)
        return cache[u]

    coeffs = [g(0.0)]
    for k in range(1, order + 1):
        stencil = _STENCILS[k]

        def estimate(h: float, stencil=stencil, k=k) -> float:
            return sum(w * g(m * h) for m, w in stencil.items()) / h ** k

        row = _richardson(estimate, _jet_step(nu, k), JET_RICHARDSON_LEVELS)
        best, previous = row[-1], row[-2]
        if abs(best - previous) > 1e-5 * abs(best) + 1e-9:
            raise ConvergenceError(f"Richardson extrapolation of order {k} did not settle",
                                   [previous, best])
        coeffs.append(best / math.factorial(k))

    if order >= 1:
        expected = 1.0 - math.exp(field.Fx(coord.x1, nu))
        if abs(coeffs[1] - expected) > 1e-8 + 1e-6 * abs(expected):
            raise ConvergenceError("jet linear coefficient disagrees with the multiplier",
                                   [coeffs[1], expected])
    return DisplacementJet(coord.x1, tuple(coeffs))


def variational_jet(field: Field, nu: float, order: int = 3) -> DisplacementJet:
    """
    Taylor coefficients of g_nu at x1 from the variational equations.

    With x(t) = x1 + sum a_k(t) u^k, the a_k obey da/dt = sum_j F_j a^j
    (series powers truncated at the order), a(0) = (0, 1, 0, ...).
    """
    if not 0 <= order <= JET_ORDER_MAX:
        raise ValueError(f"jet order must be in 0..{JET_ORDER_MAX}")
    coord = fatou_coordinate(field, nu)
    taylor = np.array(field.taylor_coefficients(coord.x1, nu, order))
    n = order + 1

    def rhs(_, a):
        out = taylor[0] * np.eye(1, n, 0)[0]
        power = np.eye(1, n, 0)[0]
        for j in range(1, n):
            power = np.convolve(power, a)[:n]
            out = out + taylor[j] * power
        return out

    start = np.eye(1, n, min(1, order))[0] if order >= 1 else np.zeros(1)
    sol = solve_ivp(rhs, (0.0, 1.0), start, method="DOP853", rtol=1e-12, atol=1e-15)
    if not sol.success:
        raise ConvergenceError(f"variational equations failed: {sol.message}")
    a = sol.y[:, -1]
    coeffs = -a
    if order >= 1:
        coeffs[1] += 1.0
    return DisplacementJet(coord.x1, tuple(float(c) for c in coeffs), "variational")
