"""
Invariant suites behind `snb validate`.

Every check reduces a family of identities over a grid to its largest error
and compares it with a tolerance.
"""

import logging
import math
from dataclasses import dataclass
from typing import Callable, Dict, Iterable, List

import numpy as np

from ..config.run_config import log_grid
from ..core import compensators as comp
from ..core.fatou import (displacement, displacement_jet, fatou_coordinate, fatou_numeric,
                          flow, flow_rk, multiplier, variational_jet)
from ..core.expr_parser import differentiate, evaluate, parse, to_string
from ..core.field import Field, fixed_points, genericity_check
from ..core.orbit import (continuous_critical_time, discrete_critical_index, generate_orbit,
                          neighborhood_measures, sawtooth_G, tau_continuity)
from ..core.scale_fit import (eta_samples, eta_vs_eta_tilde, fit_scale, read_multiplicity,
                              regime_fit)
from ..core.scaling import content_blowup, orbit_lengths, scaling_exponent

logger = logging.getLogger(__name__)

SUITES = ("expr", "field", "compensators", "fatou", "lengths", "fit", "continuity")
RHOS = (0.0, 0.3, -0.3)
FATOU_NUS = (0.0, 1e-4, 1e-2, 0.04)
CUBIC = "-x^2+nu+0.1*x^3"
EXPRESSIONS = (
    "-x^2+nu",
    CUBIC,
    "(-x^2+nu)/(1+0.3*x)",
    "exp(-x)*sin(nu+x)",
    "sqrt(1+x^2)-log(2+x*nu)",
    "-(x-nu)^3/(1+x^2)",
    "cos(x)^2+tanh(nu*x)-2^x",
)
# expression, expected passes
CALIBRATION_FIELDS = (
    ("-x^2+nu", True),
    ("-x^3+nu", False),
    ("-x^2+nu^2", False),
    ("-x^2", False),
    ("x-x^2+nu", False),
)
CONTINUITY_NUS = (1e-16, 1e-14, 1e-12)


@dataclass(frozen=True)
class Check:
    identity: str
    grid: str
    max_err: float
    tolerance: float
    passed: bool

    def to_row(self) -> dict:
        return {"identity": self.identity, "grid": self.grid, "max_err": self.max_err,
                "tolerance": self.tolerance, "pass": self.passed}


def _check(identity: str, grid: str, errors: Iterable[float], tolerance: float) -> Check:
    errors = np.asarray(list(errors), dtype=float)
    max_err = float(np.max(errors)) if errors.size else 0.0
    passed = bool(np.all(np.isfinite(errors)) and max_err <= tolerance)
    if not passed:
        logger.warning("check failed: %s on %s (%.3g > %.3g)", identity, grid, max_err, tolerance)
    return Check(identity, grid, max_err, tolerance, passed)


def _derivative(fn: Callable[[float], float], x: float, h: float) -> float:
    return (8.0 * (fn(x + h) - fn(x - h)) - (fn(x + 2 * h) - fn(x - 2 * h))) / (12.0 * h)


def _relative(a: float, b: float) -> float:
    return abs(a - b) / max(abs(b), 1e-300)


# ---------------------------------------------------------------------------
# expressions

def expr_checks() -> List[Check]:
    checks = []
    checks.append(_check("parse(to_string(parse(t))) = parse(t)", f"{len(EXPRESSIONS)} expressions",
                         (0.0 if parse(to_string(parse(t))) == parse(t) else 1.0 for t in EXPRESSIONS),
                         0.0))
    points = [(x, nu) for x in (0.1, 0.4, 0.9) for nu in (0.01, 0.05)]
    for var in ("x", "nu"):
        errors = []
        for text in EXPRESSIONS:
            e = parse(text)
            d = differentiate(e, var)
            for x, nu in points:
                if var == "x":
                    fd = _derivative(lambda t: evaluate(e, t, nu), x, 1e-4)
                else:
                    fd = _derivative(lambda t: evaluate(e, x, t), nu, 1e-4)
                errors.append(abs(evaluate(d, x, nu) - fd) / max(1.0, abs(fd)))
        checks.append(_check(f"d/d{var} symbolic = finite difference", f"{len(EXPRESSIONS)} expressions, "
                             "x in {0.1,0.4,0.9}, nu in {0.01,0.05}", errors, 1e-5))
    return checks


# ---------------------------------------------------------------------------
# fields

def field_checks() -> List[Check]:
    checks = []
    for text, expected in CALIBRATION_FIELDS:
        report = genericity_check(Field.generic(text))
        checks.append(_check(f"genericity passes = {str(expected).lower()}", text,
                             [0.0 if report.passes == expected else 1.0], 0.0))

    nus = np.linspace(0.0, 0.1, 10)
    for rho in RHOS:
        field = Field.model(rho)
        xs = np.linspace(field.box.x_min, field.box.x_max, 50)
        checks.append(_check("model Fx = finite difference", f"model rho={rho:g}, 50x10 box grid",
                             (abs(field.Fx(x, nu) - _derivative(lambda t: field.F(t, nu), x, 1e-4))
                              for x in xs for nu in nus), 1e-8))

    nu_grid = (0.0, 1e-4, 1e-2, 0.04, 0.1)
    for field in (Field.model(0.0), Field.model(0.3), Field.generic(CUBIC)):
        checks.append(_check("|F(x*)| <= 1e-11 at fixed points", f"{field.label}, nu in {{0,1e-4,1e-2,0.04,0.1}}",
                             (abs(field.F(p.x, nu)) for nu in nu_grid for p in fixed_points(field, nu)),
                             1e-11))
        x1 = fatou_coordinate(field, 0.04).x1
        coeffs = field.taylor_coefficients(x1, 0.04, 2)
        checks.append(_check("Taylor coefficients = Fx, Fxx/2 at x1", f"{field.label}, nu=0.04",
                             [_relative(coeffs[1], field.Fx(x1, 0.04)),
                              _relative(coeffs[2], field.Fxx(x1, 0.04) / 2.0)], 1e-10))

    roots = [p.x for p in fixed_points(Field.generic(CUBIC), 0.04) if p.x > 0.0]
    checks.append(_check("cubic attracting root in (0.2, 0.21)", f"{CUBIC}, nu=0.04",
                         [0.0 if len(roots) == 1 and 0.2 < roots[0] < 0.21 else 1.0], 0.0))
    return checks


# ---------------------------------------------------------------------------
# compensators

def compensator_checks() -> List[Check]:
    checks = []
    uniform = np.linspace(0.0, 1.0, 10_001)[1:]
    log_x = np.geomspace(1e-6, 1.0, 61)
    small_nus = (1e-3, 1e-6, 1e-9)

    for nu in small_nus:
        checks.append(_check("eta_tilde -> sqrt(x) uniformly", f"x in (0,1], 1e4 points, nu={nu:g}",
                             (abs(comp.eta_tilde(x, nu) - math.sqrt(x)) for x in uniform),
                             math.sqrt(nu)))
        checks.append(_check("|omega + log x| / max(1, log^2 x)", f"x in [1e-6,1], nu={nu:g}",
                             (abs(comp.omega(x, nu) + math.log(x)) / max(1.0, math.log(x) ** 2)
                              for x in log_x), 10 * nu))
        checks.append(_check("|alpha - 1/x| x^2", f"x in [1e-6,1], nu={nu:g}",
                             (abs(comp.alpha(x, nu) - 1.0 / x) * x * x for x in log_x), 10 * nu))
        checks.append(_check("|kappa - 1/x| x^2", f"x in [1e-6,1], nu={nu:g}",
                             (abs(comp.kappa(x, nu) - 1.0 / x) * x * x for x in log_x), 10 * nu))
        checks.append(_check("|alpha(x,nu) - alpha(x,0)| x^2", f"x in [1e-6,1], nu={nu:g}",
                             (abs(comp.alpha(x, nu) - comp.alpha(x, 0.0)) * x * x for x in log_x),
                             nu))

    for nu in (0.1, 0.01):
        xs = np.linspace(0.1, 1.0, 50)
        checks.append(_check("alpha = -log omega^-1(1/x)", f"x in [0.1,1], nu={nu:g}",
                             (abs(comp.alpha(x, nu) + math.log(comp.omega_inverse(1.0 / x, nu)))
                              for x in xs), 1e-9))

    xs = np.geomspace(0.1, 1.0, 20)
    for nu in (0.0, 0.01, 0.5):
        grid = f"x in [0.1,1], nu={nu:g}"
        for k in (1, 2, 3):
            checks.append(_check(f"d/dx kappa^{k} = -{k} kappa^{k + 1}", grid,
                                 (_relative(_derivative(lambda t: comp.kappa(t, nu) ** k, x, 1e-4 * x),
                                            -k * comp.kappa(x, nu) ** (k + 1)) for x in xs), 1e-6))
        checks.append(_check("d/dx log(x+nu) = kappa", grid,
                             (_relative(_derivative(lambda t: math.log(t + nu), x, 1e-4 * x),
                                        comp.kappa(x, nu)) for x in xs), 1e-6))
        checks.append(_check("d/dx alpha = -kappa/x", grid,
                             (_relative(_derivative(lambda t: comp.alpha(t, nu), x, 1e-4 * x),
                                        -comp.kappa(x, nu) / x) for x in xs), 1e-6))
        for k in (2, 3):
            checks.append(_check(f"alpha derivative polynomial k={k}", grid,
                                 (_relative(_derivative(lambda t: comp.alpha_derivative(t, nu, k - 1),
                                                        x, 1e-4 * x),
                                            comp.alpha_derivative(x, nu, k)) for x in xs), 1e-6))

    nu = 1e-14
    checks.append(_check("a(nu) series", "nu=1e-14",
                         [abs(comp.a_of(nu) - (1.0 - nu / 2.0 + nu * nu / 6.0))], 1e-12))
    checks.append(_check("a(0) = 1", "nu=0", [abs(comp.a_of(0.0) - 1.0)], 0.0))
    return checks


# ---------------------------------------------------------------------------
# Fatou coordinate and flow

def _model_fatou_checks(rho: float, nu: float) -> List[Check]:
    field = Field.model(rho)
    coord = fatou_coordinate(field, nu)
    x1 = coord.x1
    xs = np.linspace(x1 + 0.01, 1.0, 12)
    grid = f"model rho={rho:g}, nu={nu:g}, x in [x1+0.01,1]"

    def psi(t: float) -> float:
        return coord.value(t)

    checks = [
        _check("Psi' F = 1", grid,
               (abs(_derivative(psi, x, 1e-4 * (x - x1)) * field.F(x, nu) - 1.0) for x in xs), 1e-8),
        _check("Abel: Psi(f(x)) - Psi(x) = 1", grid + " (f by Runge-Kutta)",
               (abs(psi(flow_rk(field, nu, x, 1.0)) - psi(x) - 1.0) for x in xs), 1e-8),
        _check("flow by Fatou = flow by Runge-Kutta", grid + ", t=1",
               (abs(flow(field, nu, x, 1.0) - flow_rk(field, nu, x, 1.0)) for x in xs), 1e-8),
    ]
    times = (0.25, 0.5, 1.0)
    checks.append(_check("group law flow(x,s+t) = flow(flow(x,s),t)", grid + ", s,t in {1/4,1/2,1}",
                         (abs(flow(field, nu, x, s + t) - flow(field, nu, flow(field, nu, x, s), t))
                          for x in xs[::4] for s in times for t in times), 1e-9))

    jet = displacement_jet(field, nu, 3)
    checks.append(_check("c1 = 1 - multiplier", grid, [abs(jet.coeffs[1] - (1.0 - multiplier(field, nu)))],
                         1e-6))
    oracle = variational_jet(field, nu, 3)
    checks.append(_check("jet = variational jet", grid,
                         (abs(a - b) / max(1.0, abs(b)) for a, b in zip(jet.coeffs, oracle.coeffs)),
                         1e-6))

    s = math.sqrt(nu)
    u = 1e-300
    if nu == 0.0:
        checks.append(_check("x Psi(x) -> 1", grid + ", u=1e-9",
                             [abs(1e-9 * coord.value_offset(1e-9) - 1.0)], 1e-6))
    else:
        limit = -1.0 / (2.0 * s) - rho / 2.0
        checks.append(_check("Psi(x)/log(x-x1) -> finite limit", grid + ", u=1e-300",
                             [abs(coord.value_offset(u) / math.log(u) / limit - 1.0)], 1e-2))
    return checks


def _generic_fatou_checks(nu: float) -> List[Check]:
    field = Field.generic(CUBIC)
    coord = fatou_coordinate(field, nu)
    xs = np.linspace(coord.x1 + 0.01, 1.0, 12)
    grid = f"{CUBIC}, nu={nu:g}"
    return [
        _check("Chebyshev table = quadrature", grid,
               (abs(coord.value(x) - fatou_numeric(field, nu, x)) for x in xs), 1e-9),
        _check("Abel: Psi(f(x)) - Psi(x) = 1", grid + " (f by Runge-Kutta)",
               (abs(coord.value(flow_rk(field, nu, x, 1.0)) - coord.value(x) - 1.0) for x in xs), 1e-8),
    ]


def fatou_checks() -> List[Check]:
    checks = []
    for rho in RHOS:
        for nu in FATOU_NUS:
            checks.extend(_model_fatou_checks(rho, nu))
    for nu in (0.0, 0.04):
        checks.extend(_generic_fatou_checks(nu))
    return checks


# ---------------------------------------------------------------------------
# orbit lengths and scaling

def length_checks() -> List[Check]:
    model = Field.model(0.0)
    checks = []

    orbit = generate_orbit(model, 0.0, 1.0, 0.0025)
    n = discrete_critical_index(orbit, 1.0 / 40.0)
    tau = continuous_critical_time(model, 0.0, 1.0, 1.0 / 40.0)
    checks.append(_check("n = 3 at eps = 1/40", "model rho=0, nu=0, x0=1", [abs(n - 3)], 0.0))
    checks.append(_check("tau = 3 at eps = 1/40", "model rho=0, nu=0, x0=1", [abs(tau - 3.0)], 1e-9))

    eps_grid = log_grid(1e-8, 1e-4, 10)
    for nu in (0.0, 1e-4, 1e-2):
        grid = f"model rho=0, nu={nu:g}, eps in [1e-8,1e-4]"
        orbit = generate_orbit(model, nu, 1.0, eps_grid[0] / 10.0)
        measures = neighborhood_measures(orbit, eps_grid)
        checks.append(_check("l - l^c = G(tau) 2 eps", grid,
                             (abs(m.tail_discrete - m.tail_continuous
                                  - sawtooth_G(m.tau_continuous) * 2.0 * m.epsilon) for m in measures),
                             1e-10))
        checks.append(_check("0 <= l - l^c < 2 eps", grid,
                             (max(0.0, m.tail_continuous - m.tail_discrete,
                                  m.tail_discrete - m.tail_continuous - 2.0 * m.epsilon)
                              for m in measures), 0.0))
        checks.append(_check("n = ceil(tau)", grid,
                             (abs(m.n_discrete - math.ceil(m.tau_continuous)) for m in measures), 0.0))
        totals = np.array([m.total_length for m in measures])
        checks.append(_check("total length non-decreasing in eps", grid,
                             np.maximum(-np.diff(totals), 0.0), 0.0))
        checks.append(_check("total length <= points 2 eps", grid,
                             (max(0.0, m.total_length - len(orbit) * 2.0 * m.epsilon) for m in measures),
                             1e-15))
        checks.append(_check("f^tau(x0) - f^(tau+1)(x0) = 2 eps", grid,
                             (abs(flow(model, nu, 1.0, m.tau_continuous)
                                  - flow(model, nu, 1.0, m.tau_continuous + 1.0) - 2.0 * m.epsilon)
                              for m in measures[::10]), 1e-8))

    lengths, _ = orbit_lengths(model, 0.0, 1.0, log_grid(1e-8, 1e-4, 40))
    report = scaling_exponent(lengths, 0.0)
    checks.append(_check("box dimension 1/2 at nu=0", "model rho=0, eps in [1e-8,1e-4]",
                         [abs(report.dim_estimate - 0.5)], 0.05))
    lengths, _ = orbit_lengths(model, 0.01, 1.0, log_grid(1e-10, 1e-7, 40))
    report = scaling_exponent(lengths, 0.01)
    checks.append(_check("box dimension near 0 at nu=0.01", "model rho=0, eps in [1e-10,1e-7]",
                         [max(report.dim_estimate, 0.0)], 0.1))
    rows = content_blowup(model, 1.0, (1e-2, 1e-3, 1e-4), log_grid(1e-9, 1e-7, 20))
    medians = [row.median_proxy for row in rows]
    checks.append(_check("content proxy increases as nu decreases", "nu in {1e-2,1e-3,1e-4}",
                         [sum(1 for a, b in zip(medians, medians[1:]) if not b > a)], 0.0))
    return checks


# ---------------------------------------------------------------------------
# scale fits and multiplicity

def fit_checks() -> List[Check]:
    checks = []
    model = Field.model(0.0)

    nu = 0.01
    fit = fit_scale(eta_samples(model, nu, 1.0, log_grid(1e-8, 1e-3, 40)), 2)
    c1 = -math.expm1(-0.2)
    checks.append(_check("c1 = 1 - exp(-2 sqrt nu)", "model rho=0, nu=0.01, K=2",
                         [_relative(fit.coefficients[1], c1)], 1e-3))
    checks.append(_check("|c0| <= 1e-6 |c1|", "model rho=0, nu=0.01, K=2",
                         [abs(fit.coefficients[0]) / abs(fit.coefficients[1])], 1e-6))

    fields = [Field.model(0.0), Field.model(0.3), Field.generic(CUBIC)]
    eps_grid = log_grid(1e-10, 1e-4, 20)
    for field in fields:
        for nu in (0.0, 1e-4, 1e-2):
            expected = 2 if nu == 0.0 else 1
            fit = fit_scale(eta_samples(field, nu, 1.0, eps_grid), 3)
            report = read_multiplicity(fit, displacement_jet(field, nu, 3))
            checks.append(_check(f"vanish count = {expected}, agrees with jet",
                                 f"{field.label}, nu={nu:g}",
                                 [abs(report.vanish_count - expected) + (0 if report.agree else 1)], 0.0))

    for nu in (0.0, 0.01):
        coord = fatou_coordinate(model, nu)
        samples = eta_samples(model, nu, 1.0, log_grid(1e-8, 1e-4, 2))
        checks.append(_check("l^c = I g(eta + x1)", f"model rho=0, nu={nu:g}",
                             (abs(s.ell_c - s.I_value * displacement(model, nu, coord.x1 + s.eta))
                              for s in samples), 1e-9))

    eps_grid = log_grid(1e-8, 1e-4, 40)
    report = regime_fit(model, 0.0, eps_grid)
    checks.append(_check("sqrt(eps) coefficient = sqrt 2", "model rho=0, nu=0",
                         [abs(report.coefficients["sqrt_eps"] - math.sqrt(2.0))], 0.02))
    report = regime_fit(model, 0.01, eps_grid)
    checks.append(_check("eps log eps coefficient = -1/sqrt(nu)", "model rho=0, nu=0.01",
                         [abs(report.coefficients["eps_log_eps"] + 10.0)], 0.5))

    for nu in (0.0, 1e-6, 1e-4):
        rows = eta_vs_eta_tilde(model, nu, log_grid(1e-10, 1e-8, 5))
        checks.append(_check("eta / eta_tilde -> 1", f"model rho=0, nu={nu:g}, eps in [1e-10,1e-8]",
                             (abs(r.ratio - 1.0) for r in rows), 1e-2))
    return checks


# ---------------------------------------------------------------------------
# continuity of tau across nu = 0

def continuity_checks() -> List[Check]:
    checks = []
    epsilon = 1e-6
    bound = 1.0 / math.sqrt(2.0 * epsilon)
    for rho in (0.0, 0.3):
        result = tau_continuity(Field.model(rho), 1.0, epsilon, CONTINUITY_NUS)
        base = result.taus[result.nus.index(0.0)]
        logger.info("tau continuity constant at rho=%g: %.6g", rho, result.constant)
        checks.append(_check(f"|tau(nu) - tau(0)| <= sqrt(nu/(2 eps)), C = {result.constant:.6g}",
                             f"model rho={rho:g}, x0=1, eps=1e-6, nu in {{1e-16,1e-14,1e-12}}",
                             (abs(t - base) / math.sqrt(nu) for nu, t in zip(result.nus, result.taus)
                              if nu > 0.0), bound))
    return checks


_SUITE_FUNCTIONS: Dict[str, Callable[[], List[Check]]] = {
    "expr": expr_checks,
    "field": field_checks,
    "compensators": compensator_checks,
    "fatou": fatou_checks,
    "lengths": length_checks,
    "fit": fit_checks,
    "continuity": continuity_checks,
}


def run_suite(name: str) -> List[Check]:
    """Run one suite, or all of them for name 'all'"""
    names = SUITES if name == "all" else (name,)
    checks = []
    for suite in names:
        if suite not in _SUITE_FUNCTIONS:
            raise ValueError(f"unknown validation suite {suite!r}")
        logger.info("running %s checks", suite)
        checks.extend(_SUITE_FUNCTIONS[suite]())
    return checks
