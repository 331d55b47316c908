"""
Vector field families F(x, nu) near a saddle-node point.

Two variants share one interface: the model family
F(x, nu) = (-x^2 + nu) / (1 + rho(nu) x) with closed-form partial derivatives,
and generic families given as parsed expressions, differentiated symbolically.
"""

import logging
import math
from dataclasses import dataclass, field as dataclass_field
from typing import Callable, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.optimize import brentq

from .errors import DomainError, FieldConfigError, NoRootError
from .expr_parser import FieldExpr, differentiate, evaluate, evaluate_array, parse

logger = logging.getLogger(__name__)

GENERICITY_TOL = 1e-9
ROOT_TOL = 1e-11
DOUBLE_ROOT_FX_TOL = 1e-7
SCAN_CELLS = 10_000
JET_ORDER_MAX = 4

_EPS = float(np.finfo(float).eps)


@dataclass(frozen=True)
class AnalysisBox:
    """x-interval times nu-interval [0, nu_max] the analysis is confined to."""

    x_min: float = -0.5
    x_max: float = 1.0
    nu_max: float = 0.1

    def __post_init__(self):
        if not (self.x_min < self.x_max):
            raise FieldConfigError(f"empty x-interval [{self.x_min}, {self.x_max}]")
        if self.nu_max < 0.0:
            raise FieldConfigError(f"nu_max must be non-negative, got {self.nu_max}")

    def check_nu(self, nu: float):
        if not (0.0 <= nu <= self.nu_max):
            raise DomainError(f"nu={nu!r} outside [0, {self.nu_max}]")

    def check_x(self, x: float):
        if not (self.x_min <= x <= self.x_max):
            raise DomainError(f"x={x!r} outside [{self.x_min}, {self.x_max}]")


@dataclass(frozen=True)
class ModelParams:
    """Polynomial coefficients of rho(nu) = rho0 + rho1 nu + ..."""

    rho_coeffs: Tuple[float, ...] = (0.0,)

    def __post_init__(self):
        coeffs = tuple(float(c) for c in self.rho_coeffs) or (0.0,)
        if not all(math.isfinite(c) for c in coeffs):
            raise FieldConfigError(f"rho coefficients must be finite, got {coeffs}")
        object.__setattr__(self, "rho_coeffs", coeffs)

    def rho(self, nu: float) -> float:
        value = 0.0
        for c in reversed(self.rho_coeffs):
            value = value * nu + c
        return value

    def drho(self, nu: float) -> float:
        value = 0.0
        for k in range(len(self.rho_coeffs) - 1, 0, -1):
            value = value * nu + k * self.rho_coeffs[k]
        return value


@dataclass(frozen=True)
class FixedPoint:
    x: float
    multiplicity: int = 1


@dataclass(frozen=True)
class GenericityReport:
    F00: float
    Fx00: float
    Fnu00: float
    Fxx00: float
    passes: bool

    def to_dict(self) -> dict:
        return {"F00": self.F00, "Fx00": self.Fx00, "Fnu00": self.Fnu00,
                "Fxx00": self.Fxx00, "passes": self.passes}

    def failures(self) -> List[str]:
        """Names of the conditions that do not hold; NaN values fail every condition."""
        checks = (
            ("F(0,0) = 0", abs(self.F00) <= GENERICITY_TOL),
            ("Fx(0,0) = 0", abs(self.Fx00) <= GENERICITY_TOL),
            ("Fnu(0,0) != 0", abs(self.Fnu00) > GENERICITY_TOL),
            ("Fxx(0,0) != 0", abs(self.Fxx00) > GENERICITY_TOL),
        )
        return [name for name, holds in checks if not holds]


@dataclass(frozen=True)
class Field:
    """
    A one-parameter family of 1-D vector fields.

    Build instances with :meth:`Field.model` or :meth:`Field.generic`.
    """

    variant: Union[ModelParams, FieldExpr]
    box: AnalysisBox = AnalysisBox()
    label: str = ""
    _derivs: Tuple[FieldExpr, ...] = dataclass_field(default=(), repr=False, compare=False)
    _dnu: Optional[FieldExpr] = dataclass_field(default=None, repr=False, compare=False)

    def __post_init__(self):
        if self.is_model:
            self._check_denominator()
            return
        chain = [self.variant]
        for _ in range(JET_ORDER_MAX):
            chain.append(differentiate(chain[-1], "x"))
        object.__setattr__(self, "_derivs", tuple(chain))
        object.__setattr__(self, "_dnu", differentiate(self.variant, "nu"))

    @classmethod
    def model(cls, rho: Union[float, Sequence[float]] = 0.0,
              box: AnalysisBox = AnalysisBox()) -> "Field":
        coeffs = (rho,) if isinstance(rho, (int, float)) else tuple(rho)
        params = ModelParams(coeffs)
        label = "model rho=" + ",".join(repr(c) for c in params.rho_coeffs)
        return cls(params, box, label)

    @classmethod
    def generic(cls, expr: Union[str, FieldExpr],
                box: AnalysisBox = AnalysisBox()) -> "Field":
        parsed = parse(expr) if isinstance(expr, str) else expr
        return cls(parsed, box, str(parsed))

    @property
    def is_model(self) -> bool:
        return isinstance(self.variant, ModelParams)

    def _check_denominator(self):
        params: ModelParams = self.variant
        nus = np.linspace(0.0, self.box.nu_max, 257)
        rhos = np.array([params.rho(nu) for nu in nus])
        if not np.all(np.isfinite(rhos)):
            raise FieldConfigError("rho(nu) is not finite on [0, nu_max]")
        lowest = min(np.min(1.0 + rhos * self.box.x_min), np.min(1.0 + rhos * self.box.x_max))
        if lowest <= 0.0:
            raise FieldConfigError(
                f"1 + rho(nu) x vanishes on the analysis box (min {lowest:.3g})"
            )

    # -- values and partial derivatives ------------------------------------

    def F(self, x: float, nu: float) -> float:
        if self.is_model:
            return (nu - x * x) / (1.0 + self.variant.rho(nu) * x)
        return evaluate(self.variant, x, nu)

    def Fx(self, x: float, nu: float) -> float:
        if self.is_model:
            rho = self.variant.rho(nu)
            d = 1.0 + rho * x
            return -(2.0 * x + rho * x * x + rho * nu) / (d * d)
        return evaluate(self._derivs[1], x, nu)

    def Fnu(self, x: float, nu: float) -> float:
        if self.is_model:
            params: ModelParams = self.variant
            d = 1.0 + params.rho(nu) * x
            return 1.0 / d - (nu - x * x) * params.drho(nu) * x / (d * d)
        return evaluate(self._dnu, x, nu)

    def Fxx(self, x: float, nu: float) -> float:
        if self.is_model:
            rho = self.variant.rho(nu)
            d = 1.0 + rho * x
            p = -(2.0 * x + rho * x * x + rho * nu)
            dp = -(2.0 + 2.0 * rho * x)
            return (dp * d - 2.0 * rho * p) / d ** 3
        return evaluate(self._derivs[2], x, nu)

    def F_array(self, x, nu: float) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if self.is_model:
            return (nu - x * x) / (1.0 + self.variant.rho(nu) * x)
        return evaluate_array(self.variant, x, nu)

    def Fx_array(self, x, nu: float) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if self.is_model:
            rho = self.variant.rho(nu)
            d = 1.0 + rho * x
            return -(2.0 * x + rho * x * x + rho * nu) / (d * d)
        return evaluate_array(self._derivs[1], x, nu)

    def offset_function(self, nu: float, x1: float) -> Callable[[np.ndarray], np.ndarray]:
        """
        u -> F(x1 + u, nu) for arrays of offsets from a fixed point.

        For the model at its attracting point the numerator is factored as
        -u (2 sqrt(nu) + u), which keeps full relative precision as u -> 0.
        """
        if self.is_model and x1 == math.sqrt(nu):
            rho = self.variant.rho(nu)
            s = x1

            def model_offset(u):
                u = np.asarray(u, dtype=float)
                return -u * (2.0 * s + u) / (1.0 + rho * (s + u))
            return model_offset

        def generic_offset(u):
            return self.F_array(x1 + np.asarray(u, dtype=float), nu)
        return generic_offset

    def taylor_coefficients(self, x1: float, nu: float, order: int) -> List[float]:
        """Coefficients a_k with F(x1 + u) = sum a_k u^k, k = 0..order."""
        if order > JET_ORDER_MAX:
            raise ValueError(f"order must be <= {JET_ORDER_MAX}")
        if self.is_model:
            rho = self.variant.rho(nu)
            numerator = [nu - x1 * x1, -2.0 * x1, -1.0] + [0.0] * order
            d0 = 1.0 + rho * x1
            coeffs = []
            for k in range(order + 1):
                previous = coeffs[k - 1] if k > 0 else 0.0
                coeffs.append((numerator[k] - rho * previous) / d0)
            return coeffs
        return [evaluate(self._derivs[k], x1, nu) / math.factorial(k)
                for k in range(order + 1)]


# ---------------------------------------------------------------------------
# Genericity and fixed points

def genericity_check(field: Field) -> GenericityReport:
    """Check F = Fx = 0, Fnu != 0, Fxx != 0 at the origin; never raises."""
    try:
        values = (field.F(0.0, 0.0), field.Fx(0.0, 0.0),
                  field.Fnu(0.0, 0.0), field.Fxx(0.0, 0.0))
    except DomainError as exc:
        logger.warning("genericity check of %s failed to evaluate: %s", field.label, exc)
        nan = float("nan")
        return GenericityReport(nan, nan, nan, nan, False)

    report = GenericityReport(*values, passes=True)
    return GenericityReport(*values, passes=not report.failures())


def _refine(fn: Callable[[float], float], lo: float, hi: float) -> float:
    return brentq(fn, lo, hi, xtol=1e-15, rtol=4 * _EPS, maxiter=200)


def _polish(fn: Callable[[float], float], dfn: Callable[[float], float], x: float) -> float:
    for _ in range(2):
        slope = dfn(x)
        if slope == 0.0:
            break
        candidate = x - fn(x) / slope
        if abs(fn(candidate)) <= abs(fn(x)):
            x = candidate
        else:
            break
    return x


def _scan_roots(field: Field, nu: float) -> List[FixedPoint]:
    box = field.box
    xs = np.linspace(box.x_min, box.x_max, SCAN_CELLS + 1)
    fs = field.F_array(xs, nu)
    dfs = field.Fx_array(xs, nu)

    def F(x):
        return field.F(x, nu)

    def Fx(x):
        return field.Fx(x, nu)

    def Fxx(x):
        return field.Fxx(x, nu)

    def classify(x: float) -> FixedPoint:
        if abs(Fx(x)) <= DOUBLE_ROOT_FX_TOL:
            return FixedPoint(_polish(Fx, Fxx, x), 2)
        return FixedPoint(_polish(F, Fx, x), 1)

    found: List[FixedPoint] = []
    for i in np.flatnonzero(fs == 0.0):
        found.append(classify(float(xs[i])))

    for i in np.flatnonzero(fs[:-1] * fs[1:] < 0.0):
        found.append(classify(_refine(F, xs[i], xs[i + 1])))

    # extrema of F: double roots and root pairs hidden inside one cell
    for i in np.flatnonzero(dfs[:-1] * dfs[1:] < 0.0):
        if fs[i] * fs[i + 1] < 0.0:
            continue
        x_star = _polish(Fx, Fxx, _refine(Fx, xs[i], xs[i + 1]))
        f_star = F(x_star)
        if abs(f_star) <= ROOT_TOL and abs(Fx(x_star)) <= DOUBLE_ROOT_FX_TOL:
            found.append(FixedPoint(x_star, 2))
        elif fs[i] != 0.0 and np.sign(f_star) == -np.sign(fs[i]) and fs[i] * fs[i + 1] > 0.0:
            found.append(classify(_refine(F, xs[i], x_star)))
            found.append(classify(_refine(F, x_star, xs[i + 1])))

    found.sort(key=lambda p: p.x)
    unique: List[FixedPoint] = []
    for point in found:
        if unique and abs(point.x - unique[-1].x) <= 1e-10:
            if point.multiplicity > unique[-1].multiplicity:
                unique[-1] = point
            continue
        unique.append(point)
    return [p for p in unique if abs(F(p.x)) <= ROOT_TOL]


def fixed_points(field: Field, nu: float) -> List[FixedPoint]:
    """
    All zeros of F(., nu) in the x-interval of the box, sorted.

    Raises:
        DomainError: nu outside [0, nu_max]
        NoRootError: The scan finds no root
    """
    field.box.check_nu(nu)
    box = field.box
    if field.is_model:
        s = math.sqrt(nu)
        candidates = [FixedPoint(0.0, 2)] if nu == 0.0 else [FixedPoint(-s), FixedPoint(s)]
        points = [p for p in candidates if box.x_min <= p.x <= box.x_max]
    else:
        points = _scan_roots(field, nu)
    if not points:
        raise NoRootError(nu, (box.x_min, box.x_max))
    return points


def attracting_fixed_point(field: Field, nu: float) -> FixedPoint:
    """
    The right-most root with Fx < 0, or the parabolic double root at nu = 0.

    Orbits started to its right converge to it monotonically.
    """
    candidates = [p for p in fixed_points(field, nu)
                  if p.multiplicity == 2 or field.Fx(p.x, nu) < 0.0]
    if not candidates:
        raise NoRootError(nu, (field.box.x_min, field.box.x_max))
    return candidates[-1]
