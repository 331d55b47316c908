"""
Fitting the continuous tail length in the scale {I eta^k} and reading the
multiplicity of the fixed point from the vanishing leading coefficients.
"""

import logging
import math
from dataclasses import dataclass
from typing import Callable, Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from .compensators import eta_tilde
from .errors import FieldConfigError, FitError, IllConditionedError
from .fatou import DisplacementJet, displacement_inverse_offset, displacement_jet, fatou_coordinate
from .field import Field
from .orbit import Orbit, discrete_critical_index, sawtooth_G

logger = logging.getLogger(__name__)

CONDITION_LIMIT = 1e12
MIN_ETA_DECADES = 3.0
DEFAULT_TOL_REL = 1e-4
MIXING_RESIDUAL = 1e-3
MIXING_SHARE = 0.1

REGIME_TERMS = ("sqrt_eps", "eps_log_eps", "eps")


@dataclass(frozen=True)
class EtaSample:
    epsilon: float
    eta: float
    I_value: float
    ell_c: float
    n_discrete: Optional[int] = None
    ell: Optional[float] = None

    @property
    def tau(self) -> float:
        return self.I_value

    def to_row(self) -> dict:
        return {"epsilon": self.epsilon, "eta": self.eta, "I": self.I_value,
                "ell_c": self.ell_c, "n_discrete": self.n_discrete, "ell": self.ell}


@dataclass(frozen=True)
class FitResult:
    degrees: Tuple[int, ...]
    coefficients: Tuple[float, ...]
    residual_rms: float
    condition_estimate: float
    max_abs_target: float

    def accepted(self, fit_tol: float) -> bool:
        return self.residual_rms <= fit_tol * self.max_abs_target

    def to_dict(self) -> dict:
        return {"degrees": list(self.degrees), "coefficients": list(self.coefficients),
                "residual_rms": self.residual_rms, "condition": self.condition_estimate}


@dataclass(frozen=True)
class MultiplicityReport:
    vanish_count: int
    tol_rel: float
    jet_vanish_count: int
    agree: bool
    fit_coefficients: Tuple[float, ...] = ()
    jet_coefficients: Tuple[float, ...] = ()

    def to_dict(self) -> dict:
        return {"vanish_count": self.vanish_count, "tol_rel": self.tol_rel,
                "jet_vanish_count": self.jet_vanish_count, "agree": self.agree,
                "fit_coefficients": list(self.fit_coefficients),
                "jet_coefficients": list(self.jet_coefficients)}


@dataclass(frozen=True)
class RegimeReport:
    nu: float
    coefficients: Dict[str, float]
    contributions: Dict[str, float]
    dominant: str
    relative_residual: float
    regime_mixing: bool

    def to_dict(self) -> dict:
        return {"nu": self.nu, "coefficients": dict(self.coefficients),
                "contributions": dict(self.contributions), "dominant": self.dominant,
                "relative_residual": self.relative_residual,
                "regime_mixing": self.regime_mixing}


# ---------------------------------------------------------------------------
# Samples

def eta_of(field: Field, nu: float, epsilon: float) -> float:
    """eta = g^-1(2 epsilon) - x1."""
    coord = fatou_coordinate(field, nu)
    return displacement_inverse_offset(coord, 2.0 * epsilon)


def I_empirical(field: Field, nu: float, eta: float, x0: float) -> float:
    """I = Psi(x1 + eta) - Psi(x0)."""
    coord = fatou_coordinate(field, nu)
    return coord.value_offset(eta) - coord.value(x0)


def eta_samples(field: Field, nu: float, x0: float, eps_grid: Iterable[float],
                orbit: Optional[Orbit] = None) -> List[EtaSample]:
    """
    One sample per epsilon, with eta searched on (0, x0 - x1].

    When an orbit is given the discrete index and the standard length are
    filled in as well.
    """
    coord = fatou_coordinate(field, nu)
    u0 = x0 - coord.x1
    psi0 = coord.value_offset(u0)
    samples = []
    for epsilon in eps_grid:
        epsilon = float(epsilon)
        eta = displacement_inverse_offset(coord, 2.0 * epsilon, u_max=u0)
        I_value = coord.value_offset(eta) - psi0
        n = ell = None
        if orbit is not None:
            n = discrete_critical_index(orbit, epsilon)
            ell = 2.0 * epsilon * n
        samples.append(EtaSample(epsilon, eta, I_value, 2.0 * epsilon * I_value, n, ell))
    return samples


# ---------------------------------------------------------------------------
# Fits

def _solve_scaled(design: np.ndarray, target: np.ndarray) -> Tuple[np.ndarray, float]:
    """Least squares on unit-norm columns; returns unscaled coefficients and the condition."""
    norms = np.linalg.norm(design, axis=0)
    if np.any(norms == 0.0) or not np.all(np.isfinite(norms)):
        raise FitError("degenerate design column")
    scaled, _, _, singular = np.linalg.lstsq(design / norms, target, rcond=None)
    condition = float(singular[0] / singular[-1]) if singular[-1] > 0.0 else math.inf
    if condition > CONDITION_LIMIT:
        raise IllConditionedError(condition, CONDITION_LIMIT)
    return scaled / norms, condition


def _scale_fit(samples: Sequence[EtaSample], target: np.ndarray, degree: int) -> FitResult:
    if degree < 0:
        raise FitError(f"degree must be non-negative, got {degree}")
    if len(samples) < 3 * (degree + 1):
        raise FitError(f"insufficient samples: {len(samples)} < {3 * (degree + 1)}")
    etas = np.array([s.eta for s in samples])
    if math.log10(etas.max() / etas.min()) < MIN_ETA_DECADES:
        raise FitError("insufficient decade span of eta")

    I_values = np.array([s.I_value for s in samples])
    design = I_values[:, None] * etas[:, None] ** np.arange(degree + 1)
    coefficients, condition = _solve_scaled(design, target)
    residual = design @ coefficients - target
    result = FitResult(
        degrees=tuple(range(degree + 1)),
        coefficients=tuple(float(c) for c in coefficients),
        residual_rms=float(np.sqrt(np.mean(residual ** 2))),
        condition_estimate=condition,
        max_abs_target=float(np.max(np.abs(target))),
    )
    logger.debug("scale fit K=%d: rms %.3g, condition %.3g", degree, result.residual_rms, condition)
    return result


def fit_scale(samples: Sequence[EtaSample], degree: int) -> FitResult:
    """
    Ordinary least squares of ell_c against the columns I eta^k, k = 0..degree.

    Raises:
        FitError: Fewer than 3(K+1) samples or eta spans less than three decades
        IllConditionedError: Condition of the scaled design above 1e12
    """
    return _scale_fit(samples, np.array([s.ell_c for s in samples]), degree)


def fit_standard_length(samples: Sequence[EtaSample], degree: int) -> FitResult:
    """
    Fit the standard length n 2 epsilon after removing the exact sawtooth
    correction G(tau) 2 epsilon.
    """
    if any(s.ell is None for s in samples):
        raise FitError("standard-length fit needs samples taken along an orbit")
    target = np.array([s.ell - sawtooth_G(max(s.tau, 0.0)) * 2.0 * s.epsilon for s in samples])
    return _scale_fit(samples, target, degree)


def vanish_count(coefficients: Sequence[float], tol_rel: float) -> int:
    """Length of the leading run of coefficients below tol_rel times the largest."""
    values = np.abs(np.asarray(coefficients, dtype=float))
    if values.size == 0:
        return 0
    threshold = tol_rel * values.max()
    count = 0
    for value in values:
        if value > threshold:
            break
        count += 1
    return count


def read_multiplicity(fit: FitResult, jet: DisplacementJet,
                      tol_rel: float = DEFAULT_TOL_REL) -> MultiplicityReport:
    fit_count = vanish_count(fit.coefficients, tol_rel)
    jet_count = vanish_count(jet.coeffs, tol_rel)
    return MultiplicityReport(fit_count, tol_rel, jet_count, fit_count == jet_count,
                              tuple(fit.coefficients), tuple(jet.coeffs))


# ---------------------------------------------------------------------------
# Asymptotic comparisons

@dataclass(frozen=True)
class EtaRatio:
    epsilon: float
    nu: float
    eta: float
    eta_tilde: float

    @property
    def ratio(self) -> float:
        return self.eta / self.eta_tilde


def eta_vs_eta_tilde(field: Field, nu: float, eps_grid: Iterable[float]) -> List[EtaRatio]:
    """
    eta(2 eps, nu) against the square-root compensator eta_tilde(2 eps/C0, r^2),
    C0 = c2 of the jet at nu = 0 and r = c1(nu)/(2 C0).

    eta_tilde(2 eps/C0, r^2) = sqrt(r^2 + 2 eps/C0) - r is the exact inverse of
    the quadratic truncation c1 eta + C0 eta^2 = 2 eps.
    """
    if not field.is_model:
        raise FieldConfigError("eta_vs_eta_tilde is defined for the model family")
    C0 = displacement_jet(field, 0.0, 2).coeffs[2]
    coord = fatou_coordinate(field, nu)
    c1 = -math.expm1(field.Fx(coord.x1, nu))
    r = c1 / (2.0 * C0)
    rows = []
    for epsilon in eps_grid:
        epsilon = float(epsilon)
        eta = displacement_inverse_offset(coord, 2.0 * epsilon)
        rows.append(EtaRatio(epsilon, nu, eta, eta_tilde(2.0 * epsilon / C0, r * r)))
    return rows


def regime_fit(field: Field, nu: float, eps_grid: Sequence[float], x0: float = 1.0) -> RegimeReport:
    """
    Least squares of ell_c against sqrt(eps), eps log eps and eps.

    The dominant term has the largest contribution at the smallest epsilon.
    Regime mixing is flagged when the relative residual exceeds 1e-3 or when
    the sqrt(eps) and eps log eps contributions are within a factor ten.
    """
    eps = np.sort(np.asarray(eps_grid, dtype=float))
    if eps.size < 2 * len(REGIME_TERMS):
        raise FitError(f"insufficient samples: {eps.size} < {2 * len(REGIME_TERMS)}")
    target = np.array([s.ell_c for s in eta_samples(field, nu, x0, eps)])
    design = np.column_stack([np.sqrt(eps), eps * np.log(eps), eps])
    coefficients, _ = _solve_scaled(design, target)
    residual = design @ coefficients - target
    relative = float(np.linalg.norm(residual) / np.linalg.norm(target))

    at_min = np.abs(design[0] * coefficients)
    contributions = {name: float(value) for name, value in zip(REGIME_TERMS, at_min)}
    dominant = REGIME_TERMS[int(np.argmax(at_min))]
    leading = sorted((contributions["sqrt_eps"], contributions["eps_log_eps"]))
    mixing = relative > MIXING_RESIDUAL or leading[0] > MIXING_SHARE * leading[1]
    return RegimeReport(
        nu=nu,
        coefficients={name: float(c) for name, c in zip(REGIME_TERMS, coefficients)},
        contributions=contributions,
        dominant=dominant,
        relative_residual=relative,
        regime_mixing=bool(mixing),
    )
