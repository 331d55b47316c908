"""Box-dimension and Minkowski-content estimates from epsilon-neighborhood lengths."""

import logging
import math
from dataclasses import dataclass, field as dataclass_field
from typing import Callable, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from .errors import FitError
from .field import Field
from .orbit import generate_orbit, neighborhood_measures

logger = logging.getLogger(__name__)

MIN_POINTS = 10
MIN_EPS_DECADES = 2.0
LOCAL_WINDOW = 5
TRANSITION_SLACK = 0.02

Pairs = Sequence[Tuple[float, float]]


@dataclass(frozen=True)
class ScalingReport:
    nu: float
    slope: float
    dim_estimate: float
    content_proxy: List[Tuple[float, float]]
    local_slopes: List[Tuple[float, float]] = dataclass_field(default_factory=list)
    tail_slope: Optional[float] = None
    tail_dim_estimate: Optional[float] = None
    monotone_transition: bool = True

    def to_row(self) -> dict:
        return {"nu": self.nu, "slope": self.slope, "dim_estimate": self.dim_estimate}


@dataclass(frozen=True)
class ContentRow:
    nu: float
    median_proxy: float
    min_proxy: float
    max_proxy: float

    @property
    def flatness(self) -> float:
        return (self.max_proxy - self.min_proxy) / self.median_proxy

    def to_row(self) -> dict:
        return {"nu": self.nu, "median_proxy": self.median_proxy,
                "min_proxy": self.min_proxy, "max_proxy": self.max_proxy,
                "flatness": self.flatness}


def _log_arrays(lengths: Pairs) -> Tuple[np.ndarray, np.ndarray]:
    if len(lengths) < MIN_POINTS:
        raise FitError(f"insufficient samples: {len(lengths)} < {MIN_POINTS}")
    pairs = sorted(lengths)
    eps = np.array([p[0] for p in pairs], dtype=float)
    ell = np.array([p[1] for p in pairs], dtype=float)
    if np.any(eps <= 0.0) or np.any(ell <= 0.0):
        raise FitError("lengths and epsilons must be positive")
    if math.log10(eps[-1] / eps[0]) < MIN_EPS_DECADES:
        raise FitError("insufficient decade span")
    return np.log(eps), np.log(ell)


def local_slopes(lengths: Pairs, window: int = LOCAL_WINDOW) -> List[Tuple[float, float]]:
    """Slopes of log l against log eps on sliding windows, keyed by the window's geometric-mean eps."""
    pairs = sorted(lengths)
    log_eps = np.log([p[0] for p in pairs])
    log_ell = np.log([p[1] for p in pairs])
    slopes = []
    for i in range(len(pairs) - window + 1):
        xs, ys = log_eps[i:i + window], log_ell[i:i + window]
        slopes.append((float(np.exp(xs.mean())), float(np.polyfit(xs, ys, 1)[0])))
    return slopes


def scaling_exponent(lengths: Pairs, nu: float = math.nan,
                     tail: Optional[Pairs] = None) -> ScalingReport:
    """
    Global log-log slope and dimension estimate 1 - slope.

    Args:
        lengths: (epsilon, length) pairs, at least 10 over two decades
        nu: Parameter value the lengths belong to
        tail: Optional (epsilon, tail length) pairs for the tail-only slope

    Raises:
        FitError: Too few points or too narrow a range of epsilon
    """
    log_eps, log_ell = _log_arrays(lengths)
    slope = float(np.polyfit(log_eps, log_ell, 1)[0])
    dim = 1.0 - slope
    eps = np.exp(log_eps)
    proxy = np.exp(log_ell) / eps ** dim

    slopes = local_slopes(lengths)
    # eps ascending: slopes may only fall as eps grows
    steps = np.diff([s for _, s in slopes])
    monotone = bool(np.all(steps <= TRANSITION_SLACK)) if steps.size else True

    tail_slope = tail_dim = None
    if tail is not None:
        tail_log_eps, tail_log_ell = _log_arrays(tail)
        tail_slope = float(np.polyfit(tail_log_eps, tail_log_ell, 1)[0])
        tail_dim = 1.0 - tail_slope

    if not 0.0 <= slope <= 1.0:
        logger.warning("log-log slope %.4f at nu=%g lies outside [0, 1]", slope, nu)
    return ScalingReport(
        nu=nu,
        slope=slope,
        dim_estimate=dim,
        content_proxy=[(float(e), float(p)) for e, p in zip(eps, proxy)],
        local_slopes=slopes,
        tail_slope=tail_slope,
        tail_dim_estimate=tail_dim,
        monotone_transition=monotone,
    )


def orbit_lengths(field: Field, nu: float, x0: float,
                  eps_grid: Sequence[float]) -> Tuple[List[Tuple[float, float]], List[Tuple[float, float]]]:
    """(epsilon, orbit length) and (epsilon, continuous tail length) along one stored orbit."""
    eps_grid = [float(e) for e in eps_grid]
    orbit = generate_orbit(field, nu, x0, min(eps_grid) / 10.0)
    measures = neighborhood_measures(orbit, eps_grid)
    return ([(m.epsilon, m.orbit_length) for m in measures],
            [(m.epsilon, m.tail_continuous) for m in measures])


def _content_row(task) -> ContentRow:
    field, x0, nu, eps_grid = task
    lengths, _ = orbit_lengths(field, nu, x0, eps_grid)
    proxy = np.array([ell / math.sqrt(eps) for eps, ell in lengths])
    return ContentRow(nu, float(np.median(proxy)), float(proxy.min()), float(proxy.max()))


def content_blowup(field: Field, x0: float, nu_grid: Iterable[float],
                   eps_window: Sequence[float],
                   mapper: Callable = map) -> List[ContentRow]:
    """
    Median of l/sqrt(eps) over the epsilon window, one row per nu.

    ``mapper`` must preserve order; a process pool map can be passed in.
    """
    tasks = [(field, x0, float(nu), tuple(float(e) for e in eps_window)) for nu in nu_grid]
    return list(mapper(_content_row, tasks))
