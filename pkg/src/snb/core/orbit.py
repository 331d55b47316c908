"""
Orbits of the time-one map and the geometry of their epsilon-neighborhoods.

Orbits are generated as x_n = Psi^-1(Psi(x0) + n) for whole blocks of n at
once, so no error accumulates along the orbit. Lengths are computed in offset
coordinates u = x - x1.
"""

import logging
import math
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .errors import DomainError, OrbitTooShortError
from .fatou import FatouCoordinate, displacement_inverse_offset, fatou_coordinate
from .field import Field

logger = logging.getLogger(__name__)

GAP_BELOW_FLOOR = "gap_below_floor"
MAX_ITERATIONS = "max_iterations"

DEFAULT_MAX_ITER = 2_000_000
SPOT_CHECK_TOL = 1e-10
_FIRST_BLOCK = 1024
_MAX_BLOCK = 1 << 18


@dataclass(frozen=True, eq=False)
class Orbit:
    """
    Stored forward orbit x_0 = x0 > x_1 > ... > x_M of the time-one map.

    ``gaps[n]`` is x_n - x_{n+1} for every stored n, the last one reaching the
    first unstored iterate.
    """

    field: Field
    nu: float
    x0: float
    x1: float
    offsets: np.ndarray
    gaps: np.ndarray
    stop_reason: str

    @property
    def points(self) -> np.ndarray:
        points = self.x1 + self.offsets
        points[0] = self.x0
        return points

    def __len__(self) -> int:
        return len(self.offsets)


@dataclass(frozen=True)
class NeighborhoodMeasure:
    epsilon: float
    nu: float
    n_discrete: int
    tau_continuous: float
    tail_discrete: float
    tail_continuous: float
    total_length: float
    orbit_length: float
    eta: float

    def to_row(self) -> dict:
        return {
            "epsilon": self.epsilon,
            "nu": self.nu,
            "n_discrete": self.n_discrete,
            "tau": self.tau_continuous,
            "tail_discrete": self.tail_discrete,
            "tail_continuous": self.tail_continuous,
            "total_length": self.total_length,
        }


@dataclass(frozen=True)
class TauContinuity:
    nus: Tuple[float, ...]
    taus: Tuple[float, ...]
    constant: float


def generate_orbit(field: Field, nu: float, x0: float, gap_floor: float,
                   max_iter: int = DEFAULT_MAX_ITER) -> Orbit:
    """
    Iterate the time-one map from x0 until a gap drops below gap_floor.

    Args:
        field: Field family
        nu: Parameter value
        x0: Start point, right of the attracting fixed point
        gap_floor: Stop once x_n - x_{n+1} < gap_floor
        max_iter: Upper bound on the number of stored points

    Returns:
        Orbit with its stop reason
    """
    if not gap_floor > 0.0:
        raise DomainError(f"gap_floor must be positive, got {gap_floor!r}")
    if max_iter < 1:
        raise DomainError(f"max_iter must be at least 1, got {max_iter!r}")
    field.box.check_x(x0)
    coord = fatou_coordinate(field, nu)
    u0 = x0 - coord.x1
    if not u0 > 0.0:
        raise DomainError(f"x0={x0!r} must lie right of the attracting fixed point {coord.x1!r}")
    psi0 = coord.value_offset(u0)

    chunks: List[np.ndarray] = []
    gap_chunks: List[np.ndarray] = []
    stop_reason = MAX_ITERATIONS
    start, block, stored = 0, _FIRST_BLOCK, 0
    last = u0
    while stored < max_iter:
        count = min(block, max_iter - stored)
        n = np.arange(start + 1, start + count + 1, dtype=float)
        following = coord.inverse_offset(psi0 + n, last)
        current = np.concatenate(([last], following[:-1]))
        gaps = current - following
        below = np.flatnonzero(gaps < gap_floor)
        if below.size:
            end = below[0] + 1
            chunks.append(current[:end])
            gap_chunks.append(gaps[:end])
            stop_reason = GAP_BELOW_FLOOR
            break
        chunks.append(current)
        gap_chunks.append(gaps)
        stored += count
        start += count
        last = following[-1]
        block = min(2 * block, _MAX_BLOCK)

    offsets = np.concatenate(chunks)
    orbit_gaps = np.concatenate(gap_chunks)
    offsets[0] = u0
    logger.debug("orbit of %s at nu=%g: %d points (%s)", field.label, nu, len(offsets), stop_reason)
    _spot_check(coord, offsets, orbit_gaps)
    return Orbit(field, nu, x0, coord.x1, offsets, orbit_gaps, stop_reason)


def _spot_check(coord: FatouCoordinate, offsets: np.ndarray, gaps: np.ndarray):
    """Compare a few stored steps against the scalar time-one map."""
    for i in sorted({0, len(offsets) // 2, len(offsets) - 1}):
        expected = offsets[i] - gaps[i]
        actual = coord.flow_offset(float(offsets[i]), 1.0)
        if abs(actual - expected) > SPOT_CHECK_TOL:
            logger.warning("orbit step %d deviates from the time-one map by %.3g",
                           i, abs(actual - expected))


def discrete_critical_index(orbit: Orbit, epsilon: float) -> int:
    """
    First n with x_n - x_{n+1} <= 2 epsilon.

    Raises:
        OrbitTooShortError: No stored gap reaches 2 epsilon
    """
    hits = np.flatnonzero(orbit.gaps <= 2.0 * epsilon)
    if hits.size == 0:
        raise OrbitTooShortError(f"orbit too short for epsilon={epsilon!r}")
    return int(hits[0])


def _critical_offset(coord: FatouCoordinate, u0: float, epsilon: float) -> float:
    return displacement_inverse_offset(coord, 2.0 * epsilon, u_max=u0)


def continuous_critical_time(field: Field, nu: float, x0: float, epsilon: float) -> float:
    """tau = Psi(g^-1(2 epsilon)) - Psi(x0)."""
    coord = fatou_coordinate(field, nu)
    u0 = x0 - coord.x1
    eta = _critical_offset(coord, u0, epsilon)
    return coord.value_offset(eta) - coord.value_offset(u0)


def sawtooth_G(s: float) -> float:
    """Period-one sawtooth with G(s) = 1 - s on (0, 1) and G(0) = 0."""
    if s < 0.0:
        raise DomainError(f"G is defined for s >= 0, got {s!r}")
    frac = s - math.floor(s)
    return 0.0 if frac == 0.0 else 1.0 - frac


def union_length(offsets: np.ndarray, epsilon: float,
                 extra: Optional[Tuple[float, float]] = None) -> float:
    """Measure of the union of [u - eps, u + eps] over offsets, plus an optional interval."""
    starts = np.sort(np.asarray(offsets, dtype=float)) - epsilon
    ends = starts + 2.0 * epsilon
    if extra is not None:
        starts = np.append(starts, extra[0])
        ends = np.append(ends, extra[1])
        order = np.argsort(starts, kind="stable")
        starts, ends = starts[order], ends[order]
    reach = np.maximum.accumulate(ends)
    covered_to = np.concatenate(([-np.inf], reach[:-1]))
    return float(np.sum(np.clip(ends - np.maximum(starts, covered_to), 0.0, None)))


def neighborhood_measure(orbit: Orbit, epsilon: float) -> NeighborhoodMeasure:
    """Critical times and lengths of one stored orbit at one epsilon."""
    if not epsilon > 0.0:
        raise DomainError(f"epsilon must be positive, got {epsilon!r}")
    coord = fatou_coordinate(orbit.field, orbit.nu)
    u0 = orbit.x0 - orbit.x1
    n = discrete_critical_index(orbit, epsilon)
    eta = _critical_offset(coord, u0, epsilon)
    tau = coord.value_offset(eta) - coord.value_offset(u0)
    last = float(orbit.offsets[-1])
    return NeighborhoodMeasure(
        epsilon=epsilon,
        nu=orbit.nu,
        n_discrete=n,
        tau_continuous=tau,
        tail_discrete=2.0 * epsilon * n,
        tail_continuous=2.0 * epsilon * tau,
        total_length=union_length(orbit.offsets, epsilon),
        orbit_length=union_length(orbit.offsets, epsilon, (-epsilon, last + epsilon)),
        eta=eta,
    )


def tail_lengths(field: Field, nu: float, x0: float, epsilon: float,
                 orbit: Optional[Orbit] = None) -> NeighborhoodMeasure:
    """
    Tail and total lengths of the epsilon-neighborhood of the orbit of x0.

    An orbit stored down to gap epsilon/10 is generated unless one is given.
    """
    if orbit is None:
        orbit = generate_orbit(field, nu, x0, epsilon / 10.0)
    return neighborhood_measure(orbit, epsilon)


def neighborhood_measures(orbit: Orbit, eps_grid: Sequence[float]) -> List[NeighborhoodMeasure]:
    return [neighborhood_measure(orbit, float(eps)) for eps in eps_grid]


def tau_continuity(field: Field, x0: float, epsilon: float,
                   nus: Sequence[float] = (0.0, 1e-6, 1e-4)) -> TauContinuity:
    """
    Continuous critical times along nus and the constant C of the
    least-squares fit |tau(nu) - tau(0)| ~ C sqrt(nu).
    """
    nus = tuple(float(nu) for nu in nus)
    if 0.0 not in nus:
        nus = (0.0,) + nus
    taus = tuple(continuous_critical_time(field, nu, x0, epsilon) for nu in nus)
    base = taus[nus.index(0.0)]
    roots = np.array([math.sqrt(nu) for nu in nus if nu > 0.0])
    drift = np.array([abs(t - base) for nu, t in zip(nus, taus) if nu > 0.0])
    constant = float(np.dot(roots, drift) / np.dot(roots, roots)) if roots.size else 0.0
    return TauContinuity(nus, taus, constant)
