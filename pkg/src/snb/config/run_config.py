"""
Run configuration: defaults, key=value config files and validation.

Precedence is defaults < config file < command-line flags.
"""

import logging
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Tuple

import numpy as np

from ..core.errors import ConfigError, SnbError
from ..core.fatou import displacement
from ..core.field import AnalysisBox, Field
from .field_presets import get_field_preset

logger = logging.getLogger(__name__)

LOG_LEVELS = ("DEBUG", "INFO", "WARNING", "ERROR")
_FIELD_KEYS = ("model", "field_expr", "preset")


def _floats(text: str) -> Tuple[float, ...]:
    return tuple(float(part) for part in text.split(",") if part.strip())


def _nu_grid(text: str) -> Tuple[float, float, int]:
    parts = [p.strip() for p in text.split(",")]
    if len(parts) != 3:
        raise ValueError("expected a,b,n")
    return float(parts[0]), float(parts[1]), int(parts[2])


def _box(text: str) -> Tuple[float, float]:
    values = _floats(text)
    if len(values) != 2:
        raise ValueError("expected a,b")
    return values


def _flag(text: str) -> bool:
    lowered = text.strip().lower()
    if lowered in ("1", "true", "yes", "on"):
        return True
    if lowered in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


_PARSERS: Dict[str, Callable[[str], Any]] = {
    "model": _flag,
    "field_expr": str,
    "preset": str,
    "rho": _floats,
    "nu": float,
    "nu_grid": _nu_grid,
    "x0": float,
    "eps_min": float,
    "eps_max": float,
    "eps_per_decade": int,
    "eps_window_min": float,
    "eps_window_max": float,
    "degree": int,
    "tol_rel": float,
    "fit_tol": float,
    "gap_floor": float,
    "max_iter": int,
    "x_box": _box,
    "nu_max": float,
    "dump_samples": str,
    "out": str,
    "jobs": int,
    "log_level": lambda text: text.strip().upper(),
}


def parse_setting(key: str, text: str) -> Any:
    """Parse one raw setting; raises ValueError for bad text or KeyError for unknown keys"""
    return _PARSERS[key](text)


@dataclass(frozen=True)
class RunConfig:
    """Everything one snb invocation needs besides the subcommand"""

    model: bool = False
    field_expr: Optional[str] = None
    preset: Optional[str] = None
    rho: Tuple[float, ...] = (0.0,)
    nu: Optional[float] = None
    nu_grid: Optional[Tuple[float, float, int]] = None
    x0: float = 1.0
    eps_min: float = 1e-10
    eps_max: float = 1e-4
    eps_per_decade: int = 40
    eps_window_min: Optional[float] = None
    eps_window_max: Optional[float] = None
    degree: int = 3
    tol_rel: float = 1e-4
    fit_tol: float = 1e-6
    gap_floor: Optional[float] = None
    max_iter: int = 2_000_000
    x_box: Tuple[float, float] = (-0.5, 1.0)
    nu_max: float = 0.1
    dump_samples: Optional[str] = None
    out: Optional[str] = None
    jobs: Optional[int] = None
    log_level: str = "WARNING"

    @classmethod
    def from_sources(cls, file_values: Optional[Dict[str, str]] = None,
                     overrides: Optional[Dict[str, Any]] = None) -> "RunConfig":
        """
        Build a config from raw config-file strings and already-typed overrides.

        Overrides whose value is None are ignored, so unset CLI flags never mask
        file values.
        """
        problems: List[str] = []
        values: Dict[str, Any] = {}
        for key, raw in (file_values or {}).items():
            parser = _PARSERS.get(key)
            if parser is None:
                problems.append(f"{key}: unknown key")
                continue
            try:
                values[key] = parser(raw)
            except ValueError as e:
                problems.append(f"{key}: {e}")
        if problems:
            raise ConfigError(problems)

        overrides = {k: v for k, v in (overrides or {}).items() if v is not None}
        # a field chosen on the command line replaces the one from the file
        if any(overrides.get(k) for k in _FIELD_KEYS):
            for key in _FIELD_KEYS:
                values.pop(key, None)
        values.update(overrides)
        config = cls(**values)
        config.validate()
        return config

    def validate(self):
        """Raise ConfigError listing every invalid field"""
        problems = []
        sources = sum(bool(s) for s in (self.model, self.field_expr, self.preset))
        if sources > 1:
            problems.append("field: give only one of --model, --field-expr or preset")
        if self.preset and get_field_preset(self.preset) is None:
            problems.append(f"preset: unknown preset {self.preset!r}")
        if not all(math.isfinite(r) for r in self.rho):
            problems.append("rho: coefficients must be finite")
        if self.nu is not None and self.nu_grid is not None:
            problems.append("nu: give either --nu or --nu-grid")
        if self.nu is not None and not 0.0 <= self.nu <= self.nu_max:
            problems.append(f"nu: must lie in [0, {self.nu_max}]")
        if self.nu_grid is not None:
            a, b, n = self.nu_grid
            if not (0.0 < a <= b <= self.nu_max) or n < 1:
                problems.append(f"nu_grid: need 0 < a <= b <= {self.nu_max} and n >= 1")
        if not self.x_box[0] < self.x_box[1]:
            problems.append("x_box: need a < b")
        elif not self.x_box[0] < self.x0 <= self.x_box[1]:
            problems.append("x0: must lie inside x_box")
        if self.nu_max < 0.0:
            problems.append("nu_max: must be non-negative")
        if not 0.0 < self.eps_min < self.eps_max:
            problems.append("eps_min: need 0 < eps_min < eps_max")
        if self.eps_per_decade < 1:
            problems.append("eps_per_decade: must be positive")
        window = self.eps_window
        if not 0.0 < window[0] < window[1]:
            problems.append("eps_window: need 0 < min < max")
        if not 0 <= self.degree <= 8:
            problems.append("degree: must lie in 0..8")
        if not self.tol_rel > 0.0:
            problems.append("tol_rel: must be positive")
        if not self.fit_tol > 0.0:
            problems.append("fit_tol: must be positive")
        if self.gap_floor is not None and not self.gap_floor > 0.0:
            problems.append("gap_floor: must be positive")
        if self.max_iter < 1:
            problems.append("max_iter: must be positive")
        if self.jobs is not None and self.jobs < 1:
            problems.append("jobs: must be a positive integer")
        if self.log_level not in LOG_LEVELS:
            problems.append(f"log_level: one of {', '.join(LOG_LEVELS)}")
        if problems:
            raise ConfigError(problems)

    # -- derived values ----------------------------------------------------

    @property
    def box(self) -> AnalysisBox:
        return AnalysisBox(self.x_box[0], self.x_box[1], self.nu_max)

    @property
    def eps_window(self) -> Tuple[float, float]:
        low = self.eps_window_min if self.eps_window_min is not None else self.eps_min
        high = self.eps_window_max if self.eps_window_max is not None else self.eps_max
        return low, high

    @property
    def effective_gap_floor(self) -> float:
        return self.gap_floor if self.gap_floor is not None else self.eps_min / 10.0

    def build_field(self) -> Field:
        if self.preset:
            return get_field_preset(self.preset).build(self.box)
        if self.field_expr:
            return Field.generic(self.field_expr, self.box)
        return Field.model(self.rho, self.box)

    def nus(self) -> List[float]:
        if self.nu_grid is not None:
            a, b, n = self.nu_grid
            return [float(v) for v in np.geomspace(a, b, n)]
        return [self.nu if self.nu is not None else 0.0]

    def eps_grid(self, low: Optional[float] = None, high: Optional[float] = None) -> List[float]:
        return log_grid(low if low is not None else self.eps_min,
                        high if high is not None else self.eps_max,
                        self.eps_per_decade)

    def check_epsilon_range(self, field: Field, nus: List[float]):
        """eps_max < g(x0)/2 for every nu"""
        problems = []
        for nu in nus:
            try:
                limit = 0.5 * displacement(field, nu, self.x0)
            except SnbError as e:
                problems.append(f"x0: {e}")
                continue
            if not self.eps_max < limit:
                problems.append(f"eps_max: must be below g(x0)/2 = {limit:.6g} at nu={nu:g}")
        if problems:
            raise ConfigError(problems)


def log_grid(low: float, high: float, per_decade: int) -> List[float]:
    """Logarithmic grid from low to high with per_decade points per decade"""
    count = max(int(round(math.log10(high / low) * per_decade)) + 1, 2)
    return [float(v) for v in np.geomspace(low, high, count)]


def load_config_file(path) -> Dict[str, str]:
    """
    Read flat key=value lines; '#' starts a comment.

    Keys use the long flag names with '-' replaced by '_'.
    """
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise ConfigError([f"config: cannot read {path}: {e.strerror}"])

    values: Dict[str, str] = {}
    problems = []
    for number, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            problems.append(f"config line {number}: expected key=value")
            continue
        key, value = line.split("=", 1)
        values[key.strip().replace("-", "_")] = value.strip()
    if problems:
        raise ConfigError(problems)
    logger.debug("loaded %d keys from %s", len(values), path)
    return values
