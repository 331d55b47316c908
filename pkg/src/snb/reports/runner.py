"""Subcommand execution: computes the reports behind each snb command"""

import logging
import sys
from typing import Any, Callable, Dict, List, Optional, TextIO, Tuple

from ..config.field_presets import detect_preset_from_expression
from ..config.run_config import RunConfig
from ..core.errors import GenericityError
from ..core.fatou import JET_ORDER_MAX, displacement_jet
from ..core.field import Field, genericity_check
from ..core.orbit import generate_orbit, neighborhood_measures
from ..core.scale_fit import (eta_samples, fit_scale, fit_standard_length, read_multiplicity,
                              regime_fit)
from ..core.scaling import content_blowup, orbit_lengths, scaling_exponent
from ..utils.runtime import ordered_map, resolve_jobs
from .validate import run_suite
from .writers import Table, emit

logger = logging.getLogger(__name__)

COMMANDS = ("orbit", "lengths", "fit", "multiplicity", "boxdim", "sweep", "validate")
LENGTH_COLUMNS = ["epsilon", "nu", "n_discrete", "tau", "tail_discrete", "tail_continuous",
                  "total_length"]
SAMPLE_COLUMNS = ["nu", "epsilon", "eta", "I", "ell_c", "n_discrete", "ell"]


# Grid tasks live at module level so a process pool can pickle them.

def _orbit_rows(task) -> List[Dict[str, Any]]:
    field, nu, x0, gap_floor, max_iter = task
    orbit = generate_orbit(field, nu, x0, gap_floor, max_iter)
    return [{"nu": nu, "n": n, "x": x, "offset": u, "gap": gap}
            for n, (x, u, gap) in enumerate(zip(orbit.points, orbit.offsets, orbit.gaps))]


def _length_rows(task) -> List[Dict[str, Any]]:
    field, nu, x0, eps_grid, gap_floor, max_iter = task
    orbit = generate_orbit(field, nu, x0, gap_floor, max_iter)
    return [m.to_row() for m in neighborhood_measures(orbit, eps_grid)]


def _boxdim_row(task) -> Dict[str, Any]:
    field, nu, x0, eps_grid = task
    lengths, tail = orbit_lengths(field, nu, x0, eps_grid)
    return scaling_exponent(lengths, nu, tail).to_row()


def _fit_report(task) -> Tuple[Dict[str, Any], List[Dict[str, Any]]]:
    field, nu, config = task
    eps_grid = config.eps_grid()
    orbit = generate_orbit(field, nu, config.x0, config.effective_gap_floor, config.max_iter)
    samples = eta_samples(field, nu, config.x0, eps_grid, orbit)
    fit = fit_scale(samples, config.degree)
    report = fit.to_dict()
    report.update(nu=nu, degree=config.degree, accepted=fit.accepted(config.fit_tol))
    report["standard_length"] = fit_standard_length(samples, config.degree).to_dict()
    report["regime"] = regime_fit(field, nu, eps_grid, config.x0).to_dict()
    return report, [dict(s.to_row(), nu=nu) for s in samples]


def _multiplicity_report(task) -> Dict[str, Any]:
    field, nu, config = task
    order = min(max(config.degree, 1), JET_ORDER_MAX)
    fit = fit_scale(eta_samples(field, nu, config.x0, config.eps_grid()), config.degree)
    report = read_multiplicity(fit, displacement_jet(field, nu, order), config.tol_rel).to_dict()
    report["nu"] = nu
    return report


class ReportRunner:
    """Run snb subcommands for one configuration"""

    def __init__(self, config: RunConfig, log_callback: Optional[Callable[[str], None]] = None,
                 stream: Optional[TextIO] = None):
        self.config = config
        self.log_callback = log_callback
        self.stream = stream if stream is not None else sys.stdout
        self.jobs = resolve_jobs(config.jobs)
        self._field: Optional[Field] = None

    def log(self, message: str):
        if self.log_callback:
            self.log_callback(message)
        else:
            logger.info(message)

    @property
    def field(self) -> Field:
        if self._field is None:
            self._field = self.config.build_field()
            self.log(f"Field: {self._field.label}")
            preset = detect_preset_from_expression(self.config.field_expr or "")
            if preset:
                self.log(f"Matches preset: {preset.name}")
        return self._field

    def run(self, command: str, suite: str = "all") -> int:
        """Run one subcommand; returns the exit status"""
        if command not in COMMANDS:
            raise ValueError(f"unknown command {command!r}")
        if command == "validate":
            return self.run_validate(suite)
        self.check_genericity()
        if command != "orbit":
            self.config.check_epsilon_range(self.field, self.config.nus())
        getattr(self, f"run_{command}")()
        return 0

    def check_genericity(self):
        """Parsed fields must unfold a generic saddle-node at the origin"""
        field = self.field
        if field.is_model:
            return
        report = genericity_check(field)
        if not report.passes:
            raise GenericityError(field.label, report.failures())
        self.log("Genericity check passed")

    def _map(self, func, tasks):
        return ordered_map(func, tasks, self.jobs)

    def _emit(self, tables: List[Table] = (), report: Any = None):
        emit(tables, self.config.out, self.stream, report)

    # -- subcommands -------------------------------------------------------

    def run_orbit(self):
        config = self.config
        tasks = [(self.field, nu, config.x0, config.effective_gap_floor, config.max_iter)
                 for nu in config.nus()]
        rows = [row for block in self._map(_orbit_rows, tasks) for row in block]
        self.log(f"Orbit points: {len(rows)}")
        self._emit([Table.from_dicts("orbit", rows, ["nu", "n", "x", "offset", "gap"])])

    def run_lengths(self):
        config = self.config
        eps_grid = config.eps_grid()
        tasks = [(self.field, nu, config.x0, eps_grid, config.effective_gap_floor, config.max_iter)
                 for nu in config.nus()]
        rows = [row for block in self._map(_length_rows, tasks) for row in block]
        self._emit([Table.from_dicts("lengths", rows, LENGTH_COLUMNS)])

    def run_fit(self):
        config = self.config
        tasks = [(self.field, nu, config) for nu in config.nus()]
        reports = []
        sample_rows = []
        for report, rows in self._map(_fit_report, tasks):
            if not report["accepted"]:
                self.log(f"Warning: fit residual {report['residual_rms']:.3g} above tolerance "
                         f"at nu={report['nu']:g}")
            reports.append(report)
            sample_rows.extend(rows)

        if config.dump_samples:
            emit([Table.from_dicts("samples", sample_rows, SAMPLE_COLUMNS)], config.dump_samples,
                 self.stream)
            self.log(f"Samples written to {config.dump_samples}")
        self._emit(report=reports[0] if len(reports) == 1 else reports)

    def run_multiplicity(self):
        config = self.config
        reports = self._map(_multiplicity_report, [(self.field, nu, config) for nu in config.nus()])
        for report in reports:
            if not report["agree"]:
                self.log(f"Warning: fit and jet disagree at nu={report['nu']:g}")
        self._emit(report=reports[0] if len(reports) == 1 else reports)

    def run_boxdim(self):
        config = self.config
        eps_grid = config.eps_grid()
        tasks = [(self.field, nu, config.x0, eps_grid) for nu in config.nus()]
        rows = self._map(_boxdim_row, tasks)
        self._emit([Table.from_dicts("boxdim", rows, ["nu", "slope", "dim_estimate"])])

    def run_sweep(self):
        config = self.config
        rows = content_blowup(self.field, config.x0, config.nus(), config.eps_grid(*config.eps_window),
                              mapper=self._map)
        self._emit([Table.from_dicts("sweep", [row.to_row() for row in rows])])

    def run_validate(self, suite: str) -> int:
        checks = run_suite(suite)
        self._emit([Table.from_dicts("validate", [c.to_row() for c in checks],
                                     ["identity", "grid", "max_err", "tolerance", "pass"])])
        failed = sum(1 for c in checks if not c.passed)
        self.log(f"Checks: {len(checks)} run, {failed} failed")
        return 1 if failed else 0
