"""
Command-line entry point.

    snb <command> [options]

Commands: orbit, lengths, fit, multiplicity, boxdim, sweep and
validate [compensators|fatou|lengths|fit|all].
"""

import argparse
import logging
import sys
from typing import List, Optional

from ..config.run_config import RunConfig, load_config_file, parse_setting
from ..core.errors import ConfigError, SnbError
from .runner import COMMANDS, ReportRunner
from .validate import SUITES

logger = logging.getLogger(__name__)

PROG = "snb"

# flag -> config key
_VALUE_FLAGS = {
    "--field-expr": "field_expr",
    "--rho": "rho",
    "--nu": "nu",
    "--nu-grid": "nu_grid",
    "--x0": "x0",
    "--eps-min": "eps_min",
    "--eps-max": "eps_max",
    "--eps-per-decade": "eps_per_decade",
    "--degree": "degree",
    "--tol-rel": "tol_rel",
    "--dump-samples": "dump_samples",
    "--out": "out",
    "--jobs": "jobs",
    "--x-box": "x_box",
    "--nu-max": "nu_max",
}

_HELP = {
    "field_expr": "field expression in x and nu, e.g. '-x^2+nu+0.1*x^3'",
    "rho": "residual invariant coefficients r0[,r1,...] of the model",
    "nu": "parameter value",
    "nu_grid": "logarithmic parameter grid a,b,n",
    "x0": "initial point (default 1.0)",
    "eps_min": "smallest epsilon (default 1e-10)",
    "eps_max": "largest epsilon (default 1e-4)",
    "eps_per_decade": "epsilon grid points per decade (default 40)",
    "degree": "fit degree K (default 3)",
    "tol_rel": "relative tolerance for vanishing coefficients (default 1e-4)",
    "dump_samples": "CSV file for the fit samples",
    "out": "output file; .xlsx writes a workbook (default stdout)",
    "jobs": "worker processes (default $SNB_JOBS or 1)",
    "x_box": "analysis interval a,b (default -0.5,1.0)",
    "nu_max": "largest admissible nu (default 0.1)",
}


def _setting_type(key: str):
    def convert(text: str):
        try:
            return parse_setting(key, text)
        except ValueError as e:
            raise argparse.ArgumentTypeError(f"invalid value {text!r}: {e}")
    convert.__name__ = key
    return convert


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--model", action="store_true", default=None,
                        help="use the model family (-x^2+nu)/(1+rho x)")
    for flag, key in _VALUE_FLAGS.items():
        common.add_argument(flag, dest=key, type=_setting_type(key), default=None, help=_HELP[key])
    common.add_argument("--config", default=None, help="key=value configuration file")

    parser = argparse.ArgumentParser(prog=PROG, description="Saddle-node bifurcation numerics")
    subparsers = parser.add_subparsers(dest="command", metavar="command")
    subparsers.required = True
    for command in COMMANDS:
        sub = subparsers.add_parser(command, parents=[common])
        if command == "validate":
            sub.add_argument("suite", nargs="?", default="all", choices=SUITES + ("all",))
    return parser


def _config_from_args(args: argparse.Namespace) -> RunConfig:
    file_values = load_config_file(args.config) if args.config else {}
    overrides = {key: getattr(args, key) for key in list(_VALUE_FLAGS.values()) + ["model"]}
    return RunConfig.from_sources(file_values, overrides)


def _join_value_flags(argv: List[str]) -> List[str]:
    """Rewrite `--flag value` as `--flag=value` so values like -x^2+nu are not taken for options"""
    joined = []
    tokens = iter(argv)
    for token in tokens:
        if token in _VALUE_FLAGS:
            value = next(tokens, None)
            joined.append(token if value is None else f"{token}={value}")
        else:
            joined.append(token)
    return joined


def _error(message: str):
    print(f"{PROG}: error: {message}", file=sys.stderr)


def main(argv: Optional[List[str]] = None) -> int:
    """Run the command line; returns the exit status"""
    parser = build_parser()
    argv = _join_value_flags(sys.argv[1:] if argv is None else list(argv))
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)

    try:
        config = _config_from_args(args)
    except ConfigError as e:
        _error(str(e))
        return 2

    logging.basicConfig(level=config.log_level,
                        format="%(asctime)s %(levelname)s %(name)s: %(message)s")
    try:
        return ReportRunner(config).run(args.command, getattr(args, "suite", "all"))
    except ConfigError as e:
        _error(str(e))
        return 2
    except SnbError as e:
        _error(str(e))
        return 1
    except Exception as e:
        logger.debug("%s failed unexpectedly", args.command, exc_info=True)
        _error(f"unexpected {type(e).__name__}: {e}")
        return 1
