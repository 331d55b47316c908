"""Command line, report runner, validation suites and output writers"""

from .runner import COMMANDS, ReportRunner
from .validate import SUITES, Check, run_suite
from .writers import Table, emit

__all__ = ['COMMANDS', 'ReportRunner', 'SUITES', 'Check', 'run_suite', 'Table', 'emit']
