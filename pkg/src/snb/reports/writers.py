"""CSV, JSON and Excel emission of report tables"""

import csv
import io
import json
import logging
import math
from dataclasses import dataclass, field as dataclass_field
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, TextIO

import numpy as np
import openpyxl
from openpyxl.styles import Alignment, Font, PatternFill
from openpyxl.utils import get_column_letter

from ..utils.runtime import ensure_output_dir

logger = logging.getLogger(__name__)

FLOAT_FORMAT = "%.17g"
EXCEL_FLOAT_FORMAT = "0.00000000000000E+00"
HEADER_COLOR = "366092"


@dataclass
class Table:
    """Named table: column names plus rows of plain values"""

    name: str
    columns: List[str]
    rows: List[List[Any]] = dataclass_field(default_factory=list)

    @classmethod
    def from_dicts(cls, name: str, records: Sequence[Dict[str, Any]],
                   columns: Optional[List[str]] = None) -> "Table":
        if columns is None:
            columns = list(records[0].keys()) if records else []
        return cls(name, columns, [[record.get(c) for c in columns] for record in records])


def format_value(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return FLOAT_FORMAT % float(value)
    return str(value)


def write_csv(table: Table, stream: TextIO):
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(table.columns)
    for row in table.rows:
        writer.writerow([format_value(v) for v in row])


def csv_text(tables: Sequence[Table]) -> str:
    """CSV of one or more tables, separated by a blank line"""
    buffer = io.StringIO()
    for i, table in enumerate(tables):
        if i:
            buffer.write("\n")
        write_csv(table, buffer)
    return buffer.getvalue()


def _jsonable(value: Any) -> Any:
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple, np.ndarray)):
        return [_jsonable(v) for v in value]
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        if not math.isfinite(value):
            return None
        return float(FLOAT_FORMAT % value)
    return value


def json_text(report: Any) -> str:
    return json.dumps(_jsonable(report), indent=2, sort_keys=True) + "\n"


def report_table(name: str, report: Dict[str, Any]) -> Table:
    """Flatten a JSON report into key/value rows for spreadsheet export"""
    table = Table(name, ["key", "value"])

    def walk(prefix: str, value: Any):
        if isinstance(value, dict):
            for key in sorted(value):
                walk(f"{prefix}.{key}" if prefix else str(key), value[key])
        elif isinstance(value, (list, tuple)):
            for i, item in enumerate(value):
                walk(f"{prefix}[{i}]", item)
        else:
            table.rows.append([prefix, value])

    walk("", _jsonable(report))
    return table


def write_xlsx(tables: Sequence[Table], output_file):
    """One sheet per table with a styled header row"""
    wb = openpyxl.Workbook()
    wb.remove(wb.active)
    for index, table in enumerate(tables):
        ws = wb.create_sheet(table.name[:31] or f"Sheet{index + 1}", index)
        _write_sheet(ws, table)
    wb.save(output_file)
    logger.info("Excel file saved: %s", output_file)


def _write_sheet(ws, table: Table):
    header_fill = PatternFill(start_color=HEADER_COLOR, end_color=HEADER_COLOR, fill_type="solid")
    header_font = Font(bold=True, color="FFFFFF")

    for col, header in enumerate(table.columns, 1):
        cell = ws.cell(row=1, column=col, value=header)
        cell.fill = header_fill
        cell.font = header_font
        cell.alignment = Alignment(horizontal="center")

    for row_idx, row in enumerate(table.rows, 2):
        for col, value in enumerate(row, 1):
            value = _jsonable(value)
            cell = ws.cell(row=row_idx, column=col, value=value)
            if isinstance(value, float):
                cell.number_format = EXCEL_FLOAT_FORMAT

    for col, header in enumerate(table.columns, 1):
        ws.column_dimensions[get_column_letter(col)].width = max(15, len(header) + 4)


def emit(tables: Sequence[Table], out: Optional[str], stream: TextIO,
         report: Optional[Dict[str, Any]] = None):
    """
    Write a report to out, or to stream when out is None.

    JSON reports are written as JSON unless out ends in .xlsx; tables are CSV
    unless out ends in .xlsx.
    """
    if out is not None and Path(out).suffix.lower() == ".xlsx":
        sheets = list(tables) if report is None else [report_table("report", report)]
        write_xlsx(sheets, ensure_output_dir(out))
        return
    text = json_text(report) if report is not None else csv_text(tables)
    if out is None:
        stream.write(text)
        return
    with open(ensure_output_dir(out), "w", encoding="utf-8", newline="\n") as f:
        f.write(text)
    logger.info("wrote %s", out)
