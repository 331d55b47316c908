import io
import json

import numpy as np
import openpyxl
import pytest

from snb.reports.writers import (EXCEL_FLOAT_FORMAT, Table, csv_text, emit, format_value,
                                 json_text, report_table)


class TestFormatting:
    def test_values(self):
        assert format_value(0.1) == "0.10000000000000001"
        assert format_value(np.float64(1e-10)) == "1.0000000000000000e-10"
        assert format_value(3) == "3"
        assert format_value(np.int64(7)) == "7"
        assert format_value(True) == "true"
        assert format_value(None) == ""
        assert format_value("name") == "name"

    def test_csv_tables(self):
        first = Table.from_dicts("a", [{"x": 1, "y": 0.5}, {"x": 2, "y": None}])
        second = Table("b", ["z"], [[True]])
        assert csv_text([first, second]) == "x,y\n1,0.5\n2,\n\nz\ntrue\n"

    def test_from_dicts_column_order(self):
        table = Table.from_dicts("t", [{"b": 1, "a": 2}], ["a", "b", "c"])
        assert table.rows == [[2, 1, None]]

    def test_json_handles_numpy_and_non_finite(self):
        report = {"coefficients": np.array([0.0, 0.25]), "condition": float("inf"),
                  "agree": np.bool_(True), "count": np.int64(2)}
        assert json.loads(json_text(report)) == {"coefficients": [0.0, 0.25], "condition": None,
                                                 "agree": True, "count": 2}

    def test_report_table_flattens(self):
        table = report_table("report", {"fit": {"coefficients": [1.0, 2.0]}, "nu": 0.01})
        assert table.rows == [["fit.coefficients[0]", 1.0], ["fit.coefficients[1]", 2.0],
                              ["nu", 0.01]]


class TestEmit:
    def test_stream(self):
        stream = io.StringIO()
        emit([Table("t", ["x"], [[1.5]])], None, stream)
        assert stream.getvalue() == "x\n1.5\n"

    def test_json_to_file(self, tmp_path):
        out = tmp_path / "sub" / "report.json"
        emit([], str(out), io.StringIO(), {"nu": 0.0})
        assert json.loads(out.read_text(encoding="utf-8")) == {"nu": 0.0}

    def test_workbook(self, tmp_path):
        out = tmp_path / "lengths.xlsx"
        table = Table("lengths", ["epsilon", "n_discrete"], [[1e-8, 12], [1e-7, 9]])
        emit([table], str(out), io.StringIO())

        wb = openpyxl.load_workbook(out)
        assert wb.sheetnames == ["lengths"]
        ws = wb["lengths"]
        assert [c.value for c in ws[1]] == ["epsilon", "n_discrete"]
        assert ws["A1"].font.bold
        assert ws["A1"].fill.start_color.rgb.endswith("366092")
        assert ws["A2"].value == pytest.approx(1e-8)
        assert ws["A2"].number_format == EXCEL_FLOAT_FORMAT
        assert ws["B3"].value == 9

    def test_report_workbook(self, tmp_path):
        out = tmp_path / "fit.xlsx"
        emit([], str(out), io.StringIO(), {"degree": 3})
        ws = openpyxl.load_workbook(out)["report"]
        assert [c.value for c in ws[2]] == ["degree", 3]
