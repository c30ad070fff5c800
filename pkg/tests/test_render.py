from __future__ import annotations

import json
import math
import xml.etree.ElementTree as ET

import numpy as np
import pytest

from uqsum.analysis import PrrTable
from uqsum.render import (
    atomic_write,
    heatmap_svg,
    load_table_json,
    matrix_to_csv,
    matrix_to_json,
    table_to_csv,
    table_to_json,
    table_to_markdown,
)


@pytest.fixture
def table():
    values = np.array([[0.12345, -0.5], [0.98765, 0.25]])
    return PrrTable(
        row_names=["ROUGE-L", "Spearman"],
        col_names=["MSP", "LexSim"],
        values=values,
        col_means=values.mean(axis=0),
    )


class TestTableFormats:
    def test_csv_layout_and_precision(self, table):
        lines = table_to_csv(table).splitlines()
        assert lines[0] == ",MSP,LexSim"
        assert lines[1] == "ROUGE-L,0.1235,-0.5000"
        assert lines[2] == "Spearman,0.9877,0.2500"
        assert lines[3].startswith("Col Mean,")
        assert len(lines) == 4

    def test_markdown_mirrors_csv_cells(self, table):
        csv_cells = [line.split(",")[1:] for line in table_to_csv(table).splitlines()[1:]]
        md_lines = table_to_markdown(table).splitlines()
        md_cells = [
            [c.strip() for c in line.strip("|").split("|")][1:]
            for line in md_lines[2:]
        ]
        assert md_cells == csv_cells

    def test_row_means_column(self, table):
        table.row_means = table.values.mean(axis=1)
        lines = table_to_csv(table).splitlines()
        assert lines[0].endswith("Row Mean")
        assert len(lines[1].split(",")) == 4

    def test_json_round_trip_full_precision(self, table):
        loaded = load_table_json_from_text(table_to_json(table))
        np.testing.assert_array_equal(loaded.values, table.values)
        assert loaded.row_names == table.row_names
        assert loaded.col_names == table.col_names

    def test_json_preserves_nan_as_null(self, table):
        table.values[0, 1] = math.nan
        payload = json.loads(table_to_json(table))
        assert payload["values"][0][1] is None
        loaded = load_table_json_from_text(table_to_json(table))
        assert math.isnan(loaded.values[0, 1])


def load_table_json_from_text(text):
    import tempfile
    from pathlib import Path

    with tempfile.TemporaryDirectory() as tmp:
        path = Path(tmp) / "table.json"
        path.write_text(text)
        return load_table_json(path)


class TestMatrixFormats:
    def test_csv_renders_null(self):
        matrix = np.array([[1.0, math.nan], [math.nan, 1.0]])
        text = matrix_to_csv(["a", "b"], matrix)
        assert "null" in text
        assert text.splitlines()[1] == "a,1.0000,null"

    def test_json_null_cells(self):
        matrix = np.array([[1.0, math.nan], [math.nan, 1.0]])
        payload = json.loads(matrix_to_json(["a", "b"], matrix))
        assert payload["values"][0][1] is None


class TestHeatmapSvg:
    def test_well_formed_xml(self):
        matrix = np.array([[1.0, -0.25], [-0.25, 1.0]])
        svg = heatmap_svg(["a", "b"], ["a", "b"], matrix, title="demo")
        root = ET.fromstring(svg)
        assert root.tag.endswith("svg")

    def test_cell_annotations_match_values_at_two_decimals(self):
        matrix = np.array([[1.0, 0.5], [0.5, 1.0]])
        svg = heatmap_svg(["a", "b"], ["a", "b"], matrix)
        assert ">0.50<" in svg
        assert ">1.00<" in svg

    def test_nan_cells_hatched_without_label(self):
        matrix = np.array([[1.0, math.nan], [math.nan, 1.0]])
        svg = heatmap_svg(["a", "b"], ["a", "b"], matrix)
        assert 'fill="url(#hatch)"' in svg
        assert "nan" not in svg

    def test_diverging_extremes(self):
        matrix = np.array([[1.0, -1.0], [-1.0, 1.0]])
        svg = heatmap_svg(["a", "b"], ["a", "b"], matrix)
        assert "#b2182b" in svg  # +1 end
        assert "#2166ac" in svg  # -1 end

    def test_escapes_names(self):
        matrix = np.array([[1.0, 0.0], [0.0, 1.0]])
        svg = heatmap_svg(["a<b", "c&d"], ["a<b", "c&d"], matrix)
        ET.fromstring(svg)
        assert "a&lt;b" in svg and "c&amp;d" in svg


def test_atomic_write_creates_parents(tmp_path):
    target = tmp_path / "nested" / "dir" / "file.txt"
    atomic_write(target, "payload")
    assert target.read_text() == "payload"
    assert not target.with_name(target.name + ".tmp").exists()
