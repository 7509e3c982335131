import json
import math

import pytest

from app.export import (
    CURVE_COLUMNS,
    SWEEP_COLUMNS,
    curve_csv,
    fmt,
    knot_metadata,
    render_curve,
    sweep_csv,
    sweep_json,
    write_text,
)
from app.knot_search import build_knot
from app.service import chart_line_row, root_row, sweep_row


@pytest.fixture(scope="module")
def knot():
    return build_knot(0.5, samples_per_period=16)


class TestFormatting:
    @pytest.mark.parametrize(
        "value, text",
        [
            (None, ""),
            (3, "3"),
            (0.5, "0.5"),
            (0.1, "0.10000000000000001"),
            (math.inf, "inf"),
            (-math.inf, "-inf"),
            (math.nan, "nan"),
        ],
    )
    def test_fmt(self, value, text):
        assert fmt(value) == text


class TestCurveFiles:
    def test_csv_layout(self, knot):
        lines = curve_csv(knot).splitlines()
        metadata = knot_metadata(knot)
        assert len(lines) == len(metadata) + 1 + 17
        assert lines[len(metadata)] == ",".join(CURVE_COLUMNS)
        assert "# closed = true" in lines
        assert "# q0_provenance = Q0(m) = 2E(m)/K(m) - (1 - m)" in lines

    def test_json_layout(self, knot):
        data = json.loads(render_curve(knot, "json"))
        assert data["columns"] == CURVE_COLUMNS
        assert len(data["rows"]) == 17
        assert data["metadata"]["branch"] == "classical"

    def test_obj_polyline(self, knot):
        lines = render_curve(knot, "obj").splitlines()
        assert lines[-1] == "l " + " ".join(str(i) for i in range(1, 18))

    def test_unknown_format(self, knot):
        with pytest.raises(ValueError):
            render_curve(knot, "stl")


class TestSweepTables:
    def test_csv_and_json(self):
        rows = [sweep_row(-1.0), sweep_row(0.5)]
        lines = sweep_csv(rows, {"points": 2}).splitlines()
        assert lines[0] == "# points = 2"
        assert lines[1] == ",".join(SWEEP_COLUMNS)
        assert len(lines) == 4
        data = json.loads(sweep_json(rows))
        assert data["metadata"] == {}
        assert [row[0] for row in data["rows"]] == ["-1", "0.5"]

    def test_columns_follow_the_row_model(self):
        lines = sweep_csv([root_row(0.5, 0.2), root_row(2.0, 0.2)]).splitlines()
        assert lines[0] == "lam,nu,e1,e2,e3,p,lambda_delta"
        assert len(lines) == 3
        data = json.loads(sweep_json([chart_line_row(-1.0, 0.5)], {"chart": "lines"}))
        assert data["columns"] == ["q0", "m", "nu2", "lam", "mu2"]
        assert data["rows"][0][:2] == ["0.5", "-1"]

    def test_write_text_creates_directories(self, tmp_path):
        path = write_text(tmp_path / "nested" / "out.csv", "a\nb\n")
        assert path.read_bytes() == b"a\nb\n"
