import json
import math
import os
import xml.etree.ElementTree as ET

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from symboost import reporting
from symboost.experiments import FidelityRecord
from symboost.reporting import (HEADER, Axes, SchemaError, Series, emit_svg, read_records,
                                render_svg, series_for_config, write_manifest, write_records)

SVG = "{http://www.w3.org/2000/svg}"


def rec(i=0, F=0.5, sigma=0.1):
    return FidelityRecord("s", "relative", "typed-sym", 15, 2, 4, 0, sigma, i, F)


class TestCSV:
    def test_empty_is_header_only(self, tmp_path):
        p = tmp_path / "r.csv"
        write_records([], p)
        assert p.read_text() == ",".join(HEADER) + "\n"
        assert read_records(p) == []

    @settings(max_examples=50, deadline=None)
    @given(st.lists(st.tuples(st.floats(0, 1), st.floats(0, 10, allow_nan=False)), max_size=20))
    def test_round_trip_bit_exact(self, values):
        import tempfile

        records = [rec(i, F, s) for i, (F, s) in enumerate(values)]
        with tempfile.TemporaryDirectory() as d:
            p = os.path.join(d, "r.csv")
            write_records(records, p)
            back = read_records(p)
        assert back == records
        for a, b in zip(back, records):
            assert a.fidelity.hex() == b.fidelity.hex() and a.sigma.hex() == b.sigma.hex()

    def test_float_format(self):
        text = reporting.records_to_csv([rec(F=1 / 3)])
        assert "0.33333333333333331" in text

    def test_bad_header(self, tmp_path):
        p = tmp_path / "r.csv"
        p.write_text("a,b\n1,2\n")
        with pytest.raises(SchemaError):
            read_records(p)

    def test_bad_row(self, tmp_path):
        p = tmp_path / "r.csv"
        p.write_text(",".join(HEADER) + "\ns,relative,typed-sym,15,2,4,0,0.1,0,1.5\n")
        with pytest.raises(SchemaError, match=":2:"):
            read_records(p)

    def test_short_row(self, tmp_path):
        p = tmp_path / "r.csv"
        p.write_text(",".join(HEADER) + "\ns,relative\n")
        with pytest.raises(SchemaError):
            read_records(p)

    def test_failed_write_leaves_nothing(self, tmp_path, monkeypatch):
        p = tmp_path / "r.csv"

        def boom(*a, **k):
            raise OSError("disk full")

        monkeypatch.setattr(reporting.os, "replace", boom)
        with pytest.raises(OSError):
            write_records([rec()], p)
        assert list(tmp_path.iterdir()) == []

    def test_unwritable_directory(self, tmp_path):
        with pytest.raises(OSError):
            write_records([rec()], tmp_path / "missing" / "r.csv")


def test_manifest_checksums(tmp_path):
    p = tmp_path / "r.csv"
    write_records([rec(), rec(1)], p)
    m = write_manifest(tmp_path / "manifest.json", {"k": 1}, [p], 7, "t0", "t1")
    assert m["files"]["r.csv"] == reporting.sha256_file(p)
    loaded = json.loads((tmp_path / "manifest.json").read_text())
    assert loaded == m and loaded["master_seed"] == 7 and loaded["version"]


def count_data(root):
    return sum(1 for el in root.iter() if el.get("class") == "datum")


class TestSVG:
    def test_two_points_parse(self, tmp_path):
        p = tmp_path / "a.svg"
        emit_svg([Series("one", [(0, 0.1), (1, 0.9)])], Axes(), p)
        root = ET.parse(p).getroot()
        assert root.tag == SVG + "svg" and root.get("version") == "1.1"
        assert count_data(root) == 2

    def test_one_marker_per_datum(self):
        series = [series_for_config(m, c, [(s, 0.5) for s in (0.01, 0.02, 0.05)])
                  for m in ("relative", "absolute") for c in ("typed-asym", "typed-sym", "non-typed")]
        root = ET.fromstring(render_svg(series, Axes("sigma", "F")))
        assert count_data(root) == 18
        labels = [g.get("data-label") for g in root.iter(SVG + "g") if g.get("class") == "series"]
        assert len(labels) == 6 and "typed-asym (relative)" in labels and "non-typed (absolute)" in labels

    def test_log2_band_markers_equally_spaced(self):
        pts = [(2 ** (j + 0.5), 0.8) for j in range(3, 13)]
        root = ET.fromstring(render_svg([Series("bands", pts, line=False)], Axes(xlog2=True)))
        xs = [float(c.get("cx")) for c in root.iter(SVG + "circle") if c.get("class") == "datum"]
        gaps = [b - a for a, b in zip(xs, xs[1:])]
        assert max(gaps) - min(gaps) < 0.02

    def test_empty_series_rejected(self):
        with pytest.raises(ValueError):
            render_svg([], Axes())

    @pytest.mark.parametrize("axes", [Axes(xlim=(1, 0)), Axes(width=10), Axes(xlog2=True, xlim=(0, 4))])
    def test_invalid_axes(self, axes):
        with pytest.raises(ValueError):
            render_svg([Series("a", [(1, 1), (2, 2)])], axes)

    def test_log_axis_rejects_nonpositive(self):
        with pytest.raises(ValueError):
            render_svg([Series("a", [(0, 1), (2, 2)])], Axes(xlog2=True))

    def test_labels_escaped(self):
        text = render_svg([Series("a<b & c", [(1, 1)])], Axes(title="<t>"))
        ET.fromstring(text)

    def test_single_point_degenerate_range(self):
        root = ET.fromstring(render_svg([Series("a", [(1, 1)])], Axes()))
        assert count_data(root) == 1
        assert all(math.isfinite(float(c.get("cx"))) for c in root.iter(SVG + "circle"))
