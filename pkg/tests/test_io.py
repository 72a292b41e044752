import json

import numpy as np

from polygrowth.io import dumps, line_plot_svg, read_csv, update_json, write_csv


def test_json_floats_17_digits():
    text = dumps({"x": 0.1, "n": 3, "ok": True, "bad": float("nan"), "arr": np.array([1.5, 2.0])})
    assert '"x": 0.10000000000000001' in text
    data = json.loads(text)
    assert data["x"] == 0.1 and data["n"] == 3 and data["ok"] is True and data["bad"] is None
    assert data["arr"] == [1.5, 2.0]


def test_update_json_merges(tmp_path):
    p = tmp_path / "f.json"
    update_json(p, {"a": 1})
    update_json(p, {"b": {"c": 2.5}})
    assert json.loads(p.read_text()) == {"a": 1, "b": {"c": 2.5}}


def test_csv_round_trip_exact(tmp_path):
    x = np.random.default_rng(0).standard_normal(20)
    write_csv(tmp_path / "a.csv", ["i", "x"], [np.arange(20), x])
    cols = read_csv(tmp_path / "a.csv")
    np.testing.assert_array_equal(cols["x"], x)


def test_svg_is_standalone(tmp_path):
    line_plot_svg(tmp_path / "p.svg", {"a": ([1, 10, 100], [1, 0.1, 0.01]), "empty": ([], [])}, logx=True)
    text = (tmp_path / "p.svg").read_text()
    assert text.startswith("<svg") and "<polyline" in text and text.rstrip().endswith("</svg>")
