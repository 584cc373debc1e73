import json

import numpy as np
import pytest

from htevec.io import format_value, write_csv, write_json


def test_format_value_round_trips():
    for x in (0.1, 1 / 3, 1e-300, -2.5e17):
        assert float(format_value(x)) == x
    assert format_value(np.float64(0.1)) == "0.1"
    assert format_value(np.int64(3)) == "3"
    assert format_value(True) == "true"
    with pytest.raises(TypeError):
        format_value(1j)


def test_csv_layout(tmp_path):
    p = write_csv(tmp_path / "a.csv", ["x", "name"], [(0.1, "a,b"), (2, "c")])
    raw = p.read_bytes()
    assert raw == b'x,name\r\n0.1,"a,b"\r\n2,c\r\n'


def test_json_sorted_and_numpy_aware(tmp_path):
    p = write_json(tmp_path / "m.json", {"b": np.arange(2), "a": np.float64(1.5)})
    text = p.read_text()
    assert text.index('"a"') < text.index('"b"') and text.endswith("\n")
    assert json.loads(text) == {"a": 1.5, "b": [0, 1]}
