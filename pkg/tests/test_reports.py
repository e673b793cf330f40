import csv
import json
import math

import numpy as np
from hypothesis import given, settings, strategies as st

from nlgrad.kernels import Regime
from nlgrad.reports import dumps, format_cell, to_jsonable, write_csv


def test_to_jsonable_handles_numpy_and_specials():
    obj = {"a": np.float64(1.5), "b": np.int64(3), "c": np.array([1.0, np.nan]),
           "d": (math.inf, -math.inf), "e": Regime.Vanishing, "f": np.bool_(True)}
    assert to_jsonable(obj) == {"a": 1.5, "b": 3, "c": [1.0, "NaN"],
                                "d": ["Infinity", "-Infinity"], "e": "Vanishing", "f": True}


def test_dumps_is_sorted_and_stable():
    a = dumps({"z": 1, "a": [0.1, 2]})
    assert a == dumps({"a": [0.1, 2], "z": 1})
    assert a.index('"a"') < a.index('"z"')


@settings(max_examples=100, deadline=None)
@given(x=st.floats(allow_nan=False, allow_infinity=False))
def test_csv_float_roundtrip(x):
    assert float(format_cell(x)) == x


@settings(max_examples=50, deadline=None)
@given(x=st.floats(allow_nan=False, allow_infinity=False))
def test_json_float_roundtrip(x):
    assert json.loads(dumps({"x": x}))["x"] == x


def test_write_csv_layout(tmp_path):
    path = tmp_path / "t.csv"
    write_csv(path, [("delta", "error", "ok"), (0.1, 1e-3, True)])
    text = path.read_text()
    assert text.splitlines()[0] == "delta,error,ok"
    assert text.splitlines()[1] == "0.10000000000000001,0.001,1"
    assert list(csv.reader(open(path)))[1][0] == "0.10000000000000001"
