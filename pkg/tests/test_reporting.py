import json
import math

import numpy as np
import pytest

from dirlab.reporting import csv_rows, dumps, fmt


@pytest.mark.parametrize("x", [0.1, 1 / 3, math.pi, 1e-300, -2.5e17, 6.02214076e23])
def test_fmt_round_trips(x):
    s = fmt(x)
    assert float(s) == x
    assert len(s.replace("-", "").replace(".", "").split("e")[0].lstrip("0")) <= 17


def test_dumps_nulls_non_finite_and_sorts_keys():
    text = dumps({"b": float("inf"), "a": np.float64(0.1), "c": [np.nan, 1, True]})
    doc = json.loads(text)
    assert doc == {"a": 0.1, "b": None, "c": [None, 1, True]}
    assert text.index('"a"') < text.index('"b"') < text.index('"c"')
    assert "0.10000000000000001" in text
    assert text.endswith("}\n")


def test_dumps_numpy_scalars_and_arrays():
    doc = json.loads(dumps({"x": np.arange(3), "f": np.bool_(False), "i": np.int64(7)}))
    assert doc == {"x": [0, 1, 2], "f": False, "i": 7}


def test_dumps_is_deterministic_under_insertion_order():
    assert dumps({"z": 1.5, "y": {"q": 2, "p": 3}}) == dumps({"y": {"p": 3, "q": 2}, "z": 1.5})


def test_dumps_rejects_unknown_types():
    with pytest.raises(TypeError):
        dumps({"x": object()})


def test_csv_rows_formats():
    text = csv_rows(("a", "b", "c"), [(0.1, True, "s"), (np.float64(2.0), np.bool_(False), 3)])
    assert text.splitlines() == ["a,b,c", "0.10000000000000001,true,s", "2,false,3"]
