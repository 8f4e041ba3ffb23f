import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from eplab.errors import OperatorFileError
from eplab.opfile import format_operator, load_operator, parse_operator, save_operator

finite = st.floats(allow_nan=False, allow_infinity=False)


@given(arrays(np.complex128, st.tuples(st.integers(0, 4), st.integers(0, 4)),
              elements=st.complex_numbers(allow_nan=False, allow_infinity=False)))
def test_round_trip_is_exact(T):
    back, name = parse_operator(format_operator(T, "op"))
    assert name == "op" and back.shape == T.shape
    assert np.array_equal(back.view(np.float64), T.view(np.float64))


def test_file_round_trip(tmp_path):
    T = np.array([[1 + 2j, 0.1], [3, -1e-300]])
    save_operator(tmp_path / "t.json", T)
    back, name = load_operator(tmp_path / "t.json")
    assert name is None and np.array_equal(back, T)


def _doc(**kw):
    doc = {"rows": 1, "cols": 2, "entries": [[1, 0], [0, 1]]}
    doc.update(kw)
    return json.dumps(doc)


@pytest.mark.parametrize("text", [
    "not json",
    "[1, 2]",
    _doc(rows=-1),
    _doc(rows=1.5),
    _doc(cols=True),
    _doc(entries=[[1, 0]]),
    _doc(entries=[[1, 0], [0]]),
    _doc(entries=[[1, 0], "x"]),
    _doc(entries=[[1, 0], [0, "1"]]),
    _doc(entries={"a": 1}),
    _doc(name=3),
    '{"rows": 1, "cols": 1, "entries": [[NaN, 0]]}',
    '{"rows": 1, "cols": 1, "entries": [[Infinity, 0]]}',
    '{"rows": 1, "cols": 1, "entries": [[1e999, 0]]}',
])
def test_malformed_input(text):
    with pytest.raises(OperatorFileError):
        parse_operator(text)


def test_unreadable_file(tmp_path):
    with pytest.raises(OperatorFileError):
        load_operator(tmp_path / "missing.json")
    with pytest.raises(OperatorFileError):
        format_operator(np.array([np.nan]).reshape(1, 1))
    with pytest.raises(OperatorFileError):
        format_operator(np.zeros(3))
