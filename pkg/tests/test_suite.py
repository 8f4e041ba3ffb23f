import json

import numpy as np
import pytest

from eplab import suite
from eplab.errors import OperatorFileError
from eplab.suite import PROPERTIES, Property, property_names, replay, run_suite


def test_registry_names_unique():
    names = property_names()
    assert len(names) == len(set(names)) == len(PROPERTIES)


@pytest.mark.parametrize("dim", [1, 2, 5])
def test_clean_run(dim, tmp_path):
    result = run_suite(7, 2, dim, dump_dir=tmp_path)
    assert result.passed and not list(tmp_path.iterdir())
    assert all(t == [2, 2] for t in result.counts.values())


def test_only_filter_and_same_draws():
    a = run_suite(5, 3, 4, only=["penrose_equations"])
    assert list(a.counts) == ["penrose_equations"]
    b = run_suite(5, 3, 4)
    assert b.counts["penrose_equations"] == a.counts["penrose_equations"]


def test_invalid_arguments():
    with pytest.raises(ValueError):
        run_suite(0, -1, 4)
    with pytest.raises(ValueError):
        run_suite(0, 1, 0)


def _planted(ops, ctx):
    T = ops["T"]
    return bool(np.abs(T).max() < 0.5), {"max_entry": float(np.abs(T).max())}


def test_dump_and_replay(tmp_path, monkeypatch):
    bad = Property("planted", lambda rng, n: {"T": rng.standard_normal((n, n))}, _planted)
    monkeypatch.setattr(suite, "PROPERTIES", [bad])
    result = run_suite(1, 2, 3, dump_dir=tmp_path)
    assert len(result.failures) == 2
    for failure in result.failures:
        rep = replay(failure.manifest)
        assert rep.reproduced and not rep.passed
        manifest = json.loads(open(failure.manifest).read())
        assert manifest["property"] == "planted" and manifest["seed"] == 1


def test_replay_bad_manifest(tmp_path):
    (tmp_path / "m.json").write_text("{}")
    with pytest.raises(OperatorFileError):
        replay(tmp_path / "m.json")
