"""JSON operator files: ``rows``, ``cols``, row-major ``entries`` as ``[re, im]`` pairs, optional ``name``."""

from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np

from .errors import OperatorFileError


def _reject_constant(token):
    raise OperatorFileError(f"non-finite number {token!r} in operator file")


def _count(doc, key) -> int:
    value = doc.get(key)
    if isinstance(value, bool) or not isinstance(value, int) or value < 0:
        raise OperatorFileError(f"{key!r} must be a nonnegative integer, got {value!r}")
    return value


def _number(x) -> float:
    if isinstance(x, bool) or not isinstance(x, (int, float)) or not math.isfinite(x):
        raise OperatorFileError(f"entry component {x!r} is not a finite number")
    return float(x)


def parse_operator(text: str) -> tuple[np.ndarray, str | None]:
    try:
        doc = json.loads(text, parse_constant=_reject_constant)
    except json.JSONDecodeError as exc:
        raise OperatorFileError(f"invalid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise OperatorFileError("operator file must hold a JSON object")
    rows, cols = _count(doc, "rows"), _count(doc, "cols")
    entries = doc.get("entries")
    if not isinstance(entries, list):
        raise OperatorFileError("'entries' must be a list")
    if len(entries) != rows * cols:
        raise OperatorFileError(f"expected {rows * cols} entries, found {len(entries)}")
    values = []
    for k, pair in enumerate(entries):
        if not isinstance(pair, list) or len(pair) != 2:
            raise OperatorFileError(f"entry {k} is not a [re, im] pair")
        values.append(complex(_number(pair[0]), _number(pair[1])))
    name = doc.get("name")
    if name is not None and not isinstance(name, str):
        raise OperatorFileError("'name' must be a string")
    return np.array(values, dtype=np.complex128).reshape(rows, cols), name


def load_operator(path) -> tuple[np.ndarray, str | None]:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as exc:
        raise OperatorFileError(f"cannot read {path}: {exc}") from exc
    return parse_operator(text)


def format_operator(T, name: str | None = None) -> str:
    """Serialize exactly: ``repr`` of a double round-trips through JSON."""
    T = np.asarray(T, dtype=np.complex128)
    if T.ndim != 2:
        raise OperatorFileError(f"operator must be 2-D, got shape {T.shape}")
    if not np.all(np.isfinite(T)):
        raise OperatorFileError("operator has non-finite entries")
    doc = {"rows": T.shape[0], "cols": T.shape[1]}
    if name is not None:
        doc["name"] = name
    doc["entries"] = [[float(z.real), float(z.imag)] for z in T.reshape(-1)]
    return json.dumps(doc) + "\n"


def save_operator(path, T, name: str | None = None) -> None:
    Path(path).write_text(format_operator(T, name), encoding="utf-8")
