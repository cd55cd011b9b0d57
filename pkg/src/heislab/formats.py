"""Text and JSON formats for sparse functions (.sfn) and sets (.set).

.sfn:  first line ``k <k>``, then ``<2k ints> <t> <value>`` per line.
.set:  the same without the value column.
``#`` starts a comment anywhere on a line.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .lattice import LatticeSet, SparseFunction


class FormatError(ValueError):
    pass


def _data_lines(text):
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if line:
            yield lineno, line.split()


def _parse(text, with_values):
    lines = _data_lines(text)
    try:
        lineno, head = next(lines)
    except StopIteration:
        raise FormatError("empty file: expected a 'k <k>' header") from None
    if len(head) != 2 or head[0] != "k":
        raise FormatError(f"line {lineno}: expected 'k <k>', got {' '.join(head)!r}")
    try:
        k = int(head[1])
    except ValueError:
        raise FormatError(f"line {lineno}: dimension {head[1]!r} is not an integer") from None
    if k < 1:
        raise FormatError(f"line {lineno}: dimension must be >= 1, got {k}")
    width = 2 * k + 1 + (1 if with_values else 0)
    rows, values = [], []
    for lineno, fields in lines:
        if len(fields) != width:
            raise FormatError(f"line {lineno}: expected {width} fields, got {len(fields)}")
        try:
            rows.append([int(x) for x in fields[: 2 * k + 1]])
            if with_values:
                values.append(float(fields[-1]))
        except ValueError as exc:
            raise FormatError(f"line {lineno}: {exc}") from None
    rows = np.array(rows, dtype=np.int64).reshape(len(rows), 2 * k + 1)
    return k, rows, np.array(values, dtype=np.float64)


def parse_sfn(text: str) -> SparseFunction:
    k, rows, values = _parse(text, True)
    return SparseFunction.from_rows(k, rows, values)


def parse_set(text: str) -> LatticeSet:
    k, rows, _ = _parse(text, False)
    return LatticeSet.from_rows(k, rows)


def format_sfn(f: SparseFunction) -> str:
    # repr() gives the shortest string that round-trips the float exactly
    out = [f"k {f.k}"]
    for row, v in zip(f.rows.tolist(), f.values.tolist()):
        out.append(" ".join(map(str, row)) + " " + repr(v))
    return "\n".join(out) + "\n"


def format_set(s: LatticeSet) -> str:
    out = [f"k {s.k}"]
    out.extend(" ".join(map(str, row)) for row in s.rows.tolist())
    return "\n".join(out) + "\n"


def function_to_json(f: SparseFunction) -> dict:
    k = f.k
    return {
        "k": k,
        "entries": [
            {"n": row[: 2 * k], "t": row[2 * k], "v": v}
            for row, v in zip(f.rows.tolist(), f.values.tolist())
        ],
    }


def set_to_json(s: LatticeSet) -> dict:
    k = s.k
    return {"k": k, "points": [{"n": row[: 2 * k], "t": row[2 * k]} for row in s.rows.tolist()]}


def _json_rows(k, items):
    rows = []
    for item in items:
        n = [int(x) for x in item["n"]]
        if len(n) != 2 * k:
            raise FormatError(f"entry {item!r}: expected {2 * k} n-coordinates")
        rows.append(n + [int(item["t"])])
    return np.array(rows, dtype=np.int64).reshape(len(rows), 2 * k + 1)


def function_from_json(obj: dict) -> SparseFunction:
    try:
        k = int(obj["k"])
        entries = obj.get("entries", [])
        return SparseFunction.from_rows(k, _json_rows(k, entries), [float(e["v"]) for e in entries])
    except (KeyError, TypeError) as exc:
        raise FormatError(f"malformed function JSON: {exc!r}") from None


def set_from_json(obj: dict) -> LatticeSet:
    try:
        k = int(obj["k"])
        return LatticeSet.from_rows(k, _json_rows(k, obj.get("points", [])))
    except (KeyError, TypeError) as exc:
        raise FormatError(f"malformed set JSON: {exc!r}") from None


def _is_json(path: Path, text: str) -> bool:
    return path.suffix.lower() == ".json" or text.lstrip().startswith("{")


def read_function(path) -> SparseFunction:
    path = Path(path)
    text = path.read_text()
    if _is_json(path, text):
        return function_from_json(json.loads(text))
    return parse_sfn(text)


def read_set(path) -> LatticeSet:
    path = Path(path)
    text = path.read_text()
    if _is_json(path, text):
        return set_from_json(json.loads(text))
    return parse_set(text)


def write_function(f: SparseFunction, path, fmt: str | None = None) -> None:
    path = Path(path)
    fmt = fmt or ("json" if path.suffix.lower() == ".json" else "sfn")
    if fmt == "json":
        path.write_text(json.dumps(function_to_json(f)) + "\n")
    else:
        path.write_text(format_sfn(f))


def write_set(s: LatticeSet, path, fmt: str | None = None) -> None:
    path = Path(path)
    fmt = fmt or ("json" if path.suffix.lower() == ".json" else "set")
    if fmt == "json":
        path.write_text(json.dumps(set_to_json(s)) + "\n")
    else:
        path.write_text(format_set(s))
