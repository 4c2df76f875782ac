"""JSON/CSV file formats.

Source  {"pxy": [[P(-1,-1), P(-1,+1)], [P(+1,-1), P(+1,+1)]]}
Target  {"q": [[...], ...]}  or  {"qu": [...], "qv": [...]}
Lambda  {"lambda": [[...], ...]}          shape (ku-1) x (kv-1)
Family  {"d": d, "k": k, "tables": {"1": [...], ..., "k-1": [...]}}
Table   {"values": [...]}                 length 2^d
PMF     {"pmf": [...]}                    length 2^d, point-indexed
"""

from __future__ import annotations

import csv
import io
import json
import math

import numpy as np

from .bounds import LambdaWeights, TargetSpec
from .fourier import BinarySourceSpec, TruthTable
from .rounding import RealFunctionFamily


class ParseError(Exception):
    exit_code = 2


def load_json(path: str) -> dict:
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise ParseError(f"{path}: cannot read ({exc.strerror})") from None
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    if not isinstance(doc, dict):
        raise ParseError(f"{path}: top level must be a JSON object")
    return doc


def _field(doc: dict, key: str, path: str):
    if key not in doc:
        raise ParseError(f"{path}: missing field '{key}'")
    return doc[key]


def _numbers(value, key: str, path: str, ndim: int) -> np.ndarray:
    try:
        arr = np.array(value, dtype=float)
    except (TypeError, ValueError):
        raise ParseError(f"{path}: field '{key}' must hold numbers") from None
    if arr.ndim != ndim:
        kind = "a list" if ndim == 1 else "a list of equal-length rows"
        raise ParseError(f"{path}: field '{key}' must be {kind}")
    return arr


def read_source(path: str) -> BinarySourceSpec:
    doc = load_json(path)
    pxy = _numbers(_field(doc, "pxy", path), "pxy", path, 2)
    if pxy.shape != (2, 2):
        raise ParseError(f"{path}: field 'pxy' must be a 2x2 matrix, got shape {pxy.shape}")
    return BinarySourceSpec(pxy)


def read_target(path: str) -> tuple[TargetSpec | None, np.ndarray, np.ndarray]:
    """Either a full joint pmf or only its marginals."""
    doc = load_json(path)
    if "q" in doc:
        t = TargetSpec(_numbers(doc["q"], "q", path, 2))
        return t, t.q_u, t.q_v
    qu = _numbers(_field(doc, "qu", path), "qu", path, 1)
    qv = _numbers(_field(doc, "qv", path), "qv", path, 1)
    return None, qu, qv


def read_lambda(path: str) -> LambdaWeights:
    doc = load_json(path)
    return LambdaWeights(_numbers(_field(doc, "lambda", path), "lambda", path, 2))


def read_family(path: str) -> RealFunctionFamily:
    doc = load_json(path)
    d = _field(doc, "d", path)
    k = _field(doc, "k", path)
    if not isinstance(d, int) or not isinstance(k, int) or d < 0 or k < 2:
        raise ParseError(f"{path}: fields 'd' and 'k' must be integers with d >= 0, k >= 2")
    tables = _field(doc, "tables", path)
    if not isinstance(tables, dict):
        raise ParseError(f"{path}: field 'tables' must map symbols to value lists")
    rows = []
    for u in range(1, k):
        key = f"tables.{u}"
        if str(u) not in tables:
            raise ParseError(f"{path}: missing field '{key}'")
        row = _numbers(tables[str(u)], key, path, 1)
        if row.shape[0] != 1 << d:
            raise ParseError(f"{path}: field '{key}' has {row.shape[0]} entries, expected {1 << d}")
        rows.append(row)
    extra = set(tables) - {str(u) for u in range(1, k)}
    if extra:
        raise ParseError(f"{path}: field 'tables' has unexpected symbol(s) {sorted(extra)}")
    return RealFunctionFamily(np.array(rows))


def read_table(path: str) -> TruthTable:
    doc = load_json(path)
    return TruthTable(_numbers(_field(doc, "values", path), "values", path, 1))


def read_pmf(path: str) -> np.ndarray:
    doc = load_json(path)
    return _numbers(_field(doc, "pmf", path), "pmf", path, 1)


def to_plain(obj):
    """numpy-free structure for json.dumps (floats keep full repr precision)."""
    if isinstance(obj, dict):
        return {str(k): to_plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return to_plain(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if not math.isfinite(x):
            return repr(x)
        return x
    return obj


def dump_json(doc) -> str:
    return json.dumps(to_plain(doc), indent=2) + "\n"


def fmt17(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return "%.17g" % float(x)
    return str(x)


def dump_csv(header: list[str], rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([fmt17(v) for v in row])
    return buf.getvalue()
