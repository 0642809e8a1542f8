"""Canonical JSON and CSV serialization."""

from __future__ import annotations

import csv
import io
import json
import math
import sys
from pathlib import Path

import jsonschema

from .errors import JacresError


class InputError(JacresError):
    """Unreadable file, malformed JSON, or schema violation."""


def _fmt_float(x: float) -> str:
    if not math.isfinite(x):
        raise ValueError(f"cannot serialize non-finite value {x!r}")
    if x == 0:
        return "0.0"
    s = format(x, ".17g")
    if "e" not in s and "." not in s and "n" not in s:
        s += ".0"
    return s


def _emit(obj, out: list[str]) -> None:
    if obj is None:
        out.append("null")
    elif isinstance(obj, bool):
        out.append("true" if obj else "false")
    elif isinstance(obj, int):
        out.append(str(obj))
    elif isinstance(obj, float):
        out.append(_fmt_float(obj))
    elif isinstance(obj, str):
        out.append(json.dumps(obj))
    elif isinstance(obj, dict):
        out.append("{")
        for i, key in enumerate(sorted(obj)):
            if i:
                out.append(", ")
            out.append(json.dumps(str(key)))
            out.append(": ")
            _emit(obj[key], out)
        out.append("}")
    elif isinstance(obj, (list, tuple)):
        out.append("[")
        for i, v in enumerate(obj):
            if i:
                out.append(", ")
            _emit(v, out)
        out.append("]")
    elif hasattr(obj, "item"):  # numpy scalar
        _emit(obj.item(), out)
    else:
        raise TypeError(f"cannot serialize {type(obj).__name__}")


def canonical_json(obj) -> str:
    """Sorted keys, floats with 17 significant digits, trailing newline."""
    out: list[str] = []
    _emit(obj, out)
    return "".join(out) + "\n"


def round_floats(obj, step: float = 1e-9):
    """Round every float to a multiple of ``step`` (for comparing outputs)."""
    if isinstance(obj, bool) or obj is None or isinstance(obj, (int, str)):
        return obj
    if isinstance(obj, float):
        v = round(obj / step) * step
        return 0.0 if v == 0 else v
    if isinstance(obj, dict):
        return {k: round_floats(v, step) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [round_floats(v, step) for v in obj]
    return obj


def read_text(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    try:
        return Path(path).read_text()
    except OSError as exc:
        raise InputError(f"{path}: {exc.strerror or exc}") from exc


def write_text(path: str, text: str) -> None:
    if path == "-":
        sys.stdout.write(text)
        sys.stdout.flush()
        return
    try:
        Path(path).write_text(text)
    except OSError as exc:
        raise InputError(f"{path}: {exc.strerror or exc}") from exc


def load_json(path: str, schema: dict | None = None):
    """Parse a JSON file and optionally validate it, with located diagnostics."""
    text = read_text(path)
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from exc
    if schema is not None:
        validate(obj, schema, path)
    return obj


def validate(obj, schema: dict, where: str = "<data>") -> None:
    validator = jsonschema.Draft202012Validator(schema)
    errors = sorted(validator.iter_errors(obj), key=lambda e: list(e.absolute_path))
    if errors:
        e = errors[0]
        loc = "/".join(str(p) for p in e.absolute_path) or "<root>"
        raise InputError(f"{where}: at {loc}: {e.message}")


def dump_json(path: str, obj) -> None:
    write_text(path, canonical_json(obj))


def csv_text(header: list[str], rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_fmt_float(float(v)) if not isinstance(v, (int, str)) or isinstance(v, bool)
                    else v for v in row])
    return buf.getvalue()
