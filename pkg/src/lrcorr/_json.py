"""Deterministic JSON serialization for CLI artifacts.

Floats are written with 17 significant digits so that two runs with the
same seed produce byte-identical output files on any IEEE-754 platform.
"""

from __future__ import annotations

import json
import math

SCHEMA_VERSION = 1


def format_float(x: float) -> str:
    if math.isnan(x) or math.isinf(x):
        raise ValueError("non-finite numbers are not representable in JSON")
    s = format(float(x), ".17g")
    # keep a float marker so the value round-trips as float, not int
    if "." not in s and "e" not in s and "E" not in s:
        s += ".0"
    return s


def _encode(obj, indent: int, level: int) -> str:
    pad = " " * (indent * level)
    inner = " " * (indent * (level + 1))
    if obj is None:
        return "null"
    if obj is True:
        return "true"
    if obj is False:
        return "false"
    if isinstance(obj, str):
        return json.dumps(obj, ensure_ascii=False)
    if isinstance(obj, float):
        return format_float(obj)
    if isinstance(obj, int):
        return str(obj)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        parts = []
        for key, value in obj.items():
            if not isinstance(key, str):
                raise TypeError(f"JSON object keys must be strings, got {type(key).__name__}")
            parts.append(f"{inner}{json.dumps(key, ensure_ascii=False)}: {_encode(value, indent, level + 1)}")
        return "{\n" + ",\n".join(parts) + "\n" + pad + "}"
    if isinstance(obj, (list, tuple)):
        if not len(obj):
            return "[]"
        parts = [f"{inner}{_encode(value, indent, level + 1)}" for value in obj]
        return "[\n" + ",\n".join(parts) + "\n" + pad + "]"
    # numpy scalars expose item(); anything else is a bug in the caller
    item = getattr(obj, "item", None)
    if callable(item):
        return _encode(item(), indent, level)
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps(obj, indent: int = 2) -> str:
    """Serialize to canonical JSON text (trailing newline included)."""
    return _encode(obj, indent, 0) + "\n"


def dump(obj, path, indent: int = 2) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        handle.write(dumps(obj, indent=indent))


def load(path):
    with open(path, "r", encoding="utf-8") as handle:
        return json.load(handle)
