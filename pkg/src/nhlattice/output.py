"""Deterministic serialization for output files.

All floats are written with 17 significant digits (exact double round
trip), JSON objects with sorted keys, CSV with a leading config comment.
Re-running a command with an identical config therefore reproduces every
output file byte for byte.
"""

from __future__ import annotations

import math
from pathlib import Path

__all__ = ["fmt_float", "json_dumps", "complex_dict", "csv_text", "write_output"]


def fmt_float(x: float) -> str:
    x = float(x)
    if not math.isfinite(x):
        raise ValueError(f"non-finite value {x!r} in output")
    return format(x, ".17g")


def _escape(s: str) -> str:
    out = ['"']
    for ch in s:
        if ch == '"':
            out.append('\\"')
        elif ch == "\\":
            out.append("\\\\")
        elif ch == "\n":
            out.append("\\n")
        elif ch == "\t":
            out.append("\\t")
        elif ch == "\r":
            out.append("\\r")
        elif ord(ch) < 0x20:
            out.append(f"\\u{ord(ch):04x}")
        else:
            out.append(ch)
    out.append('"')
    return "".join(out)


def json_dumps(obj, indent: int = 2) -> str:
    """JSON with sorted keys and fixed float formatting."""

    def emit(o, depth: int) -> str:
        pad = " " * (indent * depth)
        pad_in = " " * (indent * (depth + 1))
        if o is None:
            return "null"
        if isinstance(o, bool):
            return "true" if o else "false"
        if isinstance(o, int):
            return str(o)
        if isinstance(o, float):
            return fmt_float(o)
        if isinstance(o, complex):
            return emit(complex_dict(o), depth)
        if isinstance(o, str):
            return _escape(o)
        if isinstance(o, (list, tuple)):
            if not o:
                return "[]"
            inner = ",\n".join(pad_in + emit(v, depth + 1) for v in o)
            return "[\n" + inner + "\n" + pad + "]"
        if isinstance(o, dict):
            if not o:
                return "{}"
            items = []
            for key in sorted(o):
                if not isinstance(key, str):
                    raise TypeError(f"JSON keys must be strings, got {key!r}")
                items.append(pad_in + _escape(key) + ": " + emit(o[key], depth + 1))
            return "{\n" + ",\n".join(items) + "\n" + pad + "}"
        raise TypeError(f"cannot serialize {type(o).__name__}")

    return emit(obj, 0) + "\n"


def complex_dict(z: complex) -> dict:
    z = complex(z)
    return {"re": z.real, "im": z.imag}


def _cell(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, int):
        return str(v)
    if isinstance(v, float):
        return fmt_float(v)
    if v is None:
        return ""
    return str(v)


def csv_text(columns, rows, config: dict | None = None) -> str:
    """CSV with '#'-prefixed config provenance lines before the header."""
    lines = []
    if config is not None:
        lines.append("# config: " + json_dumps(config, indent=0).replace("\n", " ").strip())
    lines.append(",".join(columns))
    for row in rows:
        if len(row) != len(columns):
            raise ValueError("row width does not match the header")
        lines.append(",".join(_cell(v) for v in row))
    return "\n".join(lines) + "\n"


def write_output(path, text: str) -> None:
    Path(path).write_text(text, encoding="utf-8", newline="\n")
