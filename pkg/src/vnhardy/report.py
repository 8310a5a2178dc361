"""Report rendering: JSON with 17 significant digits, flat CSV, plain text."""
from __future__ import annotations

import csv
import io
import json
import math
from typing import Any

import numpy as np

SCHEMA_VERSION = 1


def _scalar(x: Any) -> str:
    if x is None:
        return "null"
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        x = float(x)
        return format(x, ".17g") if math.isfinite(x) else "null"
    if isinstance(x, str):
        return json.dumps(x)
    raise TypeError(f"cannot serialise {type(x).__name__}")


def _plain(x: Any) -> Any:
    if isinstance(x, np.ndarray):
        return x.tolist()
    if isinstance(x, tuple):
        return list(x)
    return x


def dumps(obj: Any, indent: int = 2) -> str:
    """JSON text; every float is written with 17 significant digits."""
    out: list[str] = []

    def emit(x, level):
        x = _plain(x)
        pad = " " * (indent * (level + 1))
        end = " " * (indent * level)
        if isinstance(x, dict):
            if not x:
                out.append("{}")
                return
            out.append("{\n")
            for i, (k, v) in enumerate(x.items()):
                out.append(f"{pad}{json.dumps(str(k))}: ")
                emit(v, level + 1)
                out.append(",\n" if i < len(x) - 1 else "\n")
            out.append(end + "}")
        elif isinstance(x, list):
            if not x:
                out.append("[]")
                return
            if all(not isinstance(_plain(v), (dict, list)) for v in x):
                out.append("[" + ", ".join(_scalar(v) for v in x) + "]")
                return
            out.append("[\n")
            for i, v in enumerate(x):
                out.append(pad)
                emit(v, level + 1)
                out.append(",\n" if i < len(x) - 1 else "\n")
            out.append(end + "]")
        else:
            out.append(_scalar(x))

    emit(obj, 0)
    return "".join(out) + "\n"


def flatten(obj: Any, prefix: str = "") -> list[tuple[str, Any]]:
    obj = _plain(obj)
    if isinstance(obj, dict):
        rows = []
        for k, v in obj.items():
            rows.extend(flatten(v, f"{prefix}.{k}" if prefix else str(k)))
        return rows
    if isinstance(obj, list):
        rows = []
        for i, v in enumerate(obj):
            rows.extend(flatten(v, f"{prefix}[{i}]"))
        return rows
    return [(prefix, obj)]


def _text_value(v: Any) -> str:
    return _scalar(v).strip('"') if not isinstance(v, str) else v


def to_text(report: dict) -> str:
    lines = [f"{report.get('command', 'report')}: {report.get('status', '')}"]
    for k, v in flatten(report.get("results", report)):
        lines.append(f"  {k} = {_text_value(v)}")
    return "\n".join(lines) + "\n"


def to_csv(report: dict) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["key", "value"])
    for k, v in flatten(report):
        w.writerow([k, _text_value(v)])
    return buf.getvalue()


def rows_to_csv(header: list[str], rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def load_schema() -> dict:
    from importlib.resources import files

    return json.loads(files("vnhardy").joinpath("schemas/report.schema.json").read_text())
