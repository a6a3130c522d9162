"""CSV and JSON output of result tables.

CSV floats are written with 17 significant digits, which round-trips every
double exactly; NaN is written as ``nan`` in CSV and ``null`` in JSON.
"""

from __future__ import annotations

import csv
import io
import json
import math
import sys
from pathlib import Path

FORMATS = ("csv", "json")


def format_value(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, int):
        return str(v)
    if isinstance(v, float):
        return format(v, ".17g")
    if hasattr(v, "dtype"):  # numpy scalar
        return format_value(v.item())
    return str(v)


def _json_value(v):
    if hasattr(v, "dtype"):
        v = v.item()
    if isinstance(v, float) and not math.isfinite(v):
        return None
    return v


def to_csv(rows, fields) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(fields)
    for row in rows:
        w.writerow([format_value(row.get(f)) for f in fields])
    return buf.getvalue()


def to_json(rows, fields, meta: dict | None = None) -> str:
    doc = dict(meta or {})
    doc["fields"] = list(fields)
    doc["rows"] = [{f: _json_value(row.get(f)) for f in fields} for row in rows]
    return json.dumps(doc, indent=1, allow_nan=False) + "\n"


def emit(rows, fields, fmt: str = "csv", path=None, meta: dict | None = None) -> str:
    """Write ``rows`` (dicts) restricted to ``fields`` in ``fmt``.

    ``path`` of ``None`` or ``"-"`` writes to standard output. Returns the
    text written. Raises ``OSError`` on write failure.
    """
    if fmt not in FORMATS:
        raise ValueError(f"format must be one of {FORMATS}")
    rows = list(rows)
    text = to_csv(rows, fields) if fmt == "csv" else to_json(rows, fields, meta)
    if path is None or str(path) == "-":
        sys.stdout.write(text)
    else:
        Path(path).write_text(text, encoding="utf-8")
    return text


def _parse(s: str):
    if s == "":
        return None
    if s in ("true", "false"):
        return s == "true"
    try:
        return int(s)
    except ValueError:
        pass
    try:
        return float(s)
    except ValueError:
        return s


def read_csv(path) -> tuple[list[str], list[dict]]:
    with open(path, encoding="utf-8", newline="") as fh:
        r = csv.reader(fh)
        fields = next(r)
        return fields, [{f: _parse(v) for f, v in zip(fields, rec)} for rec in r]


def read_json(path) -> tuple[list[str], list[dict]]:
    doc = json.loads(Path(path).read_text(encoding="utf-8"))
    return doc["fields"], doc["rows"]
