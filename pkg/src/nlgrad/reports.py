"""
Deterministic JSON and CSV writers for experiment reports.

JSON is written with sorted keys and a fixed layout so that identical inputs
give byte-identical files. Non-finite floats become the strings ``"NaN"``,
``"Infinity"`` and ``"-Infinity"`` (plain JSON has no literal for them). CSV
floats use 17 significant digits, which round-trips IEEE doubles.
"""

from __future__ import annotations

import csv
import enum
import json
import math
from pathlib import Path

import numpy as np

__all__ = ["to_jsonable", "dumps", "write_json", "write_csv", "format_cell"]


def to_jsonable(obj):
    """Recursively convert numpy scalars/arrays, enums, tuples and non-finite floats."""
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [to_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, enum.Enum):
        return obj.value
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if math.isnan(x):
            return "NaN"
        if math.isinf(x):
            return "Infinity" if x > 0 else "-Infinity"
        return x
    if obj is None or isinstance(obj, str):
        return obj
    if isinstance(obj, Path):
        return str(obj)
    return repr(obj)


def dumps(obj) -> str:
    return json.dumps(to_jsonable(obj), sort_keys=True, indent=2, allow_nan=False) + "\n"


def write_json(path, obj) -> None:
    Path(path).write_text(dumps(obj), encoding="utf-8")


def format_cell(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return f"{float(v):.17g}"
    return str(v)


def write_csv(path, rows) -> None:
    """First row is the header; later rows are formatted with :func:`format_cell`."""
    rows = list(rows)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow([str(c) for c in rows[0]])
        for row in rows[1:]:
            w.writerow([format_cell(c) for c in row])
