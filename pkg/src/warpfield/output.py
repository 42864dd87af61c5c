"""Byte-stable JSON and CSV emission with 12 significant digits."""

from __future__ import annotations

import csv
import io
import json
import math
from typing import Any, Iterable, Sequence

import numpy as np

SCHEMA_VERSION = 1


def fmt(value: float) -> str:
    return f"{float(value):.12g}"


def round_floats(obj: Any) -> Any:
    """Recursively round floats to 12 significant digits; non-finite values become strings."""
    if isinstance(obj, bool) or obj is None or isinstance(obj, str):
        return obj
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        if not math.isfinite(v):
            return "nan" if math.isnan(v) else ("inf" if v > 0 else "-inf")
        r = float(fmt(v))
        return 0.0 if r == 0 else r
    if isinstance(obj, np.ndarray):
        return round_floats(obj.tolist())
    if isinstance(obj, dict):
        return {str(k): round_floats(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [round_floats(v) for v in obj]
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def dumps(doc: dict, versioned: bool = True) -> str:
    body = {"schema": SCHEMA_VERSION, **doc} if versioned else doc
    return json.dumps(round_floats(body), indent=2) + "\n"


def csv_text(header: Sequence[str], rows: Iterable[Sequence[float]]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([fmt(v) for v in row])
    return buf.getvalue()
