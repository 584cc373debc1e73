"""Deterministic CSV and JSON writers."""

from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

__all__ = ["format_value", "write_csv", "write_json"]


def format_value(v) -> str:
    """Shortest round-trip text of a scalar; complex values are rejected."""
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, (complex, np.complexfloating)):
        raise TypeError("split complex values into real and imaginary columns")
    return str(v)


def write_csv(path, header, rows) -> Path:
    """UTF-8 CSV with RFC-4180 quoting and CRLF line ends."""
    path = Path(path)
    with path.open("w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\r\n", quoting=csv.QUOTE_MINIMAL)
        w.writerow(header)
        for row in rows:
            w.writerow([format_value(v) for v in row])
    return path


def _default(o):
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, (np.integer,)):
        return int(o)
    if isinstance(o, (np.floating,)):
        return float(o)
    if isinstance(o, (np.bool_,)):
        return bool(o)
    if isinstance(o, complex):
        return [o.real, o.imag]
    raise TypeError(f"not JSON serializable: {type(o).__name__}")


def write_json(path, obj) -> Path:
    """JSON with sorted keys, two-space indent and a trailing newline."""
    path = Path(path)
    path.write_text(json.dumps(obj, sort_keys=True, indent=2, default=_default, allow_nan=True) + "\n",
                    encoding="utf-8")
    return path
