"""CSV/JSON writers with byte-stable number formatting."""
from __future__ import annotations

import csv
import json
from pathlib import Path
from typing import Iterable, Sequence


def fmt(value) -> str:
    """17 significant digits, scientific notation; ints and bools pass through."""
    if isinstance(value, (bool, int)) and not isinstance(value, float):
        return str(int(value)) if not isinstance(value, bool) else str(value).lower()
    try:
        f = float(value)
    except (TypeError, ValueError):
        return str(value)
    if f == 0.0:
        f = 0.0  # drop the sign of negative zero
    return f"{f:.16e}"


def write_csv(path, header: Sequence[str], rows: Iterable[Sequence]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([fmt(v) for v in row])
    return path


def write_json(path, payload) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True, default=_json_default)
        fh.write("\n")
    return path


def _json_default(obj):
    if hasattr(obj, "item"):
        return obj.item()
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    return str(obj)
