#!/usr/bin/env python3
# utils/output.py - JSON and CSV writers for result records and fields

import csv
import dataclasses
import json
import math
import os
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Sequence

import numpy as np


class NumpyEncoder(json.JSONEncoder):
    """JSON encoder that understands numpy scalars/arrays, paths and dataclasses."""

    def default(self, obj):
        if isinstance(obj, np.integer):
            return int(obj)
        if isinstance(obj, np.floating):
            return float(obj)
        if isinstance(obj, np.bool_):
            return bool(obj)
        if isinstance(obj, np.ndarray):
            return obj.tolist()
        if isinstance(obj, Path):
            return str(obj)
        if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
            return dataclasses.asdict(obj)
        return super().default(obj)


def _clean(value: Any) -> Any:
    # JSON has no inf/nan, keep them as strings
    if isinstance(value, float) and not math.isfinite(value):
        return str(value)
    if isinstance(value, dict):
        return {k: _clean(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_clean(v) for v in value]
    return value


def to_json_text(data: Any) -> str:
    """Canonical JSON text: sorted keys, numpy-aware."""
    return json.dumps(_clean(json.loads(json.dumps(data, cls=NumpyEncoder))), sort_keys=True, indent=2)


def ensure_dir(path: str) -> str:
    if path:
        os.makedirs(path, exist_ok=True)
    return path


def write_json(path: str, data: Any) -> str:
    ensure_dir(os.path.dirname(path))
    with open(path, "w") as f:
        f.write(to_json_text(data))
        f.write("\n")
    return path


def write_csv(path: str, rows: Sequence[Dict[str, Any]], fieldnames: Optional[List[str]] = None) -> str:
    """Write dict rows; columns are the union of keys in first-seen order unless given."""
    ensure_dir(os.path.dirname(path))
    if fieldnames is None:
        fieldnames = _columns(rows)
    with open(path, "w", newline="") as f:
        writer = csv.DictWriter(f, fieldnames=fieldnames, extrasaction="ignore")
        writer.writeheader()
        for row in rows:
            writer.writerow({k: _cell(row.get(k, "")) for k in fieldnames})
    return path


def _columns(rows: Iterable[Dict[str, Any]]) -> List[str]:
    seen: Dict[str, None] = {}
    for row in rows:
        for key in row:
            seen.setdefault(key, None)
    return list(seen)


def _cell(value: Any) -> Any:
    if isinstance(value, (np.floating, float)):
        return repr(float(value))
    if isinstance(value, np.integer):
        return int(value)
    return value
