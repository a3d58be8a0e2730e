"""Deterministic result files: CSV with '#' metadata headers and
canonical JSON summaries.  Numbers carry 17 significant digits so files
round-trip losslessly for regression comparisons."""

from __future__ import annotations

import json

import numpy as np


def fmt(value) -> str:
    """17-significant-digit text form; NaN becomes the empty sentinel."""
    if value is None:
        return ""
    if isinstance(value, str):
        return value
    v = float(value)
    if np.isnan(v):
        return ""
    return format(v, ".17g")


def write_csv(path, columns, meta=None):
    """``columns`` is a list of (name, values); ``meta`` a dict rendered as
    '# key: value' header lines (scenario digest first, when present)."""
    names = [name for name, _ in columns]
    arrays = [np.asarray(vals, dtype=object) for _, vals in columns]
    n = len(arrays[0]) if arrays else 0
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for key in sorted(meta or {}, key=lambda k: (k != "scenario_digest", k)):
            fh.write(f"# {key}: {meta[key]}\n")
        fh.write(",".join(names) + "\n")
        for i in range(n):
            fh.write(",".join(fmt(a[i]) for a in arrays) + "\n")


def _cell(text: str) -> float:
    # text columns (event kinds, labels) read as NaN in the float view
    try:
        return float(text) if text else np.nan
    except ValueError:
        return np.nan


def read_csv(path):
    """(meta dict, column dict of float arrays; empty/text cells -> NaN)."""
    meta, names, rows = {}, None, []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.rstrip("\n")
            if line.startswith("#"):
                key, _, val = line[1:].partition(":")
                meta[key.strip()] = val.strip()
            elif names is None:
                names = line.split(",")
            elif line:
                rows.append([_cell(c) for c in line.split(",")])
    data = np.array(rows) if rows else np.empty((0, len(names or [])))
    return meta, {name: data[:, i] for i, name in enumerate(names or [])}


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, np.ndarray)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return None if np.isnan(v) else v
    return obj


def write_json(path, obj):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(_jsonable(obj), fh, sort_keys=True, indent=2)
        fh.write("\n")
