"""Shot files (CSV) and reports (JSON).

Shot files are UTF-8 with LF line endings, header ``shot,m_s,m_i`` and one
row per pulse; values are electrons. Floats in shot files and reports are
written with 17 significant digits so that reading them back is exact.
"""
from __future__ import annotations

import json
import math
import os
from pathlib import Path
from typing import Any, Iterable, Sequence

import numpy as np

from .errors import DataError
from .series import ShotSeries

SHOT_HEADER = ("shot", "m_s", "m_i")


def fmt(x: float) -> str:
    return format(float(x), ".17g")


def write_shots(path: str | os.PathLike, series: ShotSeries) -> None:
    lines = [",".join(SHOT_HEADER)]
    lines.extend(f"{k},{fmt(a)},{fmt(b)}" for k, (a, b) in enumerate(zip(series.m_s, series.m_i)))
    _write_text(path, "\n".join(lines) + "\n")


def read_shots(path: str | os.PathLike) -> ShotSeries:
    """Parse a shot file; malformed rows raise :class:`DataError` with the line number."""
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc}") from None
    lines = text.splitlines()
    if not lines or tuple(c.strip() for c in lines[0].split(",")) != SHOT_HEADER:
        raise DataError(f"{path}:1: expected header {','.join(SHOT_HEADER)}")
    m_s, m_i = [], []
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        parts = line.split(",")
        if len(parts) != 3:
            raise DataError(f"{path}:{lineno}: expected 3 fields, got {len(parts)}")
        try:
            a, b = float(parts[1]), float(parts[2])
        except ValueError:
            raise DataError(f"{path}:{lineno}: non-numeric value") from None
        if not (math.isfinite(a) and math.isfinite(b)):
            raise DataError(f"{path}:{lineno}: non-finite value")
        m_s.append(a)
        m_i.append(b)
    if not m_s:
        raise DataError(f"{path}: no shot rows")
    return ShotSeries(np.array(m_s), np.array(m_i), meta={"source_file": str(path)})


def write_table(path: str | os.PathLike, header: Sequence[str], rows: Iterable[Sequence[Any]]) -> None:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(fmt(v) if isinstance(v, (float, np.floating)) else str(v) for v in row))
    _write_text(path, "\n".join(lines) + "\n")


def _encode(obj: Any, indent: int, level: int) -> str:
    pad = " " * (indent * (level + 1))
    end = " " * (indent * level)
    if obj is None:
        return "null"
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if isinstance(obj, (int, np.integer)) and not isinstance(obj, bool):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return fmt(obj) if math.isfinite(obj) else "null"
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f'{pad}{_encode(str(k), indent, 0)}: {_encode(v, indent, level + 1)}' for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        if len(obj) == 0:
            return "[]"
        return "[" + ", ".join(_encode(v, indent, level + 1) for v in obj) + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps(obj: Any, indent: int = 2) -> str:
    """JSON text with floats at 17 significant digits and NaN as ``null``."""
    return _encode(obj, indent, 0) + "\n"


def write_json(path: str | os.PathLike, obj: Any) -> None:
    _write_text(path, dumps(obj))


def _write_text(path, text: str) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)
