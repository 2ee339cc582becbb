"""JSON and CSV report emission.

JSON documents carry ``schema_version`` and the full config echo.  Floats are
written in their shortest round-trip form; non-finite values become null.
"""

from __future__ import annotations

import json
import math
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from .trajectory import read_csv, write_csv

SCHEMA_VERSION = 1


def to_jsonable(obj: Any) -> Any:
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return to_jsonable(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if math.isfinite(v) else None
    if obj is None or isinstance(obj, str):
        return obj
    if hasattr(obj, "as_dict"):
        return to_jsonable(obj.as_dict())
    return str(obj)


def document(kind: str, report: Any, config_echo: dict | None = None) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "kind": kind,
        "config": to_jsonable(config_echo or {}),
        "report": to_jsonable(report),
    }


def write_json(path, doc: dict) -> None:
    text = json.dumps(doc, indent=2, sort_keys=True, allow_nan=False)
    Path(path).write_text(text + "\n")


def read_json(path) -> dict:
    return json.loads(Path(path).read_text())


def emit_report(
    path,
    fmt: str,
    *,
    kind: str = "",
    report: Any = None,
    config_echo: dict | None = None,
    columns: Sequence[str] = (),
    rows: Sequence[Sequence] = (),
    description: str = "",
) -> Path:
    """Write ``report`` as JSON or ``rows`` as CSV; returns the written path."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    if fmt == "json":
        write_json(path, document(kind, report, config_echo))
    elif fmt == "csv":
        write_csv(path, columns, rows, description or kind)
    else:
        raise ValueError(f"unknown report format {fmt!r}")
    return path


__all__ = ["SCHEMA_VERSION", "to_jsonable", "document", "write_json", "read_json", "emit_report", "read_csv"]
