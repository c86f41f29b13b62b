"""Report serialization, schema validation and per-pair CSV output."""

from __future__ import annotations

import csv
import io
import json
import math
from importlib import resources
from pathlib import Path

import jsonschema
import numpy as np

SCHEMA_VERSION = "1.0"
CSV_COLUMNS = ("x1", "y1", "x2", "y2", "k", "ell", "cone", "qc", "gh_ratio")


def clean(obj):
    """Convert a report tree to plain JSON types; non-finite floats become strings."""
    if isinstance(obj, dict):
        return {str(k): clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [clean(v) for v in obj.tolist()]
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        if math.isfinite(v):
            return v
        return "nan" if math.isnan(v) else ("inf" if v > 0 else "-inf")
    return obj


def dumps(report: dict) -> str:
    return json.dumps(clean(report), indent=2, sort_keys=True, allow_nan=False) + "\n"


def load_schema() -> dict:
    text = resources.files("qhgeo").joinpath("schema/report.schema.json").read_text()
    return json.loads(text)


def validate(report: dict) -> None:
    """Raise ``jsonschema.ValidationError`` unless the report matches the shipped schema."""
    jsonschema.validate(clean(report), load_schema())


def write_report(report: dict, path) -> None:
    Path(path).write_text(dumps(report))


def pairs_csv(records: list[dict]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for r in records:
        w.writerow([repr(float(r[c])) for c in CSV_COLUMNS])
    return buf.getvalue()


def write_csv(records: list[dict], path) -> None:
    Path(path).write_text(pairs_csv(records))
