"""
Utility functions for report serialization and file output
"""
import csv
import io
import json
import sys
from typing import Any, Dict, Iterable, Optional, TextIO

import numpy as np
from pydantic import BaseModel

# Shortest repr of a double parses back to the same double
SAMPLE_FORMAT = "%.17g"


def format_float(value: float) -> str:
    """
    Round-trip-safe decimal text for a float

    Args:
        value: Any real number

    Returns:
        Shortest string that parses back to the same double
    """
    return repr(float(value))


def to_canonical_json(payload: Any) -> str:
    """
    Serialize a model or plain structure as sorted-key, indented JSON

    Equal inputs always give identical bytes.
    """
    if isinstance(payload, BaseModel):
        payload = payload.model_dump(mode="json", exclude_none=True)
    return json.dumps(payload, sort_keys=True, indent=2) + "\n"


def report_payload(config: BaseModel, report: BaseModel) -> Dict[str, Any]:
    """Report together with the resolved config that regenerates it"""
    return {
        "config": config.model_dump(mode="json", exclude_none=True),
        "report": report.model_dump(mode="json", exclude_none=True),
    }


def flatten(payload: Dict[str, Any], prefix: str = "") -> Dict[str, Any]:
    """
    Flatten nested dicts into dotted keys; lists become JSON text

    Example: {"one_shot_mc": {"mean": 0.1}} -> {"one_shot_mc.mean": 0.1}
    """
    flat: Dict[str, Any] = {}
    for key, value in payload.items():
        name = f"{prefix}{key}"
        if isinstance(value, dict):
            flat.update(flatten(value, f"{name}."))
        elif isinstance(value, list):
            flat[name] = json.dumps(value)
        else:
            flat[name] = value
    return flat


def _cell(value: Any) -> str:
    if isinstance(value, bool) or value is None:
        return json.dumps(value)
    if isinstance(value, float):
        return format_float(value)
    return str(value)


def one_row_csv(payload: Dict[str, Any]) -> str:
    """Header plus a single row, columns sorted by dotted key"""
    flat = flatten(payload)
    keys = sorted(flat)
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(keys)
    writer.writerow([_cell(flat[k]) for k in keys])
    return buffer.getvalue()


def samples_csv(rows: np.ndarray, prefix: str = "u") -> str:
    """
    Scenario matrix as CSV with header u1..un (or tau1..taun)

    Args:
        rows: (scenarios, n) array
        prefix: Column name prefix

    Returns:
        CSV text, one row per scenario, full double precision
    """
    rows = np.atleast_2d(rows)
    header = ",".join(f"{prefix}{i + 1}" for i in range(rows.shape[1]))
    buffer = io.StringIO()
    np.savetxt(buffer, rows, delimiter=",", fmt=SAMPLE_FORMAT, header=header, comments="")
    return buffer.getvalue()


def pickands_csv(t: Iterable[float], values: Iterable[float]) -> str:
    """Two-column CSV (t, A) for plotting"""
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(["t", "A"])
    for ti, ai in zip(t, values):
        writer.writerow([format_float(ti), format_float(ai)])
    return buffer.getvalue()


def write_output(text: str, path: Optional[str] = None, stream: Optional[TextIO] = None) -> None:
    """
    Write report text to a file, or to stdout when path is None or '-'
    """
    if path is None or path == "-":
        (stream or sys.stdout).write(text)
        return
    with open(path, "w", encoding="utf-8", newline="") as handle:
        handle.write(text)
