"""Run reports and their JSON / CSV / table renderings.

JSON numbers are written with 17 significant digits, enough to round-trip
any double. Non-finite values become the strings "inf", "-inf" and "nan".
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import IoFailure

FORMATS = ("json", "csv", "table")
PATH_STAT_COLUMNS = ("time", "statistic", "mean", "std_error", "n_paths")


@dataclass
class Report:
    command: list
    input_digest: str
    results: dict
    tool_version: str
    wall_clock: float
    # Rows for the path-statistics CSV, in PATH_STAT_COLUMNS order.
    path_stats: list | None = None

    def to_dict(self) -> dict:
        return {
            "command": self.command,
            "input_digest": self.input_digest,
            "tool_version": self.tool_version,
            "wall_clock": self.wall_clock,
            "results": self.results,
        }


def digest(blobs) -> str:
    h = hashlib.sha256()
    for blob in blobs:
        h.update(len(blob).to_bytes(8, "big"))
        h.update(blob)
    return h.hexdigest()


def fmt_float(v: float) -> str:
    if math.isnan(v):
        return "nan"
    if math.isinf(v):
        return "inf" if v > 0 else "-inf"
    return format(v, ".17g")


def plain(obj):
    """Convert numpy containers and scalars into JSON-ready Python values."""
    if isinstance(obj, dict):
        return {str(k): plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return plain(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return float(obj)
    return obj


def _encode(obj, indent: int, level: int) -> str:
    pad = " " * (indent * (level + 1))
    end = " " * (indent * level)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(k)}: {_encode(v, indent, level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, list):
        if not obj:
            return "[]"
        if all(not isinstance(v, (dict, list)) for v in obj):
            return "[" + ", ".join(_encode(v, indent, level) for v in obj) + "]"
        return "[\n" + ",\n".join(pad + _encode(v, indent, level + 1) for v in obj) + "\n" + end + "]"
    if isinstance(obj, bool) or obj is None:
        return json.dumps(obj)
    if isinstance(obj, float):
        text = fmt_float(obj)
        return text if math.isfinite(obj) else json.dumps(text)
    return json.dumps(obj)


def to_json(data) -> str:
    return _encode(plain(data), 2, 0) + "\n"


def from_json(text: str):
    """Inverse of ``to_json``: non-finite markers come back as floats."""
    def fix(v):
        if isinstance(v, dict):
            return {k: fix(x) for k, x in v.items()}
        if isinstance(v, list):
            return [fix(x) for x in v]
        if v in ("inf", "-inf", "nan"):
            return float(v)
        return v
    return fix(json.loads(text))


def flatten(data, prefix: str = "") -> list[tuple[str, object]]:
    """Dotted-key rows for the scalar leaves of a nested structure."""
    rows = []
    if isinstance(data, dict):
        for k, v in data.items():
            rows += flatten(v, f"{prefix}.{k}" if prefix else str(k))
    elif isinstance(data, list):
        for i, v in enumerate(data):
            rows += flatten(v, f"{prefix}[{i}]")
    else:
        rows.append((prefix, data))
    return rows


def _cell(v) -> str:
    if isinstance(v, bool) or v is None:
        return json.dumps(v)
    if isinstance(v, float):
        return fmt_float(v)
    return str(v)


def to_csv(report: Report) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    if report.path_stats is not None:
        w.writerow(PATH_STAT_COLUMNS)
        for row in report.path_stats:
            w.writerow([_cell(plain(v)) for v in row])
    else:
        w.writerow(("key", "value"))
        for k, v in flatten(plain(report.results)):
            w.writerow((k, _cell(v)))
    return buf.getvalue()


def to_table(report: Report) -> str:
    rows = [("command", " ".join(report.command)), ("input_digest", report.input_digest),
            ("tool_version", report.tool_version)]
    rows += flatten(plain(report.results))
    width = max(len(k) for k, _ in rows)
    return "".join(f"{k.ljust(width)}  {_cell(v)}\n" for k, v in rows)


def render(report: Report, fmt: str) -> str:
    if fmt == "json":
        return to_json(report.to_dict())
    if fmt == "csv":
        return to_csv(report)
    if fmt == "table":
        return to_table(report)
    raise ValueError(f"unknown format {fmt!r}")


_EXT = {"json": "json", "csv": "csv", "table": "txt"}


def emit_report(report: Report, fmt: str, out_dir=None, stream=None) -> Path | None:
    """Write the report to ``out_dir/<command>.<ext>`` or to ``stream``.

    With an output directory the JSON report is always written as well, so
    CSV or table output has the full record next to it.
    """
    text = render(report, fmt)
    if out_dir is None:
        stream.write(text)
        return None
    try:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        name = report.command[0]
        target = out / f"{name}.{_EXT[fmt]}"
        target.write_text(text)
        if fmt != "json":
            (out / f"{name}.json").write_text(render(report, "json"))
    except OSError as exc:
        raise IoFailure(f"cannot write report: {exc}") from None
    return target
