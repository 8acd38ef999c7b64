"""Machine-readable scenario output.

Files are written to a temporary sibling and moved into place with
os.replace, so a reader never sees a partial file.
"""

import csv
import io
import json
import logging
import os
import tempfile
from pathlib import Path
from typing import Union

import numpy as np

from app.models.schemas import Report

logger = logging.getLogger(__name__)

FLOAT_FORMAT = ".15g"
FORMATS = ("json", "csv")


def _plain(value):
    if isinstance(value, np.ndarray):
        if np.iscomplexobj(value):
            raise TypeError("complex arrays must be split into real and imaginary columns")
        return value.tolist()
    if isinstance(value, np.generic):
        return value.item()
    return value


def _cell(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (float, np.floating)):
        return format(float(value), FLOAT_FORMAT)
    if value is None:
        return ""
    return str(value)


def report_to_dict(report: Report) -> dict:
    payload = {"scenario": report.scenario}
    payload.update({name: _plain(value) for name, value in report.scalars.items()})
    payload.update({name: _plain(column) for name, column in report.table.items()})
    payload.update({name: _plain(values) for name, values in report.series.items()})
    return payload


def render_json(report: Report) -> str:
    # repr-exact floats keep 17 significant digits
    return json.dumps(report_to_dict(report), indent=2, sort_keys=True) + "\n"


def render_csv(report: Report) -> str:
    """Scalars as '# key = value' lines, then a header row and one row per record."""
    buffer = io.StringIO()
    buffer.write(f"# scenario = {report.scenario}\n")
    for name in sorted(report.scalars):
        buffer.write(f"# {name} = {_cell(report.scalars[name])}\n")
    if report.table:
        writer = csv.writer(buffer, lineterminator="\n")
        names = list(report.table)
        writer.writerow(names)
        for row in zip(*(report.table[name] for name in names)):
            writer.writerow([_cell(value) for value in row])
    return buffer.getvalue()


def read_csv(text: str):
    """Inverse of render_csv: (scalars as strings, columns as lists of strings)."""
    scalars, body = {}, []
    for line in text.splitlines():
        if line.startswith("# "):
            key, _, value = line[2:].partition(" = ")
            scalars[key] = value
        elif line:
            body.append(line)
    rows = list(csv.reader(body))
    if not rows:
        return scalars, {}
    header, records = rows[0], rows[1:]
    return scalars, {name: [record[i] for record in records] for i, name in enumerate(header)}


def atomic_write(path: Union[str, Path], text: str) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", dir=path.parent)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as handle:
            handle.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


def write_report(report: Report, path: Union[str, Path], fmt: str = "json") -> Path:
    if fmt not in FORMATS:
        raise ValueError(f"unknown output format {fmt!r}")
    text = render_json(report) if fmt == "json" else render_csv(report)
    written = atomic_write(path, text)
    logger.debug("wrote %s (%d bytes)", written, len(text))
    return written
