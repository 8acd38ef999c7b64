"""Human-readable run summary rendered from a jinja2 template."""

import logging
from pathlib import Path
from typing import Optional

from jinja2 import Environment, FileSystemLoader, StrictUndefined

from app.models.schemas import Report

logger = logging.getLogger(__name__)

TEMPLATE_DIR = Path(__file__).resolve().parent / "templates"

env = Environment(
    loader=FileSystemLoader(str(TEMPLATE_DIR)),
    undefined=StrictUndefined,
    keep_trailing_newline=True,
)


def _fmt(value) -> str:
    if isinstance(value, bool):
        return "yes" if value else "no"
    if isinstance(value, float):
        return format(value, ".6g")
    return "-" if value is None else str(value)


env.filters["fmt"] = _fmt


def render_summary(report: Report, output: Optional[Path] = None) -> str:
    template = env.get_template("summary.txt.j2")
    table_rows = len(next(iter(report.table.values()))) if report.table else 0
    return template.render(
        report=report,
        scalars=sorted(report.scalars.items()),
        table_columns=list(report.table),
        table_rows=table_rows,
        output=output,
    )
