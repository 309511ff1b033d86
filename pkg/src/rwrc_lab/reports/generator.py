"""Summary generator with Jinja2 template support.

Renders the human-readable ``summary.txt`` of an experiment run from the same
result mapping that goes into ``result.json``.
"""

from __future__ import annotations

import math
from typing import Any, Dict, List, Mapping, Sequence, Tuple

from jinja2 import Environment, PackageLoader, select_autoescape


def format_value(value: Any) -> str:
    """Short display form: floats to 10 significant digits, lists abbreviated."""
    if value is None:
        return "-"
    if isinstance(value, bool):
        return "yes" if value else "no"
    if isinstance(value, float):
        if not math.isfinite(value):
            return str(value)
        return f"{value:.10g}"
    if isinstance(value, (list, tuple)):
        shown = ", ".join(format_value(v) for v in list(value)[:6])
        return f"[{shown}{', ...' if len(value) > 6 else ''}]"
    return str(value)


class SummaryGenerator:
    """Generator for plain text run summaries.

    Attributes:
        env: Jinja2 Environment configured with PackageLoader
        title: Heading printed at the top of every summary
    """

    def __init__(self, title: str = "rwrc-lab experiment") -> None:
        self.title = title
        self.env = Environment(
            loader=PackageLoader("rwrc_lab.reports", "templates"),
            autoescape=select_autoescape(["html", "xml"]),
            trim_blocks=True,
            lstrip_blocks=True,
        )
        self.env.filters["fmt"] = format_value

    def _build_context(
        self,
        kind: str,
        digest: str,
        versions: Mapping[str, str],
        result: Mapping[str, Any],
        tables: Mapping[str, Sequence[Mapping[str, Any]]],
    ) -> Dict[str, Any]:
        """Headline scalars of the result plus the shape of every table."""
        headline: List[Tuple[str, Any]] = []
        details: List[str] = []
        for key in sorted(result):
            value = result[key]
            if isinstance(value, Mapping):
                details.append(key)
            elif isinstance(value, (list, tuple)) and value and isinstance(value[0], Mapping):
                details.append(key)
            else:
                headline.append((key, value))
        return {
            "title": self.title,
            "kind": kind,
            "config_hash": digest,
            "versions": sorted(versions.items()),
            "headline": headline,
            "details": details,
            "tables": [
                {"name": name, "rows": len(rows), "columns": list(rows[0].keys()) if rows else []}
                for name, rows in sorted(tables.items())
            ],
        }

    def generate_text(
        self,
        kind: str,
        digest: str,
        versions: Mapping[str, str],
        result: Mapping[str, Any],
        tables: Mapping[str, Sequence[Mapping[str, Any]]],
    ) -> str:
        """Render summary.txt for one run."""
        template = self.env.get_template("summary.txt")
        return template.render(**self._build_context(kind, digest, versions, result, tables))
