"""Plain-text run summaries rendered from Jinja2 templates."""

from .generator import SummaryGenerator

__all__ = ["SummaryGenerator"]
