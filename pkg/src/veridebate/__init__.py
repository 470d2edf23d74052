"""veridebate: staged two-team debates over news items, synthesized into
judge reports and classified by a role-aware debate-graph network."""

__version__ = "0.1.0"

from .domain import (
    DebateConfig,
    DebateLog,
    DebateRole,
    DebateStage,
    DebateTurn,
    NewsItem,
    Stance,
    SummaryReport,
    VerdictHint,
    validate_log,
)

__all__ = [
    "DebateConfig",
    "DebateLog",
    "DebateRole",
    "DebateStage",
    "DebateTurn",
    "NewsItem",
    "Stance",
    "SummaryReport",
    "VerdictHint",
    "validate_log",
    "__version__",
]
