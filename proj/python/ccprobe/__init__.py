"""Conceptual consistency probing: background knowledge vs. task accuracy."""

from ccprobe._core import (
    BackendError,
    BackgroundScore,
    ConfigError,
    DataError,
    IncompatibleVersionError,
    MockProtocolError,
    ParseError,
    PreconditionError,
    ProtocolError,
    ScoringError,
    UndefinedMetricError,
    __version__,
    average_precision,
    fact_prompts,
    precision_recall_curve,
    relations,
    render_fact_question,
    run,
    write_synthetic,
)

__all__ = [
    "BackendError",
    "BackgroundScore",
    "ConfigError",
    "DataError",
    "IncompatibleVersionError",
    "MockProtocolError",
    "ParseError",
    "PreconditionError",
    "ProtocolError",
    "ScoringError",
    "UndefinedMetricError",
    "__version__",
    "average_precision",
    "fact_prompts",
    "precision_recall_curve",
    "relations",
    "render_fact_question",
    "run",
    "write_synthetic",
]
