"""Utilities"""

import logging
from typing import Iterable

import numpy as np
import structlog


def setup_logging(log_level: str = "INFO", log_format: str = "console") -> None:
    """Configure structured logging"""

    # Convert string log level to logging constant
    numeric_level = getattr(logging, log_level.upper(), logging.INFO)

    processors = [
        structlog.contextvars.merge_contextvars,
        structlog.processors.add_log_level,
        structlog.processors.TimeStamper(fmt="iso"),
        structlog.processors.StackInfoRenderer(),
        structlog.processors.format_exc_info,
    ]

    if log_format == "json":
        processors.append(structlog.processors.JSONRenderer(ensure_ascii=False))
    else:
        processors.append(structlog.dev.ConsoleRenderer())

    structlog.configure(
        processors=processors,
        wrapper_class=structlog.make_filtering_bound_logger(numeric_level),
        context_class=dict,
        logger_factory=structlog.PrintLoggerFactory(),
        cache_logger_on_first_use=True,
    )


def format_float(value: float) -> str:
    """Decimal representation with 17 significant digits"""
    return f"{float(value):.17g}"


def format_floats(values: Iterable[float]) -> list[str]:
    return [format_float(v) for v in values]


def replicate_rng(seed: int, *key: int) -> np.random.Generator:
    """Independent generator for (seed, key...) via SeedSequence spawn keys"""
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=tuple(key)))


def jsonable(value):
    """Convert numpy scalars and arrays into plain JSON types"""
    if isinstance(value, dict):
        return {str(k): jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return jsonable(value.tolist())
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.floating):
        return float(value)
    if isinstance(value, np.bool_):
        return bool(value)
    return value
