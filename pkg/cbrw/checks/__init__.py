"""Acceptance battery"""

from typing import Any, Dict, Mapping, Optional

from cbrw.checks.base import BaseCheck, CheckResult
from cbrw.checks.manager import CheckRegistry, VerifyReport
from cbrw.checks.plugins import DEFAULT_CHECKS
from cbrw.errors import ConfigError


def default_registry(options: Optional[Mapping[str, Dict[str, Any]]] = None) -> CheckRegistry:
    """Registry holding C1..C12, with per-check settings keyed by check id"""
    options = dict(options or {})
    registry = CheckRegistry()
    for check_class in DEFAULT_CHECKS:
        registry.register(check_class(options.pop(check_class.check_id, None)))
    if options:
        raise ConfigError(f"Settings given for unknown checks: {', '.join(sorted(options))}")
    return registry


__all__ = ["BaseCheck", "CheckRegistry", "CheckResult", "VerifyReport", "default_registry"]
