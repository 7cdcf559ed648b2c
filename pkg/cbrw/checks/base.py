"""Base acceptance check framework"""

from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from typing import Any, Dict, Optional

import structlog

from cbrw.context import RunContext
from cbrw.errors import ConfigError

logger = structlog.get_logger()

PASSED = "passed"
FAILED = "failed"
SKIPPED = "skipped"
ERROR = "error"


@dataclass
class CheckResult:
    check_id: str
    name: str
    status: str
    measured: Any = None
    threshold: Any = None
    detail: Dict[str, Any] = field(default_factory=dict)
    runtime: float = 0.0

    @property
    def passed(self) -> bool:
        return self.status == PASSED

    @property
    def blocking(self) -> bool:
        """True when the result fails the battery"""
        return self.status in (FAILED, ERROR)

    def to_json(self) -> Dict[str, Any]:
        return {
            "id": self.check_id,
            "name": self.name,
            "status": self.status,
            "passed": self.passed,
            "measured": self.measured,
            "threshold": self.threshold,
            "detail": self.detail,
            "runtime_s": self.runtime,
        }


class BaseCheck(ABC):
    """Abstract base class for all acceptance checks"""

    check_id = ""
    description = ""
    time_limit: Optional[float] = None

    def __init__(self, options: Optional[Dict[str, Any]] = None):
        """options override class settings such as tolerance or time_limit; "enabled" toggles"""
        options = dict(options or {})
        self.name = self.__class__.__name__
        self.enabled = bool(options.pop("enabled", True))
        for key, value in options.items():
            if not self._is_setting(key):
                raise ConfigError(f"{self.check_id or self.name} has no setting '{key}'")
            setattr(self, key, value)
        self.options = options

    @classmethod
    def _is_setting(cls, key: str) -> bool:
        if key.startswith("_") or key in ("check_id", "description") or not hasattr(cls, key):
            return False
        default = getattr(cls, key)
        return not (callable(default) or isinstance(default, property))

    def skip_reason(self, context: RunContext) -> Optional[str]:
        """Why the check does not apply to this run; None when it does"""
        return None

    @abstractmethod
    def run(self, context: RunContext) -> CheckResult:
        """Compute the measured value and compare it with the threshold"""

    def result(
        self, passed: bool, measured: Any, threshold: Any, **detail: Any
    ) -> CheckResult:
        return CheckResult(
            check_id=self.check_id,
            name=self.name,
            status=PASSED if passed else FAILED,
            measured=measured,
            threshold=threshold,
            detail=detail,
        )

    def skipped(self, reason: str) -> CheckResult:
        return CheckResult(self.check_id, self.name, SKIPPED, detail={"reason": reason})

    def errored(self, error: Exception) -> CheckResult:
        return CheckResult(
            self.check_id,
            self.name,
            ERROR,
            detail={"error": type(error).__name__, "message": str(error)},
        )

    @property
    def metadata(self) -> Dict[str, Any]:
        return {
            "id": self.check_id,
            "name": self.name,
            "description": self.description,
            "enabled": self.enabled,
            "options": self.options,
        }
