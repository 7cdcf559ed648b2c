"""Check registry"""

import time
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence

import structlog

from cbrw.checks.base import FAILED, PASSED, SKIPPED, BaseCheck, CheckResult
from cbrw.context import RunContext
from cbrw.errors import CBRWError, ConfigError

logger = structlog.get_logger()


@dataclass
class VerifyReport:
    results: List[CheckResult] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not any(result.blocking for result in self.results)

    def counts(self) -> Dict[str, int]:
        counts: Dict[str, int] = {}
        for result in self.results:
            counts[result.status] = counts.get(result.status, 0) + 1
        return counts

    def to_json(self) -> Dict[str, Any]:
        return {
            "passed": self.passed,
            "summary": self.counts(),
            "checks": [result.to_json() for result in self.results],
        }


class CheckRegistry:
    """Manages the acceptance checks"""

    def __init__(self):
        self.checks: Dict[str, BaseCheck] = {}

    def register(self, check: BaseCheck) -> None:
        if not check.check_id:
            raise ValueError(f"{check.name} has no check id")
        if check.check_id in self.checks:
            raise ValueError(f"Duplicate check id: {check.check_id}")
        self.checks[check.check_id] = check
        logger.debug(f"Registered check: {check.check_id} ({check.name})")

    def get_check(self, check_id: str) -> Optional[BaseCheck]:
        return self.checks.get(check_id)

    def list_checks(self) -> List[Dict[str, Any]]:
        return [check.metadata for check in self.checks.values()]

    def select(self, ids: Optional[Sequence[str]] = None) -> List[BaseCheck]:
        if not ids:
            return [check for check in self.checks.values() if check.enabled]
        unknown = [i for i in ids if i not in self.checks]
        if unknown:
            raise ConfigError(f"Unknown check ids: {', '.join(unknown)}")
        return [self.checks[i] for i in ids]

    def run_check(self, check: BaseCheck, context: RunContext) -> CheckResult:
        """Run one check; any exception becomes an error result for that check only"""
        started = time.perf_counter()
        try:
            reason = check.skip_reason(context)
            if reason:
                logger.info(f"Check skipped: {check.check_id}", reason=reason)
                return check.skipped(reason)
            result = check.run(context)
        except CBRWError as e:
            logger.error(f"Check {check.check_id} failed with {type(e).__name__}: {e}")
            result = check.errored(e)
        except Exception as e:
            logger.exception(f"Check {check.check_id} crashed: {e}")
            result = check.errored(e)
        result.runtime = time.perf_counter() - started
        if check.time_limit is not None:
            result.detail["time_limit_s"] = check.time_limit
            result.detail["within_time_limit"] = result.runtime < check.time_limit

        log = logger.info if result.status in (PASSED, SKIPPED) else logger.warning
        log(
            f"Check {check.check_id}: {result.status}",
            measured=result.measured,
            threshold=result.threshold,
            runtime=round(result.runtime, 3),
        )
        return result

    def run(self, context: RunContext, ids: Optional[Sequence[str]] = None) -> VerifyReport:
        report = VerifyReport()
        for check in self.select(ids):
            report.results.append(self.run_check(check, context))
        failed = sum(result.status == FAILED for result in report.results)
        logger.info("Acceptance battery finished", passed=report.passed, failed=failed)
        return report
