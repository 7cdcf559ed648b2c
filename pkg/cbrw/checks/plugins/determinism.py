"""Byte-level reproducibility of the exported files"""

import tempfile
from pathlib import Path
from typing import Dict, List

import structlog

from cbrw.checks.base import BaseCheck, CheckResult
from cbrw.config import RunConfig
from cbrw.context import RunContext
from cbrw.export import (
    malthus_document,
    traces_document,
    write_front_csv,
    write_json,
    write_snapshots_csv,
)

logger = structlog.get_logger()


class DeterminismCheck(BaseCheck):
    """Two fresh runs of a shortened simulation and the solver must write identical files"""

    check_id = "C12"
    description = "Identical config and seed give byte-identical CSV and JSON outputs"
    runs = 10
    horizon = 4.0

    def _short_config(self, config: RunConfig) -> RunConfig:
        simulate = config.simulate.model_copy(
            update={
                "runs": min(config.simulate.runs, self.runs),
                "horizon": min(config.simulate.horizon, self.horizon),
                "checkpoints": None,
                "snapshot_times": None,
                "fit_window": None,
            }
        )
        return config.model_copy(update={"simulate": simulate})

    def _write(self, config: RunConfig, seed: int, directory: Path) -> List[Path]:
        context = RunContext(config, seed=seed)
        metadata = context.metadata()
        document = malthus_document(context.solution, metadata)
        paths = [write_json(document, directory / "malthus.json")]
        if context.nu_override is not None or context.supercritical:
            paths.append(write_front_csv(context.front_sample, directory / "front.csv"))
        traces = context.traces
        paths.append(write_json(traces_document(traces, metadata), directory / "traces.json"))
        snapshots = [snapshot for trace in traces for snapshot in trace.snapshots]
        paths.append(write_snapshots_csv(snapshots, directory / "snapshots.csv"))
        return paths

    def run(self, context: RunContext) -> CheckResult:
        config = self._short_config(context.config)
        with tempfile.TemporaryDirectory() as root:
            first = self._write(config, context.seed, Path(root) / "first")
            second = self._write(config, context.seed, Path(root) / "second")
            identical: Dict[str, bool] = {
                a.name: a.read_bytes() == b.read_bytes() for a, b in zip(first, second)
            }
        mismatched = sorted(name for name, same in identical.items() if not same)
        return self.result(
            not mismatched and len(first) == len(second),
            len(mismatched),
            0,
            files=identical,
            runs=config.simulate.runs,
            horizon=config.simulate.horizon,
        )
