"""Subcommand handlers"""

from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

import numpy as np
import structlog

from cbrw.checks import CheckRegistry, default_registry
from cbrw.context import RunContext
from cbrw.errors import AllExtinct, ConfigError, NumericalError
from cbrw.export import (
    front_document,
    malthus_document,
    traces_document,
    write_front_csv,
    write_front_svg,
    write_json,
    write_snapshots_csv,
)
from cbrw.simulate.spread import conditioned_spread
from cbrw.utils import replicate_rng

logger = structlog.get_logger()

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3
EXIT_ACCEPTANCE = 4

GRADIENT_POINTS = 8
GRADIENT_STEP = 1e-6
GRADIENT_TOL = 1e-6


class CommandHandlers:
    """Handlers for malthus, front, simulate, verify and model-check"""

    def __init__(
        self,
        context: RunContext,
        out_dir: Path,
        output_format: str = "json",
        registry: Optional[CheckRegistry] = None,
    ):
        self.context = context
        self.out_dir = Path(out_dir)
        self.output_format = output_format
        self.registry = registry or default_registry(context.config.verify.options)
        self.written: List[Path] = []

    def _write_json(self, payload: Any, name: str) -> Path:
        path = write_json(payload, self.out_dir / name)
        self.written.append(path)
        return path

    def cmd_malthus(self) -> int:
        solution = self.context.solution
        self._write_json(malthus_document(solution, self.context.metadata()), "malthus.json")
        if solution.nu is None:
            logger.info("No Malthusian parameter", rho_at_floor=solution.rho_at_floor)
        else:
            logger.info(f"Malthusian parameter nu = {solution.nu:.10g}")
        return EXIT_OK

    def cmd_front(self) -> int:
        context = self.context
        if self.output_format == "svg" and context.model.dimension != 2:
            raise ConfigError(f"svg output needs d = 2, got d = {context.model.dimension}")
        sample = context.front_sample
        logger.info("Front computed", nu=sample.nu, points=len(sample))

        if self.output_format == "csv":
            self.written.append(write_front_csv(sample, self.out_dir / "front.csv"))
        elif self.output_format == "svg":
            self.written.append(write_front_svg(sample, self.out_dir / "front.svg"))
        else:
            self._write_json(front_document(sample, context.metadata()), "front.json")
        return EXIT_OK

    def cmd_simulate(self) -> int:
        context = self.context
        metadata = context.metadata()
        traces = context.traces
        document = traces_document(traces, metadata)
        self._write_json(document, "traces.json")
        if document["capped"]:
            logger.warning("Partial outputs: some replicates hit a cap", capped=document["capped"])

        snapshots = [snapshot for trace in traces for snapshot in trace.snapshots]
        self.written.append(write_snapshots_csv(snapshots, self.out_dir / "snapshots.csv"))

        if not context.supercritical:
            logger.warning("Spread report skipped: system is not supercritical")
            return EXIT_OK
        try:
            report = conditioned_spread(
                traces,
                context.front(context.solved_nu),
                context.config.simulate.epsilon_fracs,
                resolution=context.config.front.resolution_for(context.model.dimension),
                final_only=False,
            )
        except AllExtinct as e:
            logger.warning(f"Spread report skipped: {e}")
            return EXIT_OK
        self._write_json({**report.to_json(), "metadata": metadata}, "spread_report.json")
        return EXIT_OK

    def cmd_verify(self, checks: Optional[Sequence[str]] = None) -> int:
        ids = checks or self.context.config.verify.checks
        report = self.registry.run(self.context, ids)
        document = {**report.to_json(), "metadata": self.context.metadata()}
        self._write_json(document, "verify_report.json")
        return EXIT_OK if report.passed else EXIT_ACCEPTANCE

    def cmd_model_check(self) -> int:
        model = self.context.model
        s_star, h_min = model.min_log_mgf()
        gradient_error = self._gradient_error()
        summary: Dict[str, Any] = {
            "dimension": model.dimension,
            "q": model.q,
            "law": model.law.describe(),
            "H_at_origin": float(model.log_mgf(np.zeros(model.dimension))),
            "drift": model.drift(),
            "covariance": model.covariance(),
            "H_min": h_min,
            "argmin_H": s_star,
            "recurrent": model.recurrent,
            "symmetric": model.symmetric,
            "gradient_error": gradient_error,
        }
        self._write_json({**summary, "metadata": self.context.metadata()}, "model_check.json")
        logger.info(
            "Model checked", H_min=h_min, recurrent=model.recurrent, gradient_error=gradient_error
        )
        if gradient_error > GRADIENT_TOL:
            raise NumericalError(f"grad H differs from finite differences by {gradient_error:.3e}")
        return EXIT_OK

    def _gradient_error(self) -> float:
        """Largest relative gap between grad H and central differences at random points"""
        model = self.context.model
        rng = replicate_rng(self.context.seed)
        points = rng.normal(scale=0.5, size=(GRADIENT_POINTS, model.dimension))
        worst = 0.0
        for s in points:
            exact = model.grad_log_mgf(s)
            numeric = np.empty(model.dimension)
            for axis in range(model.dimension):
                step = np.zeros(model.dimension)
                step[axis] = GRADIENT_STEP
                numeric[axis] = (model.log_mgf(s + step) - model.log_mgf(s - step)) / (
                    2.0 * GRADIENT_STEP
                )
            gap = np.max(np.abs(exact - numeric)) / (1.0 + np.max(np.abs(exact)))
            worst = max(worst, float(gap))
        return worst
