"""Artifacts of one configured run, computed on first use"""

from functools import cached_property
from typing import Any, Dict, List, Optional

import structlog

from cbrw import __version__
from cbrw.config import RunConfig
from cbrw.errors import NotSupercritical
from cbrw.front import FrontModel, FrontSample, sample_front
from cbrw.malthus import CatalyticSystem, MalthusSolution, SolverSettings, analyse
from cbrw.simulate.engine import SimulationTrace, run_replicates
from cbrw.walk.model import JumpModel

logger = structlog.get_logger()


class RunContext:
    """Model, system, Malthusian solution, front and traces for a RunConfig.

    Every artifact is built once and shared by the subcommand handlers and
    the acceptance checks. `nu` overrides the solver value for the front.
    """

    def __init__(self, config: RunConfig, seed: Optional[int] = None, nu: Optional[float] = None):
        self.config = config
        self.seed = config.simulate.seed if seed is None else seed
        self.nu_override = nu if nu is not None else config.front.nu

    @cached_property
    def settings(self) -> SolverSettings:
        return self.config.solver.settings()

    @cached_property
    def model(self) -> JumpModel:
        return self.config.build_model()

    @cached_property
    def system(self) -> CatalyticSystem:
        return self.config.build_system(self.model)

    @cached_property
    def solution(self) -> MalthusSolution:
        return analyse(self.system, self.settings)

    @property
    def supercritical(self) -> bool:
        return self.solution.nu is not None

    @property
    def nu(self) -> float:
        if self.nu_override is not None:
            return float(self.nu_override)
        if self.solution.nu is None:
            raise NotSupercritical(
                f"rho(D(0)) = {self.solution.rho_at_floor:.12g}; no Malthusian parameter"
            )
        return float(self.solution.nu)

    @property
    def solved_nu(self) -> float:
        """Malthusian parameter of the system, ignoring any override"""
        if self.solution.nu is None:
            raise NotSupercritical(
                f"rho(D(0)) = {self.solution.rho_at_floor:.12g}; no Malthusian parameter"
            )
        return float(self.solution.nu)

    def front(self, nu: Optional[float] = None) -> FrontModel:
        return FrontModel(
            self.model, self.nu if nu is None else nu, self.config.front.level_tol_factor
        )

    @cached_property
    def front_sample(self) -> FrontSample:
        resolution = self.config.front.resolution_for(self.model.dimension)
        return sample_front(self.front(), resolution)

    @cached_property
    def traces(self) -> List[SimulationTrace]:
        section = self.config.simulate
        logger.info(
            "Running replicates",
            runs=section.runs,
            horizon=section.horizon,
            seed=self.seed,
        )
        return run_replicates(
            self.system,
            section.horizon,
            section.checkpoint_times(),
            section.runs,
            seed=self.seed,
            caps=section.caps(),
            snapshot_times=section.snapshot_list(),
            window_radius=section.window_radius,
        )

    def metadata(self) -> Dict[str, Any]:
        return {
            "version": __version__,
            "seed": self.seed,
            "config": self.config.dump(),
        }
