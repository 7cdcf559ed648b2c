"""Monte Carlo simulation of catalytic branching random walks"""

from cbrw.simulate.engine import (
    ParticleSnapshot,
    SimulationCaps,
    SimulationTrace,
    run_cbrw,
    run_replicates,
)
from cbrw.simulate.estimators import (
    HalfSpace,
    Observable,
    empirical_mgf_check,
    growth_rate_fit,
    local_time_walk,
    many_to_one_estimate,
)
from cbrw.simulate.spread import (
    SpreadReport,
    conditioned_snapshots,
    conditioned_spread,
    spread_statistics,
)

__all__ = [
    "HalfSpace",
    "Observable",
    "ParticleSnapshot",
    "SimulationCaps",
    "SimulationTrace",
    "SpreadReport",
    "conditioned_snapshots",
    "conditioned_spread",
    "empirical_mgf_check",
    "growth_rate_fit",
    "local_time_walk",
    "many_to_one_estimate",
    "run_cbrw",
    "run_replicates",
    "spread_statistics",
]
