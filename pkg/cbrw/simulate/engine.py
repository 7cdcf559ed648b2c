"""Event-driven simulation of the catalytic branching random walk"""

import heapq
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import structlog

from cbrw.errors import EventCapExceeded, PopulationCapExceeded
from cbrw.malthus import CatalyticSystem
from cbrw.utils import replicate_rng

logger = structlog.get_logger()

COMPLETE = "complete"
POPULATION_CAP = "population_cap"
EVENT_CAP = "event_cap"

Site = Tuple[int, ...]


@dataclass(frozen=True)
class SimulationCaps:
    max_population: int = 5_000_000
    max_events: int = 500_000_000


@dataclass
class ParticleSnapshot:
    """Particle positions at time t, ordered by particle id"""

    time: float
    positions: np.ndarray
    counts: Dict[Site, int] = field(default_factory=dict)
    replicate: int = 0

    @property
    def population(self) -> int:
        return len(self.positions)


@dataclass
class SimulationTrace:
    seed: int
    replicate: int
    horizon: float
    checkpoints: np.ndarray
    population: np.ndarray
    local_times: np.ndarray
    survived: bool
    visited: bool
    status: str
    final_time: float
    events: int
    branch_events: int
    snapshots: List[ParticleSnapshot] = field(default_factory=list)

    @property
    def capped(self) -> bool:
        return self.status != COMPLETE

    def summary(self) -> Dict:
        return {
            "seed": self.seed,
            "replicate": self.replicate,
            "status": self.status,
            "final_time": self.final_time,
            "events": self.events,
            "branch_events": self.branch_events,
            "survived": self.survived,
            "visited": self.visited,
            "checkpoints": self.checkpoints.tolist(),
            "population": self.population.tolist(),
            "local_times": self.local_times.tolist(),
        }


def reporting_window(system: CatalyticSystem, radius: int = 10) -> Tuple[np.ndarray, np.ndarray]:
    """Box spanned by the catalysts, widened by radius"""
    positions = system.positions
    return positions.min(axis=0) - radius, positions.max(axis=0) + radius


def _window_counts(positions: np.ndarray, window: Tuple[np.ndarray, np.ndarray]) -> Dict[Site, int]:
    if len(positions) == 0:
        return {}
    low, high = window
    inside = np.all((positions >= low) & (positions <= high), axis=1)
    sites, counts = np.unique(positions[inside], axis=0, return_counts=True)
    return {tuple(int(v) for v in site): int(c) for site, c in zip(sites, counts)}


def run_cbrw(
    system: CatalyticSystem,
    horizon: float,
    checkpoints: Sequence[float],
    caps: Optional[SimulationCaps] = None,
    seed: int = 0,
    replicate: int = 0,
    snapshot_times: Optional[Sequence[float]] = None,
    window_radius: int = 10,
    rng: Optional[np.random.Generator] = None,
    strict: bool = False,
) -> SimulationTrace:
    """Simulate one replicate up to the horizon.

    Every particle carries one exponential clock in a heap keyed by
    (time, particle id). Off the catalysts the clock rate is q and a ring
    is a jump. At catalyst w_k the rate is beta_k; a ring branches with
    probability alpha_k (the particle is replaced by xi_k offspring at w_k)
    and is a jump otherwise. Checkpoint counts are right-continuous.
    """
    if horizon <= 0:
        raise ValueError(f"horizon must be positive, got {horizon!r}")
    checkpoints = np.sort(np.asarray(list(checkpoints), dtype=float))
    if np.any(checkpoints < 0) or np.any(checkpoints > horizon):
        raise ValueError("checkpoints must lie in [0, horizon]")
    snapshot_times = sorted(set(float(t) for t in (snapshot_times or [])))
    caps = caps or SimulationCaps()
    rng = rng or replicate_rng(seed, replicate)

    model = system.model
    q = model.q
    catalysts = system.catalyst_index()
    betas = system.betas.tolist()
    alphas = system.alphas.tolist()
    offspring = [c.offspring for c in system.catalysts]
    window = reporting_window(system, window_radius)
    half = 0.5 * horizon

    positions: Dict[int, Site] = {}
    arrived: Dict[int, float] = {}
    local_times = np.zeros(system.size)
    clocks: List[Tuple[float, int]] = []
    next_id = 0
    on_catalyst = 0
    visited = False

    def schedule(pid: int, site: Site, now: float) -> None:
        nonlocal on_catalyst
        positions[pid] = site
        k = catalysts.get(site)
        if k is None:
            rate = q
        else:
            rate = betas[k]
            arrived[pid] = now
            on_catalyst += 1
        heapq.heappush(clocks, (now + rng.exponential(1.0 / rate), pid))

    def leave(pid: int, now: float) -> Site:
        nonlocal on_catalyst
        site = positions.pop(pid)
        k = catalysts.get(site)
        if k is not None:
            local_times[k] += min(now, horizon) - arrived.pop(pid)
            on_catalyst -= 1
        return site

    def snapshot(now: float) -> ParticleSnapshot:
        ordered = np.array(
            [positions[pid] for pid in sorted(positions)], dtype=np.int64
        ).reshape(-1, model.dimension)
        return ParticleSnapshot(now, ordered, _window_counts(ordered, window), replicate)

    schedule(next_id, tuple(int(v) for v in system.start), 0.0)
    next_id += 1

    population = np.zeros(len(checkpoints), dtype=np.int64)
    snapshots: List[ParticleSnapshot] = []
    checkpoint_index = 0
    snapshot_index = 0
    events = 0
    branch_events = 0
    status = COMPLETE
    now = 0.0

    def record_until(limit: float, inclusive: bool) -> None:
        nonlocal checkpoint_index, snapshot_index
        while checkpoint_index < len(checkpoints) and (
            checkpoints[checkpoint_index] < limit
            or (inclusive and checkpoints[checkpoint_index] <= limit)
        ):
            population[checkpoint_index] = len(positions)
            checkpoint_index += 1
        while snapshot_index < len(snapshot_times) and (
            snapshot_times[snapshot_index] < limit
            or (inclusive and snapshot_times[snapshot_index] <= limit)
        ):
            snapshots.append(snapshot(snapshot_times[snapshot_index]))
            snapshot_index += 1

    while clocks and clocks[0][0] <= horizon:
        time, pid = heapq.heappop(clocks)
        record_until(time, inclusive=False)
        if not visited and time > half and on_catalyst > 0:
            visited = True
        now = time

        site = leave(pid, now)
        k = catalysts.get(site)
        if k is not None and rng.random() < alphas[k]:
            branch_events += 1
            for _ in range(offspring[k].sample(rng)):
                schedule(next_id, site, now)
                next_id += 1
        else:
            jump = model.sample_jump(rng)
            schedule(pid, tuple(a + int(b) for a, b in zip(site, jump)), now)

        events += 1
        if not visited and now > half and on_catalyst > 0:
            visited = True
        if len(positions) > caps.max_population:
            status = POPULATION_CAP
            break
        if events >= caps.max_events:
            status = EVENT_CAP
            break

    if status == COMPLETE:
        now = horizon
        record_until(horizon, inclusive=True)
        if not visited and on_catalyst > 0:
            visited = True
        for pid, start in arrived.items():
            local_times[catalysts[positions[pid]]] += horizon - start
    else:
        logger.warning(
            "Simulation cap reached",
            status=status,
            replicate=replicate,
            time=now,
            population=len(positions),
            events=events,
        )
        for pid, start in arrived.items():
            local_times[catalysts[positions[pid]]] += now - start
        if strict:
            error = PopulationCapExceeded if status == POPULATION_CAP else EventCapExceeded
            raise error(f"replicate {replicate} stopped at t={now:.6g} ({status})")

    return SimulationTrace(
        seed=seed,
        replicate=replicate,
        horizon=horizon,
        checkpoints=checkpoints,
        population=population,
        local_times=local_times,
        survived=len(positions) > 0 and status == COMPLETE,
        visited=visited,
        status=status,
        final_time=now,
        events=events,
        branch_events=branch_events,
        snapshots=snapshots,
    )


def run_replicates(
    system: CatalyticSystem,
    horizon: float,
    checkpoints: Sequence[float],
    runs: int,
    seed: int = 0,
    caps: Optional[SimulationCaps] = None,
    snapshot_times: Optional[Sequence[float]] = None,
    window_radius: int = 10,
) -> List[SimulationTrace]:
    """Independent replicates, ordered by replicate index"""
    traces = [
        run_cbrw(
            system,
            horizon,
            checkpoints,
            caps=caps,
            seed=seed,
            replicate=i,
            snapshot_times=snapshot_times,
            window_radius=window_radius,
        )
        for i in range(runs)
    ]
    capped = sum(trace.capped for trace in traces)
    logger.info("Replicates finished", runs=runs, capped=capped, horizon=horizon)
    return traces
