"""Spread of normalized particle clouds against the propagation front"""

from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
import structlog

from cbrw.errors import AllExtinct, EmptySnapshot
from cbrw.front import FrontModel, FrontSample, sample_front, support_margins
from cbrw.simulate.engine import ParticleSnapshot, SimulationTrace

logger = structlog.get_logger()

SECTORS = 36


@dataclass
class SpreadReport:
    epsilon_fracs: List[float]
    max_margin: List[float]
    outside_fraction: Dict[str, float]
    near_front_rate: Dict[str, float]
    sector_coverage: Optional[Dict[str, float]]
    snapshots: int
    per_snapshot: List[Dict[str, Any]] = field(default_factory=list)
    surviving: Optional[int] = None
    visited: Optional[int] = None

    def to_json(self) -> Dict[str, Any]:
        return {
            "max_margin": self.max_margin,
            "outside_fraction": self.outside_fraction,
            "near_front_rate": self.near_front_rate,
            "sector_coverage": self.sector_coverage,
            "epsilon_fracs": self.epsilon_fracs,
            "snapshots": self.snapshots,
            "surviving": self.surviving,
            "visited": self.visited,
        }


def _key(frac: float) -> str:
    return f"{frac:g}"


def _coverage(points: np.ndarray) -> float:
    if len(points) == 0:
        return 0.0
    angles = np.mod(np.arctan2(points[:, 1], points[:, 0]), 2.0 * np.pi)
    sectors = np.minimum((angles / (2.0 * np.pi) * SECTORS).astype(int), SECTORS - 1)
    return len(np.unique(sectors)) / SECTORS


def spread_statistics(
    snapshots: Sequence[ParticleSnapshot],
    front: FrontModel,
    epsilon_fracs: Sequence[float],
    sample: Optional[FrontSample] = None,
    resolution: int = 720,
) -> SpreadReport:
    """Margins of X_v(t) / t for every snapshot.

    outside_fraction: mean fraction of particles with margin > eps.
    near_front_rate: fraction of snapshots holding a particle with margin > -eps.
    sector_coverage (d = 2): mean fraction of the 36 angular sectors holding
    such a particle.
    """
    sample = sample or sample_front(front, resolution)
    fracs = [float(f) for f in epsilon_fracs]
    outside: Dict[str, List[float]] = {_key(f): [] for f in fracs}
    near: Dict[str, List[float]] = {_key(f): [] for f in fracs}
    coverage: Dict[str, List[float]] = {_key(f): [] for f in fracs}
    max_margin: List[float] = []
    per_snapshot: List[Dict[str, Any]] = []

    for snapshot in snapshots:
        if snapshot.population == 0:
            raise EmptySnapshot(f"snapshot at t={snapshot.time} has no particles")
        if snapshot.time <= 0:
            raise ValueError("snapshots must be taken at positive times")
        scaled = snapshot.positions.astype(float) / snapshot.time
        margins = support_margins(front, scaled, sample)
        max_margin.append(float(margins.max()))
        entry: Dict[str, Any] = {"replicate": snapshot.replicate, "time": snapshot.time}
        for frac in fracs:
            epsilon = frac * front.nu
            key = _key(frac)
            outside[key].append(float(np.mean(margins > epsilon)))
            near[key].append(float(np.any(margins > -epsilon)))
            if front.dimension == 2:
                coverage[key].append(_coverage(scaled[margins > -epsilon]))
        entry["max_margin"] = max_margin[-1]
        per_snapshot.append(entry)

    report = SpreadReport(
        epsilon_fracs=fracs,
        max_margin=max_margin,
        outside_fraction={k: float(np.mean(v)) if v else 0.0 for k, v in outside.items()},
        near_front_rate={k: float(np.mean(v)) if v else 0.0 for k, v in near.items()},
        sector_coverage=(
            {k: float(np.mean(v)) if v else 0.0 for k, v in coverage.items()}
            if front.dimension == 2
            else None
        ),
        snapshots=len(max_margin),
        per_snapshot=per_snapshot,
    )
    logger.info(
        "Spread statistics",
        snapshots=report.snapshots,
        outside_fraction=report.outside_fraction,
        near_front_rate=report.near_front_rate,
    )
    return report


def conditioned_snapshots(
    traces: Sequence[SimulationTrace], final_only: bool = True
) -> Tuple[List[ParticleSnapshot], List[ParticleSnapshot]]:
    """Snapshots of surviving replicates, and those of survivors that visited late.

    A replicate survives when it ran uncapped to the horizon with particles
    left. final_only keeps the last snapshot of each replicate.
    """
    surviving: List[ParticleSnapshot] = []
    visited: List[ParticleSnapshot] = []
    for trace in traces:
        if not trace.survived or not trace.snapshots:
            continue
        kept = trace.snapshots[-1:] if final_only else trace.snapshots
        kept = [snapshot for snapshot in kept if snapshot.population > 0]
        surviving += kept
        if trace.visited:
            visited += kept
    if not surviving:
        raise AllExtinct("no replicate survives to the horizon")
    if not visited:
        raise AllExtinct("no surviving replicate occupies a catalyst late")
    return surviving, visited


def conditioned_spread(
    traces: Sequence[SimulationTrace],
    front: FrontModel,
    epsilon_fracs: Sequence[float],
    attainment_fracs: Optional[Sequence[float]] = None,
    resolution: int = 720,
    final_only: bool = True,
) -> SpreadReport:
    """Containment over surviving replicates, attainment over late visitors.

    outside_fraction and max_margin come from the surviving snapshots;
    near_front_rate and sector_coverage from the visited subset, at
    attainment_fracs (default epsilon_fracs).
    """
    surviving, visited = conditioned_snapshots(traces, final_only)
    sample = sample_front(front, resolution)
    containment = spread_statistics(surviving, front, epsilon_fracs, sample=sample)
    attainment = spread_statistics(
        visited, front, attainment_fracs or epsilon_fracs, sample=sample
    )
    containment.near_front_rate = attainment.near_front_rate
    containment.sector_coverage = attainment.sector_coverage
    containment.surviving = sum(trace.survived for trace in traces)
    containment.visited = sum(trace.survived and trace.visited for trace in traces)
    logger.info(
        "Conditioned spread",
        surviving=containment.surviving,
        visited=containment.visited,
        outside_fraction=containment.outside_fraction,
        near_front_rate=containment.near_front_rate,
    )
    return containment
