"""Monte Carlo estimators: many-to-one, exponential martingale and growth rate"""

from dataclasses import dataclass
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
import structlog

from cbrw.errors import AllExtinct, InsufficientReplicates, PopulationCapExceeded, SimulationError
from cbrw.malthus import CatalyticSystem
from cbrw.simulate.engine import SimulationCaps, SimulationTrace, run_cbrw
from cbrw.utils import replicate_rng
from cbrw.walk.model import JumpModel

logger = structlog.get_logger()

MIN_REPLICATES = 100
MGF_LIMIT = 1e6


# ============================================================================
# Observables
# ============================================================================

class Observable:
    """Function g on lattice positions, evaluated row-wise"""

    kind = "one"

    def __call__(self, positions: np.ndarray) -> np.ndarray:
        return np.ones(len(positions))

    def describe(self) -> Dict[str, Any]:
        return {"kind": self.kind}


class HalfSpace(Observable):
    """g(x) = 1 if <a, x> >= b else 0"""

    kind = "half_space"

    def __init__(self, normal: Sequence[float], offset: float = 0.0):
        self.normal = np.asarray(normal, dtype=float)
        self.offset = float(offset)

    def __call__(self, positions: np.ndarray) -> np.ndarray:
        positions = np.asarray(positions, dtype=float).reshape(-1, len(self.normal))
        return (positions @ self.normal >= self.offset).astype(float)

    def describe(self) -> Dict[str, Any]:
        return {"kind": self.kind, "normal": self.normal.tolist(), "offset": self.offset}


def z_score(mean_a: float, se_a: float, mean_b: float, se_b: float) -> float:
    """Standardized difference; 0/0 counts as agreement"""
    difference = mean_a - mean_b
    scale = float(np.hypot(se_a, se_b))
    if scale == 0.0:
        return 0.0 if difference == 0.0 else float(np.copysign(np.inf, difference))
    return difference / scale


def _mean_se(values: np.ndarray) -> Tuple[float, float]:
    values = np.asarray(values, dtype=float)
    if len(values) < 2:
        return float(values.mean()), 0.0
    return float(values.mean()), float(values.std(ddof=1) / np.sqrt(len(values)))


# ============================================================================
# Single weighted walk
# ============================================================================

@dataclass
class WeightedWalk:
    position: np.ndarray
    weight: float
    local_times: np.ndarray


def local_time_walk(
    system: CatalyticSystem,
    t: float,
    seed: int = 0,
    rng: Optional[np.random.Generator] = None,
) -> WeightedWalk:
    """Single walk S on [0, t] with its local times at the catalysts.

    At w_k the walk holds Exp(beta_k); with probability alpha_k the ring is
    ignored and a fresh clock starts, otherwise it jumps. The exit rate
    beta_k (1 - alpha_k) = q so S is the plain walk. The returned weight is
    exp(sum_k alpha_k beta_k (m_k - 1) L(t; w_k)).
    """
    rng = rng or replicate_rng(seed)
    model = system.model
    catalysts = system.catalyst_index()
    betas = system.betas
    alphas = system.alphas
    site = tuple(int(v) for v in system.start)
    local_times = np.zeros(system.size)
    now = 0.0

    while True:
        k = catalysts.get(site)
        rate = model.q if k is None else betas[k]
        holding = rng.exponential(1.0 / rate)
        if k is not None:
            local_times[k] += min(holding, t - now)
        if now + holding >= t:
            break
        now += holding
        if k is not None and rng.random() < alphas[k]:
            continue
        jump = model.sample_jump(rng)
        site = tuple(a + int(b) for a, b in zip(site, jump))

    weight = float(np.exp(system.growth_exponents() @ local_times))
    return WeightedWalk(np.array(site, dtype=np.int64), weight, local_times)


# ============================================================================
# Many-to-one
# ============================================================================

@dataclass
class ManyToOneEstimate:
    lhs_mean: float
    lhs_se: float
    rhs_mean: float
    rhs_se: float
    z: float
    runs: int
    t: float

    def to_json(self) -> Dict[str, Any]:
        return {
            "lhs_mean": self.lhs_mean,
            "lhs_se": self.lhs_se,
            "rhs_mean": self.rhs_mean,
            "rhs_se": self.rhs_se,
            "z": self.z,
            "runs": self.runs,
            "t": self.t,
        }


def many_to_one_estimate(
    system: CatalyticSystem,
    t: float,
    g: Optional[Observable] = None,
    runs: int = 100_000,
    seed: int = 0,
    caps: Optional[SimulationCaps] = None,
) -> ManyToOneEstimate:
    """E sum_v g(X_v(t)) from the branching system against E g(S(t)) weight(t)"""
    if runs < MIN_REPLICATES:
        raise InsufficientReplicates(f"need at least {MIN_REPLICATES} runs, got {runs}")
    g = g or Observable()
    one = type(g) is Observable

    lhs = np.empty(runs)
    rhs = np.empty(runs)
    for i in range(runs):
        trace = run_cbrw(
            system,
            horizon=max(t, np.finfo(float).tiny),
            checkpoints=[t],
            caps=caps,
            seed=seed,
            replicate=i,
            snapshot_times=None if one else [t],
            rng=replicate_rng(seed, 0, i),
        )
        if trace.capped:
            raise PopulationCapExceeded(f"replicate {i} stopped early ({trace.status})")
        lhs[i] = trace.population[0] if one else g(trace.snapshots[0].positions).sum()

        walk = local_time_walk(system, t, rng=replicate_rng(seed, 1, i))
        rhs[i] = g(walk.position[None, :])[0] * walk.weight

    lhs_mean, lhs_se = _mean_se(lhs)
    rhs_mean, rhs_se = _mean_se(rhs)
    z = z_score(lhs_mean, lhs_se, rhs_mean, rhs_se)
    logger.info("Many-to-one estimate", t=t, runs=runs, lhs=lhs_mean, rhs=rhs_mean, z=z)
    return ManyToOneEstimate(lhs_mean, lhs_se, rhs_mean, rhs_se, z, runs, t)


# ============================================================================
# Exponential martingale
# ============================================================================

@dataclass
class MgfCheck:
    empirical_mean: float
    empirical_se: float
    predicted: float
    z: float


def sample_positions(model: JumpModel, t: float, runs: int, rng: np.random.Generator) -> np.ndarray:
    """S(t) for independent walks from the origin: Poisson(q t) jumps each"""
    counts = rng.poisson(model.q * t, size=runs)
    jumps = model.sample_jumps(rng, int(counts.sum()))
    positions = np.zeros((runs, model.dimension), dtype=np.int64)
    np.add.at(positions, np.repeat(np.arange(runs), counts), jumps)
    return positions


def empirical_mgf_check(
    model: JumpModel, t: float, s: Sequence[float], runs: int = 100_000, seed: int = 0
) -> MgfCheck:
    """Empirical E exp<s, S(t)> against exp(t H(s))"""
    s = np.asarray(s, dtype=float)
    predicted = float(np.exp(t * model.log_mgf(s)))
    if not predicted < MGF_LIMIT:
        raise ValueError(f"exp(t H(s)) = {predicted:.3e} is too large for a stable estimate")
    positions = sample_positions(model, t, runs, replicate_rng(seed))
    values = np.exp(positions @ s)
    mean, se = _mean_se(values)
    z = z_score(mean, se, predicted, 0.0)
    return MgfCheck(mean, se, predicted, z)


# ============================================================================
# Growth rate
# ============================================================================

def mean_population(traces: List[SimulationTrace]) -> Tuple[np.ndarray, np.ndarray]:
    """Mean population over every trace at the checkpoints all of them reached.

    A capped trace only counts checkpoints before its stopping time, so
    later checkpoints are dropped for the whole sample instead of dropping
    the trace.
    """
    if not traces:
        raise SimulationError("no traces to average")
    times = traces[0].checkpoints
    reached = np.ones(len(times), dtype=bool)
    for trace in traces:
        if trace.capped:
            reached &= times < trace.final_time
    if not reached.any():
        raise SimulationError("every checkpoint lies after a cap")
    counts = np.array([trace.population[reached] for trace in traces], dtype=float)
    return times[reached], counts.mean(axis=0)


def growth_rate_fit(
    traces: List[SimulationTrace], window: Tuple[float, float], strict: bool = False
) -> float:
    """Least-squares slope of log mean population over the checkpoints in the window.

    Capped traces censor the sample: the fit uses the checkpoints before the
    earliest cap. With strict, any capped trace raises.
    """
    if len(traces) < MIN_REPLICATES:
        raise InsufficientReplicates(f"need at least {MIN_REPLICATES} traces, got {len(traces)}")
    capped = [trace for trace in traces if trace.capped]
    if capped:
        earliest = min(trace.final_time for trace in capped)
        if strict:
            raise PopulationCapExceeded(
                f"{len(capped)} traces stopped at a cap, the first at t={earliest:.6g}"
            )
        logger.warning("Capped traces censor the growth fit", capped=len(capped), until=earliest)
    times, means = mean_population(traces)
    inside = (times >= window[0]) & (times <= window[1])
    if inside.sum() < 2:
        raise SimulationError(f"fewer than two checkpoints inside {window}")
    if np.any(means[inside] <= 0):
        raise AllExtinct(f"mean population vanishes inside {window}")
    slope = np.polyfit(times[inside], np.log(means[inside]), 1)[0]
    return float(slope)
