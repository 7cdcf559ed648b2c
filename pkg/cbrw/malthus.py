"""Catalytic systems, the matrix D(lambda) and the Malthusian parameter"""

from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
import structlog

from cbrw.errors import (
    BracketFailure,
    IllConditionedGreenMatrix,
    ModelError,
    NotConverged,
    NotSupercritical,
    NumericalError,
)
from cbrw.resolvent import (
    QuadratureSettings,
    assemble,
    displacements,
    evaluate_green,
    green_limit,
    small_lambda_supported,
)
from cbrw.walk.model import JumpModel

logger = structlog.get_logger()

SUPERCRITICAL = "supercritical"
NOT_SUPERCRITICAL = "not-supercritical"

NEGATIVE_TOL = 1e-9


# ============================================================================
# Offspring laws
# ============================================================================

class OffspringLaw(ABC):
    """Law of the number of offspring produced at a branching event"""

    kind: str = ""

    @property
    @abstractmethod
    def mean(self) -> float:
        pass

    @abstractmethod
    def sample(self, rng: np.random.Generator) -> int:
        pass

    @abstractmethod
    def describe(self) -> Dict[str, Any]:
        pass


@dataclass(frozen=True)
class Deterministic(OffspringLaw):
    k: int
    kind = "deterministic"

    @property
    def mean(self) -> float:
        return float(self.k)

    def sample(self, rng: np.random.Generator) -> int:
        return self.k

    def describe(self) -> Dict[str, Any]:
        return {"kind": self.kind, "k": self.k}


@dataclass(frozen=True)
class Binary(OffspringLaw):
    """0 offspring w.p. p0, otherwise 2"""

    p0: float
    kind = "binary"

    @property
    def mean(self) -> float:
        return 2.0 * (1.0 - self.p0)

    def sample(self, rng: np.random.Generator) -> int:
        return 0 if rng.random() < self.p0 else 2

    def describe(self) -> Dict[str, Any]:
        return {"kind": self.kind, "p0": self.p0}


@dataclass(frozen=True)
class Geometric(OffspringLaw):
    """P(k offspring) = (1 - p)^k p, k >= 0"""

    p: float
    kind = "geometric"

    @property
    def mean(self) -> float:
        return (1.0 - self.p) / self.p

    def sample(self, rng: np.random.Generator) -> int:
        return int(rng.geometric(self.p)) - 1

    def describe(self) -> Dict[str, Any]:
        return {"kind": self.kind, "p": self.p}


@dataclass(frozen=True)
class Poisson(OffspringLaw):
    mu: float
    kind = "poisson"

    @property
    def mean(self) -> float:
        return self.mu

    def sample(self, rng: np.random.Generator) -> int:
        return int(rng.poisson(self.mu))

    def describe(self) -> Dict[str, Any]:
        return {"kind": self.kind, "mu": self.mu}


# ============================================================================
# Catalytic system
# ============================================================================

@dataclass(frozen=True)
class Catalyst:
    position: Tuple[int, ...]
    alpha: float
    offspring: OffspringLaw

    @property
    def m(self) -> float:
        return self.offspring.mean


@dataclass(frozen=True)
class CatalyticSystem:
    """Walk plus catalysts; beta_k = q / (1 - alpha_k) is always derived"""

    model: JumpModel
    catalysts: Tuple[Catalyst, ...]
    start: Tuple[int, ...]

    def __post_init__(self):
        problems = []
        d = self.model.dimension
        positions = [c.position for c in self.catalysts]
        if not positions:
            problems.append("at least one catalyst is required")
        if len(set(positions)) != len(positions):
            problems.append("catalyst positions must be distinct")
        for c in self.catalysts:
            if len(c.position) != d:
                problems.append(f"catalyst {c.position} has wrong dimension")
            if not 0.0 <= c.alpha < 1.0:
                problems.append(f"alpha {c.alpha!r} outside [0, 1)")
            if not (np.isfinite(c.m) and c.m >= 0):
                problems.append(f"offspring mean {c.m!r} must be finite and nonnegative")
        if len(self.start) != d:
            problems.append(f"start {self.start} has wrong dimension")
        if problems:
            raise ModelError("; ".join(problems), problems)

    @property
    def size(self) -> int:
        return len(self.catalysts)

    @property
    def positions(self) -> np.ndarray:
        return np.array([c.position for c in self.catalysts], dtype=np.int64)

    @property
    def alphas(self) -> np.ndarray:
        return np.array([c.alpha for c in self.catalysts])

    @property
    def means(self) -> np.ndarray:
        return np.array([c.m for c in self.catalysts])

    @property
    def betas(self) -> np.ndarray:
        return self.model.q / (1.0 - self.alphas)

    def growth_exponents(self) -> np.ndarray:
        """alpha_k beta_k (m_k - 1), the local-time rates of the many-to-one weight"""
        return self.alphas * self.betas * (self.means - 1.0)

    def catalyst_index(self) -> Dict[Tuple[int, ...], int]:
        return {tuple(c.position): k for k, c in enumerate(self.catalysts)}

    def translated(self, shift: Sequence[int]) -> "CatalyticSystem":
        shift = tuple(int(v) for v in shift)
        moved = tuple(
            Catalyst(tuple(p + s for p, s in zip(c.position, shift)), c.alpha, c.offspring)
            for c in self.catalysts
        )
        start = tuple(p + s for p, s in zip(self.start, shift))
        return CatalyticSystem(self.model, moved, start)


@dataclass(frozen=True)
class SolverSettings:
    quadrature: QuadratureSettings = field(default_factory=QuadratureSettings)
    rho_tol: float = 1e-9
    class_margin: float = 1e-6
    cond_max: float = 1e12
    max_doublings: int = 60
    max_bisections: int = 200
    perron_tol: float = 1e-12
    perron_max_iter: int = 100_000

    @property
    def lambda_min(self) -> float:
        return self.quadrature.lambda_min


# ============================================================================
# Taboo transforms
# ============================================================================

@dataclass
class TabooEvaluation:
    lam: float
    matrix: np.ndarray
    grid_size: int
    est_error: float
    limit: bool = False


def _checked_inverse(matrix: np.ndarray, cond_max: float) -> np.ndarray:
    condition = float(np.linalg.cond(matrix))
    if not condition < cond_max:
        raise IllConditionedGreenMatrix(
            "Green matrix at the catalysts is ill-conditioned", condition
        )
    return np.linalg.inv(matrix)


def _clip(matrix: np.ndarray) -> np.ndarray:
    if np.min(matrix) < -NEGATIVE_TOL:
        raise NumericalError(f"taboo transform has negative entry {np.min(matrix):.3e}")
    return np.clip(matrix, 0.0, None)


def taboo_evaluation(
    system: CatalyticSystem, lam: float, settings: Optional[SolverSettings] = None
) -> TabooEvaluation:
    """Laplace transforms of taboo hitting times between catalysts at lambda > 0.

    First-entrance decomposition of the Green matrix at the catalysts gives
    V = I - G^-1 / (lambda + q); dividing out the exit-time factor gives
    F = ((lambda + q) / q) V.
    """
    settings = settings or SolverSettings()
    q = system.model.q
    points = system.positions
    evaluation = evaluate_green(system.model, lam, displacements(points), settings.quadrature)
    green = assemble(points, evaluation.value)
    inverse = _checked_inverse(green, settings.cond_max)
    taboo = ((lam + q) / q) * np.eye(system.size) - inverse / q
    return TabooEvaluation(
        lam=lam,
        matrix=_clip(taboo),
        grid_size=evaluation.grid_size,
        est_error=evaluation.est_error,
    )


def taboo_transforms(
    system: CatalyticSystem, lam: float, settings: Optional[SolverSettings] = None
) -> np.ndarray:
    return taboo_evaluation(system, lam, settings).matrix


def taboo_limit(
    system: CatalyticSystem, settings: Optional[SolverSettings] = None
) -> TabooEvaluation:
    """Taboo matrix in the limit lambda -> 0.

    Transient walks: F = I - G_0^-1 / q.
    Recurrent walks: G = c J + B with c -> infinity, so G^-1 tends to the
    projected inverse of B, computed from the shifted B + c' J.
    """
    settings = settings or SolverSettings()
    q = system.model.q
    points = system.positions
    limit = green_limit(system.model, displacements(points), settings.quadrature)
    base = assemble(points, limit.value)
    size = system.size

    if limit.kind == "transient":
        inverse = _checked_inverse(base, settings.cond_max)
    else:
        ones = np.ones(size)
        shifted = base + (1.0 + np.max(np.abs(base))) * np.outer(ones, ones)
        shifted_inverse = _checked_inverse(shifted, settings.cond_max)
        right = shifted_inverse @ ones
        left = ones @ shifted_inverse
        inverse = shifted_inverse - np.outer(right, left) / (ones @ right)

    taboo = np.eye(size) - inverse / q
    return TabooEvaluation(
        lam=0.0,
        matrix=_clip(taboo),
        grid_size=limit.grid_size,
        est_error=limit.est_error,
        limit=True,
    )


# ============================================================================
# D(lambda) and its Perron root
# ============================================================================

def build_D(system: CatalyticSystem, lam: float, taboo: np.ndarray) -> np.ndarray:
    """d_ij = delta_ij alpha_i m_i G*_i + (1 - alpha_i) G*_i F_ij

    G*_i = beta_i / (beta_i + lambda).
    """
    betas = system.betas
    alphas = system.alphas
    g_star = betas / (betas + lam)
    return np.diag(alphas * system.means * g_star) + ((1.0 - alphas) * g_star)[:, None] * taboo


def perron_root(
    matrix: np.ndarray, tol: float = 1e-12, max_iter: int = 100_000
) -> float:
    """Spectral radius of a nonnegative matrix by shifted power iteration.

    The shift c = max diagonal + 1 removes periodicity; the iteration stops
    when the Collatz-Wielandt bounds agree to the relative tolerance.
    """
    matrix = np.asarray(matrix, dtype=float)
    if matrix.shape == (1, 1):
        return float(matrix[0, 0])

    shift = float(np.max(np.diag(matrix))) + 1.0
    shifted = matrix + shift * np.eye(len(matrix))
    vector = np.ones(len(matrix))
    residual = np.inf
    for _ in range(max_iter):
        image = shifted @ vector
        positive = vector > 0
        ratios = image[positive] / vector[positive]
        low, high = float(ratios.min()), float(ratios.max())
        residual = (high - low) / max(1.0, high)
        vector = image / np.max(image)
        if residual <= tol:
            return 0.5 * (low + high) - shift
    raise NotConverged("power iteration did not converge", residual)


def rho_at(system: CatalyticSystem, lam: float, settings: Optional[SolverSettings] = None) -> float:
    """rho(D(lambda)).

    At or below lambda_min the limit taboo matrix stands in, unless the walk
    is evaluated accurately there (drift, or a line walk).
    """
    settings = settings or SolverSettings()
    if lam <= 0 or (lam <= settings.lambda_min and not small_lambda_supported(system.model)):
        taboo = taboo_limit(system, settings).matrix
        lam = settings.lambda_min
    else:
        taboo = taboo_evaluation(system, lam, settings).matrix
    return perron_root(build_D(system, lam, taboo), settings.perron_tol, settings.perron_max_iter)


def rho_curve(
    system: CatalyticSystem, lambdas: Sequence[float], settings: Optional[SolverSettings] = None
) -> np.ndarray:
    return np.array([rho_at(system, lam, settings) for lam in lambdas])


# ============================================================================
# Classification and solver
# ============================================================================

@dataclass
class Classification:
    regime: str
    rho_at_floor: float
    lambda_floor: float
    taboo: np.ndarray
    est_error: float
    grid_size: int

    @property
    def supercritical(self) -> bool:
        return self.regime == SUPERCRITICAL


def classify(system: CatalyticSystem, settings: Optional[SolverSettings] = None) -> Classification:
    """Compare rho(D(0)) with 1, D(0) taken at the lambda floor"""
    settings = settings or SolverSettings()
    limit = taboo_limit(system, settings)
    lam = settings.lambda_min
    rho = perron_root(
        build_D(system, lam, limit.matrix), settings.perron_tol, settings.perron_max_iter
    )
    regime = SUPERCRITICAL if rho > 1.0 + settings.class_margin else NOT_SUPERCRITICAL
    logger.info("Criticality classified", regime=regime, rho_at_floor=rho, lambda_floor=lam)
    return Classification(
        regime=regime,
        rho_at_floor=rho,
        lambda_floor=lam,
        taboo=limit.matrix,
        est_error=limit.est_error,
        grid_size=limit.grid_size,
    )


@dataclass
class MalthusSolution:
    regime: str
    rho_at_floor: float
    nu: Optional[float] = None
    rho_at_nu: Optional[float] = None
    bracket: Tuple[float, float] = (0.0, 0.0)
    iterations: int = 0
    doublings: int = 0
    halvings: int = 0
    est_error: float = 0.0
    grid_size: int = 0
    lambda_floor: float = 1e-8
    taboo_at_nu: Optional[np.ndarray] = None
    growth_bound: Optional[Dict[str, float]] = None

    def to_json(self) -> Dict[str, Any]:
        return {
            "nu": self.nu,
            "rho_at_floor": self.rho_at_floor,
            "regime": self.regime,
            "iterations": self.iterations,
            "est_error": self.est_error,
            "rho_at_nu": self.rho_at_nu,
            "bracket": list(self.bracket),
            "doublings": self.doublings,
            "halvings": self.halvings,
            "grid_size": self.grid_size,
            "lambda_floor": self.lambda_floor,
            "taboo_at_nu": None if self.taboo_at_nu is None else self.taboo_at_nu.tolist(),
            "growth_bound": self.growth_bound,
        }


def _growth_bound(system: CatalyticSystem, nu: float) -> Optional[Dict[str, float]]:
    """nu + q > alpha_1 beta_1 (m_1 - 1) for a single catalyst"""
    if system.size != 1:
        return None
    rate = float(system.growth_exponents()[0])
    left = nu + system.model.q
    return {"lhs": left, "rhs": rate, "holds": bool(left > rate)}


def solve_malthusian(
    system: CatalyticSystem,
    settings: Optional[SolverSettings] = None,
    classification: Optional[Classification] = None,
) -> MalthusSolution:
    """Solve rho(D(nu)) = 1 by bisection; rho(D(lambda)) is strictly decreasing"""
    settings = settings or SolverSettings()
    classification = classification or classify(system, settings)
    if not classification.supercritical:
        raise NotSupercritical(
            f"rho(D(0)) = {classification.rho_at_floor:.12g} does not exceed 1"
        )

    lower = settings.lambda_min
    upper = 1.0
    doublings = 0
    while rho_at(system, upper, settings) >= 1.0:
        doublings += 1
        if doublings > settings.max_doublings:
            raise BracketFailure(f"rho(D(lambda)) >= 1 up to lambda = {upper:.6g}")
        lower = upper
        upper *= 2.0

    # near-critical roots can sit below the floor
    halvings = 0
    if doublings == 0 and rho_at(system, lower, settings) <= 1.0:
        while True:
            halvings += 1
            if halvings > settings.max_doublings:
                raise BracketFailure(f"rho(D(lambda)) <= 1 down to lambda = {lower:.6g}")
            upper = lower
            lower *= 0.5
            if rho_at(system, lower, settings) > 1.0:
                break
    logger.debug(
        "Malthusian bracket", lower=lower, upper=upper, doublings=doublings, halvings=halvings
    )

    def evaluate(lam: float) -> Tuple[float, TabooEvaluation]:
        taboo = taboo_evaluation(system, lam, settings)
        rho = perron_root(
            build_D(system, lam, taboo.matrix), settings.perron_tol, settings.perron_max_iter
        )
        return rho, taboo

    # stop on a narrow bracket and on rho(D(nu)) close to 1; near the floor
    # rho is steep and the width alone does not pin it
    iterations = 0
    nu = 0.5 * (lower + upper)
    rho, taboo = evaluate(nu)
    while upper - lower >= 1e-10 * (1.0 + lower) or abs(rho - 1.0) >= settings.rho_tol:
        if iterations >= settings.max_bisections or nu in (lower, upper):
            break
        if rho > 1.0:
            lower = nu
        else:
            upper = nu
        iterations += 1
        nu = 0.5 * (lower + upper)
        rho, taboo = evaluate(nu)
        logger.debug("Bisection step", iteration=iterations, lower=lower, upper=upper, rho=rho)

    if abs(rho - 1.0) >= settings.rho_tol:
        raise NotConverged("rho(D(nu)) differs from 1", abs(rho - 1.0))

    bound = _growth_bound(system, nu)
    if bound is not None and not bound["holds"]:
        raise NumericalError(f"single catalyst bound violated: {bound}")

    logger.info("Malthusian parameter solved", nu=nu, iterations=iterations, rho_at_nu=rho)
    return MalthusSolution(
        regime=classification.regime,
        rho_at_floor=classification.rho_at_floor,
        nu=nu,
        rho_at_nu=rho,
        bracket=(lower, upper),
        iterations=iterations,
        doublings=doublings,
        halvings=halvings,
        est_error=taboo.est_error,
        grid_size=taboo.grid_size,
        lambda_floor=classification.lambda_floor,
        taboo_at_nu=taboo.matrix,
        growth_bound=bound,
    )


def analyse(system: CatalyticSystem, settings: Optional[SolverSettings] = None) -> MalthusSolution:
    """Classification followed by the solver when the system is supercritical"""
    settings = settings or SolverSettings()
    classification = classify(system, settings)
    if not classification.supercritical:
        logger.warning("System is not supercritical", rho_at_floor=classification.rho_at_floor)
        return MalthusSolution(
            regime=classification.regime,
            rho_at_floor=classification.rho_at_floor,
            est_error=classification.est_error,
            grid_size=classification.grid_size,
            lambda_floor=classification.lambda_floor,
        )
    return solve_malthusian(system, settings, classification)


def lambda_grid(
    nu: float, upper: float, count: int = 20, settings: Optional[SolverSettings] = None
) -> List[float]:
    """lambda_min followed by a geometric grid from nu / 16 to 2 * upper"""
    settings = settings or SolverSettings()
    rest = np.geomspace(nu / 16.0, 2.0 * upper, count - 1)
    return sorted([settings.lambda_min] + rest.tolist())
