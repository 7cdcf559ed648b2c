"""Level set R = {H = nu}, propagation front P = {z(r)} and support margins"""

import itertools
from dataclasses import dataclass
from typing import Any, Dict, List, Optional, Sequence

import numpy as np
import structlog
from scipy import optimize

from cbrw.errors import BadEpsilon, BracketFailure, ModelError, NotOnLevelSet
from cbrw.walk.model import JumpModel

logger = structlog.get_logger()

OUTSIDE = "outside"
INSIDE = "inside"
SHELL = "shell"

MAX_DOUBLINGS = 60
COARSE_ANGLES = 64
REFINED_STARTS = 8
COARSE_SPHERE = 16
SPACE_STARTS = 4
MARGIN_CHUNK = 1 << 16


@dataclass(frozen=True)
class FrontModel:
    model: JumpModel
    nu: float
    level_tol_factor: float = 1e-10

    def __post_init__(self):
        if not self.nu > 0:
            raise ModelError(f"nu must be positive, got {self.nu!r}")

    @property
    def dimension(self) -> int:
        return self.model.dimension

    @property
    def level_tol(self) -> float:
        return self.level_tol_factor * (1.0 + self.nu)


@dataclass
class FrontSample:
    """Directions u, level-set points r = rho(u) u and front points z(r)"""

    nu: float
    resolution: int
    directions: np.ndarray
    r: np.ndarray
    z: np.ndarray

    @property
    def dimension(self) -> int:
        return int(self.directions.shape[1])

    def __len__(self) -> int:
        return len(self.directions)

    def header(self) -> List[str]:
        d = self.dimension
        return (
            [f"u_{i}" for i in range(1, d + 1)]
            + [f"r_{i}" for i in range(1, d + 1)]
            + [f"z_{i}" for i in range(1, d + 1)]
        )

    def rows(self) -> np.ndarray:
        return np.hstack([self.directions, self.r, self.z])

    def metadata(self) -> Dict[str, Any]:
        return {
            "nu": self.nu,
            "resolution": self.resolution,
            "dimension": self.dimension,
            "points": len(self),
        }


def _unit(u: Sequence[float]) -> np.ndarray:
    u = np.asarray(u, dtype=float)
    norm = np.linalg.norm(u)
    if norm == 0:
        raise ValueError("direction must be nonzero")
    return u / norm


# ============================================================================
# Level set
# ============================================================================

def level_radius(front: FrontModel, u: Sequence[float]) -> float:
    """Unique rho > 0 with H(rho u) = nu.

    H(0) = 0 < nu, H is convex and H(rho u) -> infinity, so the root is unique.
    """
    u = _unit(u)
    model, nu = front.model, front.nu

    def excess(rho: float) -> float:
        return model.log_mgf(rho * u) - nu

    lower, upper = 0.0, 1.0
    for _ in range(MAX_DOUBLINGS):
        if excess(upper) > 0:
            break
        lower, upper = upper, 2.0 * upper
    else:
        raise BracketFailure(f"H does not reach {nu} along {u.tolist()}")

    rho = optimize.brentq(excess, lower, upper, xtol=1e-15, rtol=1e-15, maxiter=500)
    # one Newton step polishes the residual below the level tolerance
    slope = float(model.grad_log_mgf(rho * u) @ u)
    if slope > 0:
        rho -= excess(rho) / slope
    return float(rho)


def level_radii(front: FrontModel, directions: np.ndarray) -> np.ndarray:
    """Vectorized level_radius for unit directions of shape (K, d).

    Newton's method started right of the root converges monotonically
    because rho -> H(rho u) - nu is convex and increasing there.
    """
    model, nu = front.model, front.nu
    directions = np.asarray(directions, dtype=float)
    rho = np.ones(len(directions))
    for _ in range(MAX_DOUBLINGS):
        low = model.log_mgf(rho[:, None] * directions) <= nu
        if not np.any(low):
            break
        rho = np.where(low, 2.0 * rho, rho)
    else:
        raise BracketFailure(f"H does not reach {nu} along every direction")

    tolerance = 1e-12 * (1.0 + nu)
    for _ in range(200):
        points = rho[:, None] * directions
        excess = model.log_mgf(points) - nu
        if np.all(np.abs(excess) < tolerance):
            break
        slope = np.einsum("kd,kd->k", model.grad_log_mgf(points), directions)
        rho = rho - excess / slope
    return rho


# ============================================================================
# Front
# ============================================================================

def front_point(front: FrontModel, r: Sequence[float]) -> np.ndarray:
    """z(r) = nu grad H(r) / <grad H(r), r>"""
    r = np.asarray(r, dtype=float)
    residual = abs(front.model.log_mgf(r) - front.nu)
    if residual >= front.level_tol:
        raise NotOnLevelSet(f"|H(r) - nu| = {residual:.3e} exceeds {front.level_tol:.3e}")
    gradient = front.model.grad_log_mgf(r)
    product = float(gradient @ r)
    if product <= 0:
        raise NotOnLevelSet(f"<grad H(r), r> = {product:.3e} is not positive")
    return front.nu * gradient / product


def front_points(front: FrontModel, r: np.ndarray) -> np.ndarray:
    r = np.asarray(r, dtype=float)
    residual = np.abs(front.model.log_mgf(r) - front.nu)
    if np.any(residual >= front.level_tol):
        raise NotOnLevelSet(f"max |H(r) - nu| = {residual.max():.3e} exceeds {front.level_tol:.3e}")
    gradient = front.model.grad_log_mgf(r)
    products = np.einsum("kd,kd->k", gradient, r)
    if np.any(products <= 0):
        raise NotOnLevelSet("<grad H(r), r> is not positive on the level set")
    return front.nu * gradient / products[:, None]


def sample_directions(dimension: int, resolution: int) -> np.ndarray:
    """d=1: -1, +1. d=2: K angles. d=3: K x K grid uniform in azimuth and polar cosine."""
    if dimension == 1:
        return np.array([[-1.0], [1.0]])
    if dimension == 2:
        angles = 2.0 * np.pi * np.arange(resolution) / resolution
        return np.column_stack([np.cos(angles), np.sin(angles)])
    if dimension == 3:
        azimuth = 2.0 * np.pi * np.arange(resolution) / resolution
        cosines = -1.0 + (2.0 * np.arange(resolution) + 1.0) / resolution
        cos_grid, azimuth_grid = np.meshgrid(cosines, azimuth, indexing="ij")
        sines = np.sqrt(1.0 - cos_grid**2)
        directions = np.stack(
            [sines * np.cos(azimuth_grid), sines * np.sin(azimuth_grid), cos_grid], axis=-1
        )
        return directions.reshape(-1, 3)
    rng = np.random.default_rng(0)
    directions = rng.standard_normal((resolution**2, dimension))
    return directions / np.linalg.norm(directions, axis=1, keepdims=True)


def sample_front(front: FrontModel, resolution: int) -> FrontSample:
    directions = sample_directions(front.dimension, resolution)
    radii = level_radii(front, directions)
    r = radii[:, None] * directions
    z = front_points(front, r)
    logger.debug("Front sampled", nu=front.nu, points=len(directions))
    return FrontSample(nu=front.nu, resolution=resolution, directions=directions, r=r, z=z)


# ============================================================================
# Support margins
# ============================================================================

def _ray_value(front: FrontModel, x: np.ndarray, v: np.ndarray) -> float:
    u = _unit(v)
    return float(x @ u) * float(level_radii(front, u[None, :])[0])


def _margin_plane(front: FrontModel, x: np.ndarray) -> float:
    angles = 2.0 * np.pi * np.arange(COARSE_ANGLES) / COARSE_ANGLES
    directions = np.column_stack([np.cos(angles), np.sin(angles)])
    values = (directions @ x) * level_radii(front, directions)
    best = float(values.max())
    width = 2.0 * np.pi / COARSE_ANGLES

    def negative(angle: float) -> float:
        return -_ray_value(front, x, np.array([np.cos(angle), np.sin(angle)]))

    for index in np.argsort(values)[::-1][:REFINED_STARTS]:
        centre = angles[index]
        result = optimize.minimize_scalar(
            negative,
            bounds=(centre - width, centre + width),
            method="bounded",
            options={"xatol": 1e-12},
        )
        best = max(best, -float(result.fun))
    return best


def _candidates(dimension: int, x: np.ndarray) -> np.ndarray:
    """Coarse directions: lattice neighbours, a spherical grid and x itself"""
    if dimension == 3:
        starts = [v for v in itertools.product((-1, 0, 1), repeat=3) if any(v)]
    else:
        eye = np.eye(dimension)
        starts = list(eye) + list(-eye)
    starts = np.array(starts, dtype=float)
    starts /= np.linalg.norm(starts, axis=1, keepdims=True)
    blocks = [starts, sample_directions(dimension, COARSE_SPHERE)]
    if np.any(x):
        blocks.append((x / np.linalg.norm(x))[None, :])
    return np.vstack(blocks)


def _margin_space(front: FrontModel, x: np.ndarray) -> float:
    candidates = _candidates(front.dimension, x)
    values = (candidates @ x) * level_radii(front, candidates)
    best = float(values.max())

    def negative(v: np.ndarray) -> float:
        if not np.any(v):
            return np.inf
        return -_ray_value(front, x, v)

    for index in np.argsort(values)[::-1][:SPACE_STARTS]:
        result = optimize.minimize(
            negative,
            candidates[index],
            method="Nelder-Mead",
            options={"xatol": 1e-10, "fatol": 1e-14, "maxiter": 4000},
        )
        best = max(best, -float(result.fun))
    return best


def support_margin(front: FrontModel, x: Sequence[float]) -> float:
    """sup over r in R of <x, r> minus nu"""
    x = np.asarray(x, dtype=float)
    if not np.any(x):
        return -front.nu
    if front.dimension == 1:
        r_low = -level_radius(front, [-1.0])
        r_high = level_radius(front, [1.0])
        return max(x[0] * r_low, x[0] * r_high) - front.nu
    if front.dimension == 2:
        return _margin_plane(front, x) - front.nu
    return _margin_space(front, x) - front.nu


def support_margins(front: FrontModel, points: np.ndarray, sample: FrontSample) -> np.ndarray:
    """Polytope approximation max_k <x, r_k> - nu over a dense sample of R.

    Exact in d = 1. Repeated rows are evaluated once.
    """
    points = np.asarray(points, dtype=float).reshape(-1, front.dimension)
    if len(points) == 0:
        return np.zeros(0)
    unique, inverse = np.unique(points, axis=0, return_inverse=True)
    margins = np.empty(len(unique))
    for first in range(0, len(unique), MARGIN_CHUNK):
        block = unique[first : first + MARGIN_CHUNK]
        margins[first : first + len(block)] = np.max(block @ sample.r.T, axis=1)
    return margins[np.ravel(inverse)] - front.nu


def classify_point(
    front: FrontModel,
    x: Sequence[float],
    epsilon: float,
    margin: Optional[float] = None,
) -> str:
    """outside (O_eps) iff margin > eps, inside (Q_eps) iff margin < -eps, else shell"""
    if not 0.0 < epsilon < front.nu:
        raise BadEpsilon(f"epsilon must lie in (0, {front.nu}), got {epsilon!r}")
    margin = support_margin(front, x) if margin is None else margin
    if margin > epsilon:
        return OUTSIDE
    if margin < -epsilon:
        return INSIDE
    return SHELL
