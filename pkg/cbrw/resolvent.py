"""Lattice Green function G_lambda(0, x) by periodic quadrature.

G_lambda(0, x) = (2 pi)^-d  int exp(-i <theta, x>) / (lambda + q - q phi(theta)) dtheta

The integrand is periodic and analytic, so the uniform tensor trapezoid rule
converges geometrically. For walks with drift the contour is shifted to
s* + i theta with s* the minimizer of H, which keeps the denominator at
least lambda - H(s*) > 0 and makes lambda = 0 admissible.
"""

from dataclasses import dataclass, field
from typing import Dict, Iterator, List, Optional, Sequence, Tuple

import numpy as np
import structlog
from scipy import integrate

from cbrw.errors import ModelError, NonPositiveLambda, NumericalError, QuadratureNotConverged
from cbrw.walk.model import JumpModel

logger = structlog.get_logger()

CHUNK_POINTS = 1 << 20
FFT_MAX_POINTS = 1 << 22
FFT_MIN_DISPLACEMENTS = 16
IMAG_TOL = 1e-12

# cap grid points per peak width below which a line walk switches to adaptive quadrature
PEAK_RESOLUTION = 100.0
ADAPTIVE_RTOL = 1e-12
ADAPTIVE_LIMIT = 2000

DEFAULT_GRID_START = {1: 256, 2: 256, 3: 64}
DEFAULT_GRID_CAP = {1: 8192, 2: 8192, 3: 512}


@dataclass(frozen=True)
class QuadratureSettings:
    """Tolerances and grid sizes (points per dimension) for the resolvent"""

    quad_tol: float = 1e-10
    limit_tol: float = 1e-6
    lambda_min: float = 1e-8
    grid_start: Optional[int] = None
    grid_cap: Optional[int] = None

    def start(self, dimension: int) -> int:
        if self.grid_start:
            return self.grid_start
        return DEFAULT_GRID_START.get(dimension, 16)

    def cap(self, dimension: int) -> int:
        if self.grid_cap:
            return self.grid_cap
        return DEFAULT_GRID_CAP.get(dimension, 64)


@dataclass
class GreenEvaluation:
    """Values of G_lambda(0, x) at a list of displacements"""

    lam: float
    points: np.ndarray
    values: np.ndarray
    grid_size: int
    est_error: float
    tilt: np.ndarray = field(default_factory=lambda: np.zeros(0))
    method: str = "trapezoid"

    def __post_init__(self):
        self._index: Dict[Tuple[int, ...], int] = {
            tuple(int(v) for v in point): i for i, point in enumerate(self.points)
        }

    def value(self, x: Sequence[int]) -> float:
        return float(self.values[self._index[tuple(int(v) for v in x)]])

    def to_dict(self) -> Dict:
        return {
            "lambda": self.lam,
            "points": self.points.tolist(),
            "values": self.values.tolist(),
            "grid_size": self.grid_size,
            "est_error": self.est_error,
            "method": self.method,
        }


@dataclass
class GreenLimit:
    """lambda -> 0 limit of the Green function at a list of displacements.

    kind "transient": values are G_0(0, x).
    kind "recurrent": G_0 diverges; values are the limits of
    G_lambda(0, x) - G_lambda(0, 0).
    """

    kind: str
    points: np.ndarray
    values: np.ndarray
    grid_size: int
    est_error: float
    lambda_floor: float

    def __post_init__(self):
        self._index = {tuple(int(v) for v in p): i for i, p in enumerate(self.points)}

    def value(self, x: Sequence[int]) -> float:
        return float(self.values[self._index[tuple(int(v) for v in x)]])


# ============================================================================
# Grid machinery
# ============================================================================

def _theta(n: int) -> np.ndarray:
    return 2.0 * np.pi * np.arange(n) / n


def _grid_chunks(n: int, dimension: int) -> Iterator[Tuple[np.ndarray, np.ndarray]]:
    """Yield (row indices, theta points of shape (rows, n, ..., n, d)) in row-major order"""
    axis = _theta(n)
    rows_per_chunk = max(1, CHUNK_POINTS // n ** (dimension - 1))
    for first in range(0, n, rows_per_chunk):
        rows = np.arange(first, min(n, first + rows_per_chunk))
        grids = np.meshgrid(axis[rows], *([axis] * (dimension - 1)), indexing="ij")
        yield rows, np.stack(grids, axis=-1)


def _integrand(
    model: JumpModel,
    theta: np.ndarray,
    lam: float,
    tilt: np.ndarray,
    real: bool,
    puncture: bool = False,
) -> np.ndarray:
    """1 / (lambda + q - q M(tilt + i theta))

    With puncture the pole at theta = 0 is tolerated; callers zero that node.
    """
    mgf = model.mgf(tilt + 1j * theta)
    if real:
        mgf = np.real(mgf)
    mode = "ignore" if puncture else "warn"
    with np.errstate(divide=mode, invalid=mode):
        return 1.0 / (lam + model.q - model.q * mgf)


def _contract(f: np.ndarray, rows: np.ndarray, phases: List[np.ndarray]) -> np.ndarray:
    """sum_k f[k] prod_a phases[a][k_a, p] for a chunk of rows"""
    partial = f
    for axis in range(len(phases) - 1, 0, -1):
        if axis == len(phases) - 1:
            partial = partial @ phases[axis]
        else:
            partial = np.einsum("...jp,jp->...p", partial, phases[axis])
    if len(phases) == 1:
        return f @ phases[0][rows]
    return np.einsum("cp,cp->p", partial, phases[0][rows])


def _fourier_sums(
    model: JumpModel,
    lam: float,
    points: np.ndarray,
    n: int,
    tilt: np.ndarray,
    puncture: bool = False,
) -> Tuple[np.ndarray, np.ndarray]:
    """Trapezoid sums on the n-grid and on its even-index n/2 subgrid.

    Returns the complex Fourier coefficients (sum / grid points) before the
    exponential tilt factor is applied. With puncture the theta = 0 node is
    dropped from both sums.
    """
    dimension = model.dimension
    real = model.symmetric and not np.any(tilt)
    half = n // 2
    use_fft = len(points) > FFT_MIN_DISPLACEMENTS and n**dimension <= FFT_MAX_POINTS

    if use_fft:
        f = np.concatenate(
            [
                _integrand(model, theta, lam, tilt, real, puncture)
                for _, theta in _grid_chunks(n, dimension)
            ]
        )
        if puncture:
            f[(0,) * dimension] = 0.0
        fine_index = tuple(np.mod(points, n).T)
        coarse_index = tuple(np.mod(points, half).T)
        coarse_grid = f[(slice(None, None, 2),) * dimension]
        fine = np.fft.fftn(f)[fine_index] / n**dimension
        coarse = np.fft.fftn(coarse_grid)[coarse_index] / half**dimension
        return fine, coarse

    axis = _theta(n)
    phases = [np.exp(-1j * np.multiply.outer(axis, points[:, a])) for a in range(dimension)]
    coarse_phases = [phase[::2] for phase in phases]
    fine = np.zeros(len(points), dtype=complex)
    coarse = np.zeros(len(points), dtype=complex)
    inner = (slice(None, None, 2),) * (dimension - 1)
    for rows, theta in _grid_chunks(n, dimension):
        f = _integrand(model, theta, lam, tilt, real, puncture)
        if puncture and rows[0] == 0:
            f[(0,) * dimension] = 0.0
        fine += _contract(f, rows, phases)
        even = rows % 2 == 0
        if np.any(even):
            sub = f[even][(slice(None),) + inner]
            coarse += _contract(sub, rows[even] // 2, coarse_phases)
    return fine / n**dimension, coarse / half**dimension


def _real_part(values: np.ndarray, n: int, dimension: int) -> np.ndarray:
    scale = IMAG_TOL * np.maximum(1.0, np.abs(values.real)) * n ** (dimension / 2)
    residue = np.abs(values.imag)
    if np.any(residue > scale):
        raise NumericalError(f"imaginary quadrature residue {residue.max():.3e} too large")
    return values.real


def _as_points(points: Sequence[Sequence[int]], dimension: int) -> np.ndarray:
    array = np.asarray(points, dtype=np.int64).reshape(-1, dimension)
    return array


# ============================================================================
# Resolvent at lambda > 0
# ============================================================================

def evaluate_green(
    model: JumpModel,
    lam: float,
    points: Sequence[Sequence[int]],
    settings: Optional[QuadratureSettings] = None,
    allow_zero: bool = False,
) -> GreenEvaluation:
    """G_lambda(0, x) for every x in points, sharing one quadrature pass.

    The grid doubles until the difference between the n and n/2 sums is
    below quad_tol; the n value is returned.
    """
    settings = settings or QuadratureSettings()
    if lam < 0 or (lam == 0 and not (allow_zero and model.has_drift)):
        raise NonPositiveLambda(f"resolvent needs lambda > 0, got {lam!r}")

    dimension = model.dimension
    points_array = _as_points(points, dimension)
    if dimension == 1 and peak_width(model, lam) * settings.cap(1) < PEAK_RESOLUTION:
        return _line_adaptive(model, lam, points_array, settings)
    tilt = model.min_log_mgf()[0] if model.has_drift else np.zeros(dimension)
    weights = np.exp(-points_array.astype(float) @ tilt)

    n = settings.start(dimension)
    cap = settings.cap(dimension)
    est_error = np.inf
    while True:
        fine, coarse = _fourier_sums(model, lam, points_array, n, tilt)
        values = _real_part(fine, n, dimension) * weights
        est_error = float(np.max(np.abs(fine - coarse) * weights, initial=0.0))
        logger.debug("Green quadrature pass", lam=lam, grid_size=n, est_error=est_error)
        if est_error <= settings.quad_tol:
            break
        if n * 2 > cap:
            raise QuadratureNotConverged(
                f"Green function at lambda={lam:.6g} did not converge", est_error, n
            )
        n *= 2

    return GreenEvaluation(
        lam=lam,
        points=points_array,
        values=values,
        grid_size=n,
        est_error=est_error,
        tilt=tilt,
    )


def peak_width(model: JumpModel, lam: float) -> float:
    """Distance from the real axis of the pole nearest theta = 0.

    Zero-drift walks have lambda + q sigma^2 theta^2 / 2 near the origin, so
    the pole sits at sqrt(2 lambda / (q sigma^2)); the trapezoid error decays
    like exp(-n * width). Walks with drift have no peak.
    """
    if model.has_drift:
        return np.inf
    variance = float(np.trace(model.covariance())) / model.dimension
    return float(np.sqrt(2.0 * lam / (model.q * variance)))


def small_lambda_supported(model: JumpModel) -> bool:
    """Whether evaluate_green stays accurate for lambda far below the floor"""
    return model.has_drift or model.dimension == 1


def _line_adaptive(
    model: JumpModel, lam: float, points: np.ndarray, settings: QuadratureSettings
) -> GreenEvaluation:
    """Line walk with a peak too narrow for the grid cap.

    phi(-theta) is the conjugate of phi(theta), so a period integrates to
    twice the real part over [0, pi]. G(0, 0) and the bounded differences
    G(0, 0) - G(0, x) are integrated separately with breakpoints at
    geometric multiples of the peak width; the diverging part of the Green
    matrix is then exactly a multiple of the all-ones matrix.
    """
    q = model.q
    x = points[:, 0].astype(float)
    width = peak_width(model, lam)
    breaks = width * 4.0 ** np.arange(16)
    breaks = breaks[breaks < np.pi]

    def denominator(theta: float) -> complex:
        return lam + q - q * model.char_fn(np.array([theta]))

    def origin(theta: float) -> float:
        return (1.0 / denominator(theta)).real

    def differences(theta: float) -> np.ndarray:
        return ((1.0 - np.exp(-1j * theta * x)) / denominator(theta)).real

    centre, centre_error = integrate.quad(
        origin, 0.0, np.pi, points=breaks, epsabs=0.0, epsrel=ADAPTIVE_RTOL, limit=ADAPTIVE_LIMIT
    )
    spread, spread_error = integrate.quad_vec(
        differences,
        0.0,
        np.pi,
        points=breaks,
        epsabs=0.1 * settings.quad_tol,
        epsrel=ADAPTIVE_RTOL,
        norm="max",
        limit=ADAPTIVE_LIMIT,
    )
    est_error = float(spread_error) / np.pi
    logger.debug(
        "Adaptive Green quadrature",
        lam=lam,
        peak_width=width,
        est_error=est_error,
        centre_error=centre_error / np.pi,
    )
    if est_error > settings.quad_tol or centre_error > 1e-10 * abs(centre):
        raise QuadratureNotConverged(
            f"adaptive Green function at lambda={lam:.6g} did not converge", est_error, 0
        )
    return GreenEvaluation(
        lam=lam,
        points=points,
        values=(centre - np.asarray(spread)) / np.pi,
        grid_size=0,
        est_error=est_error,
        tilt=np.zeros(1),
        method="adaptive",
    )


def green_origin(
    model: JumpModel,
    lam: float,
    x: Optional[Sequence[int]] = None,
    settings: Optional[QuadratureSettings] = None,
) -> float:
    """G_lambda(0, x); x defaults to the origin"""
    x = [0] * model.dimension if x is None else list(x)
    return evaluate_green(model, lam, [x], settings).value(x)


def displacements(points: np.ndarray) -> np.ndarray:
    """Distinct differences points[j] - points[i], origin included"""
    points = np.asarray(points, dtype=np.int64)
    diffs = (points[None, :, :] - points[:, None, :]).reshape(-1, points.shape[1])
    diffs = np.vstack([np.zeros((1, points.shape[1]), dtype=np.int64), diffs])
    return np.unique(diffs, axis=0)


def assemble(points: np.ndarray, lookup) -> np.ndarray:
    """Matrix with entry (i, j) = lookup(points[j] - points[i])"""
    points = np.asarray(points, dtype=np.int64)
    size = len(points)
    matrix = np.empty((size, size))
    for i in range(size):
        for j in range(size):
            matrix[i, j] = lookup(points[j] - points[i])
    return matrix


def green_matrix(
    model: JumpModel,
    lam: float,
    points: Sequence[Sequence[int]],
    settings: Optional[QuadratureSettings] = None,
) -> np.ndarray:
    """Matrix of G_lambda(0, points_j - points_i); the points must be distinct"""
    points_array = _as_points(points, model.dimension)
    if len(np.unique(points_array, axis=0)) != len(points_array):
        raise ModelError(f"Green matrix points repeat: {points_array.tolist()}")
    evaluation = evaluate_green(model, lam, displacements(points_array), settings)
    return assemble(points_array, evaluation.value)


# ============================================================================
# lambda -> 0
# ============================================================================

def _extrapolate(levels: List[np.ndarray], power: int) -> Tuple[np.ndarray, float]:
    """Richardson extrapolation of grid-doubling levels (coarse to fine).

    Leading error terms are h^power and h^(power + 2).
    """
    if len(levels) == 1:
        return levels[0], np.inf
    first = [
        (2.0**power * fine - coarse) / (2.0**power - 1.0)
        for coarse, fine in zip(levels, levels[1:])
    ]
    if len(first) == 1:
        best = first[0]
        return best, float(np.max(np.abs(best - levels[-1]), initial=0.0))
    factor = 2.0 ** (power + 2)
    second = [
        (factor * fine - coarse) / (factor - 1.0) for coarse, fine in zip(first, first[1:])
    ]
    best = second[-1]
    previous = second[-2] if len(second) > 1 else first[-1]
    return best, float(np.max(np.abs(best - previous), initial=0.0))


def green_limit(
    model: JumpModel,
    points: Sequence[Sequence[int]],
    settings: Optional[QuadratureSettings] = None,
) -> GreenLimit:
    """lambda -> 0 limit of the Green function at the given displacements.

    Walks with drift are transient and the shifted contour handles lambda = 0
    directly. For zero-drift walks the theta = 0 node is removed, the other
    nodes are evaluated at lambda = 0 and the grid error, a power series in
    the spacing, is removed by Richardson extrapolation. Recurrent walks only
    have finite limits of the differences G(0, x) - G(0, 0).
    """
    settings = settings or QuadratureSettings()
    dimension = model.dimension
    points_array = _as_points(points, dimension)

    if model.has_drift:
        evaluation = evaluate_green(model, 0.0, points_array, settings, allow_zero=True)
        return GreenLimit(
            kind="transient",
            points=points_array,
            values=evaluation.values,
            grid_size=evaluation.grid_size,
            est_error=evaluation.est_error,
            lambda_floor=0.0,
        )

    recurrent = model.recurrent
    power = dimension if recurrent else dimension - 2
    with_origin = np.vstack([np.zeros((1, dimension), dtype=np.int64), points_array])
    tilt = np.zeros(dimension)
    lam = 0.0

    def punctured(sums: np.ndarray, n: int) -> np.ndarray:
        values = _real_part(sums, n, dimension)
        return values[1:] - values[0] if recurrent else values[1:]

    n = settings.start(dimension)
    cap = settings.cap(dimension)
    fine, coarse = _fourier_sums(model, lam, with_origin, n, tilt, puncture=True)
    levels = [punctured(coarse, n // 2), punctured(fine, n)]
    while True:
        best, est_error = _extrapolate(levels, power)
        logger.debug("Green limit pass", grid_size=n, est_error=est_error, recurrent=recurrent)
        if est_error <= settings.limit_tol:
            break
        if n * 2 > cap:
            raise QuadratureNotConverged("Green function limit did not converge", est_error, n)
        n *= 2
        fine, _ = _fourier_sums(model, lam, with_origin, n, tilt, puncture=True)
        levels.append(punctured(fine, n))

    logger.info(
        "Green limit computed",
        kind="recurrent" if recurrent else "transient",
        grid_size=n,
        est_error=est_error,
    )
    return GreenLimit(
        kind="recurrent" if recurrent else "transient",
        points=points_array,
        values=best,
        grid_size=n,
        est_error=est_error,
        lambda_floor=lam,
    )
