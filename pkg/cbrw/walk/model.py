"""Space-homogeneous continuous-time random walk on Z^d"""

from dataclasses import dataclass, field
from typing import Any, Dict, List, Tuple

import numpy as np
import structlog
from scipy import optimize

from cbrw.errors import (
    BadProbabilities,
    ModelError,
    NonFullRankSupport,
    RangeError,
    ZeroJumpInSupport,
)
from cbrw.walk.base import JumpLaw
from cbrw.walk.marginals import PROB_TOL

logger = structlog.get_logger()

DRIFT_TOL = 1e-12


@dataclass(frozen=True)
class JumpModel:
    """Walk with total jump rate q and jump law Y.

    H(s) = q (E exp<s, Y> - 1) is evaluated in closed form; the
    characteristic function is the same closed form at s = i theta.
    """

    dimension: int
    q: float
    law: JumpLaw
    exponent_bound: float = 700.0
    _cache: Dict[str, Any] = field(default_factory=dict, compare=False, repr=False)

    # ------------------------------------------------------------------
    # Transforms
    # ------------------------------------------------------------------

    def mgf(self, u: np.ndarray) -> np.ndarray:
        """E exp<u, Y> for real or complex u of shape (..., d)"""
        return self.law.mgf(np.asarray(u), self.exponent_bound)

    def log_mgf(self, s: np.ndarray) -> Any:
        """H(s) = q (E exp<s, Y> - 1)"""
        s = np.asarray(s, dtype=float)
        value = self.q * self.law.mgf_m1(s, self.exponent_bound)
        return float(value) if np.ndim(value) == 0 else value

    def grad_log_mgf(self, s: np.ndarray) -> np.ndarray:
        """Gradient of H, q E Y exp<s, Y>"""
        s = np.asarray(s, dtype=float)
        return self.q * np.real(self.law.grad_mgf(s, self.exponent_bound))

    def char_fn(self, theta: np.ndarray) -> Any:
        """phi(theta) = E exp(i <theta, Y>)"""
        value = self.law.mgf(1j * np.asarray(theta, dtype=float), self.exponent_bound)
        return complex(value) if np.ndim(value) == 0 else value

    # ------------------------------------------------------------------
    # Moments
    # ------------------------------------------------------------------

    def drift(self) -> np.ndarray:
        """q E Y, equal to the gradient of H at the origin"""
        return self.q * self.law.mean()

    def covariance(self) -> np.ndarray:
        """E Y Y^T"""
        return self.law.second_moment()

    @property
    def has_drift(self) -> bool:
        return bool(np.max(np.abs(self.law.mean())) > DRIFT_TOL)

    @property
    def recurrent(self) -> bool:
        """Zero-drift walks with finite variance are recurrent in d <= 2"""
        return self.dimension <= 2 and not self.has_drift

    @property
    def symmetric(self) -> bool:
        return self.law.symmetric

    def min_log_mgf(self) -> Tuple[np.ndarray, float]:
        """Minimizer s* of the convex function H and H(s*).

        H(s*) < 0 exactly when the drift is nonzero.
        """
        if "min" in self._cache:
            return self._cache["min"]
        if not self.has_drift:
            result = (np.zeros(self.dimension), 0.0)
            self._cache["min"] = result
            return result

        start = np.zeros(self.dimension)
        best = (start, 0.0)
        box = 1.0
        while box <= 64.0:
            bounds = [(-box, box)] * self.dimension
            try:
                solution = optimize.minimize(
                    self.log_mgf,
                    best[0],
                    jac=self.grad_log_mgf,
                    method="L-BFGS-B",
                    bounds=bounds,
                    options={"ftol": 1e-15, "gtol": 1e-12, "maxiter": 500},
                )
            except RangeError:
                break
            if solution.fun < best[1]:
                best = (np.asarray(solution.x, dtype=float), float(solution.fun))
            if np.max(np.abs(best[0])) < box * (1 - 1e-6):
                break
            box *= 2.0
        logger.debug("H minimized", s_star=best[0].tolist(), h_min=best[1])
        self._cache["min"] = best
        return best

    # ------------------------------------------------------------------
    # Sampling
    # ------------------------------------------------------------------

    def sample_jump(self, rng: np.random.Generator) -> np.ndarray:
        return self.law.sample(rng, 1)[0]

    def sample_jumps(self, rng: np.random.Generator, size: int) -> np.ndarray:
        return self.law.sample(rng, size)

    def describe(self) -> Dict[str, Any]:
        return {"dimension": self.dimension, "q": self.q, "law": self.law.describe()}


def validate_model(
    dimension: int, q: float, law: JumpLaw, exponent_bound: float = 700.0
) -> JumpModel:
    """Check every model invariant and build the JumpModel.

    Raises the most specific ModelError subclass; all violations found are
    listed in its diagnostics.
    """
    diagnostics: List[str] = []
    error_type = ModelError

    if dimension < 1:
        diagnostics.append(f"dimension must be positive, got {dimension}")
    if not q > 0:
        diagnostics.append(f"q must be positive, got {q}")
    if law.dimension != dimension:
        diagnostics.append(f"law dimension {law.dimension} != model dimension {dimension}")

    law_problems = law.validate()
    if law_problems:
        diagnostics += law_problems
        error_type = BadProbabilities
    elif law.zero_mass() > PROB_TOL:
        diagnostics.append(f"zero vector has probability {law.zero_mass()!r}")
        error_type = ZeroJumpInSupport
    elif law.dimension == dimension:
        support = law.support_vectors()
        rank = int(np.linalg.matrix_rank(support.astype(float))) if len(support) else 0
        if rank < dimension:
            diagnostics.append(f"support spans rank {rank} < {dimension}")
            error_type = NonFullRankSupport

    if diagnostics:
        logger.warning("Jump model rejected", diagnostics=diagnostics)
        raise error_type("; ".join(diagnostics), diagnostics)

    return JumpModel(dimension=dimension, q=float(q), law=law, exponent_bound=exponent_bound)
