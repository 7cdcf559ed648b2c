"""Abstract jump distributions"""

from abc import ABC, abstractmethod
from typing import Any, Dict, List

import numpy as np

from cbrw.errors import RangeError


def check_exponent(values: Any, bound: float) -> None:
    """Raise RangeError if any real exponent exceeds the bound"""
    peak = np.max(np.real(np.asarray(values)), initial=-np.inf)
    if peak > bound:
        raise RangeError(f"exponent {peak:.6g} exceeds bound {bound:.6g}")


class Marginal(ABC):
    """One-dimensional integer-valued jump component.

    All evaluation methods accept real or complex numpy arrays and work
    elementwise, so the same closed forms give the moment generating
    function (real argument) and the characteristic function (imaginary
    argument).
    """

    kind: str = ""

    @abstractmethod
    def mgf(self, u: np.ndarray, bound: float) -> np.ndarray:
        """E exp(u X)"""
        pass

    @abstractmethod
    def mgf_m1(self, u: np.ndarray, bound: float) -> np.ndarray:
        """E exp(u X) - 1 for real u, without cancellation near u = 0"""
        pass

    @abstractmethod
    def mgf_prime(self, u: np.ndarray, bound: float) -> np.ndarray:
        """E X exp(u X)"""
        pass

    @abstractmethod
    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        """Draw integer samples"""
        pass

    @property
    @abstractmethod
    def mean(self) -> float:
        pass

    @property
    @abstractmethod
    def second_moment(self) -> float:
        pass

    @property
    @abstractmethod
    def zero_mass(self) -> float:
        """P(X = 0)"""
        pass

    @property
    @abstractmethod
    def symmetric(self) -> bool:
        pass

    @abstractmethod
    def support_points(self) -> List[int]:
        """A few support points, enough to decide the rank of a span"""
        pass

    @abstractmethod
    def validate(self) -> List[str]:
        """Diagnostics for violated invariants (empty when valid)"""
        pass

    @abstractmethod
    def describe(self) -> Dict[str, Any]:
        pass


class JumpLaw(ABC):
    """Distribution of the jump vector Y on Z^d"""

    kind: str = ""

    @property
    @abstractmethod
    def dimension(self) -> int:
        pass

    @abstractmethod
    def mgf(self, u: np.ndarray, bound: float) -> np.ndarray:
        """E exp(<u, Y>) for u of shape (..., d)"""
        pass

    @abstractmethod
    def mgf_m1(self, s: np.ndarray, bound: float) -> np.ndarray:
        """E exp(<s, Y>) - 1 for real s"""
        pass

    @abstractmethod
    def grad_mgf(self, u: np.ndarray, bound: float) -> np.ndarray:
        """E Y exp(<u, Y>), shape (..., d)"""
        pass

    @abstractmethod
    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        """Draw jumps, shape (size, d)"""
        pass

    @abstractmethod
    def mean(self) -> np.ndarray:
        pass

    @abstractmethod
    def second_moment(self) -> np.ndarray:
        """E Y Y^T"""
        pass

    @abstractmethod
    def zero_mass(self) -> float:
        pass

    @property
    @abstractmethod
    def symmetric(self) -> bool:
        pass

    @abstractmethod
    def support_vectors(self) -> np.ndarray:
        """Representative support vectors spanning the same space as the support"""
        pass

    @abstractmethod
    def validate(self) -> List[str]:
        pass

    @abstractmethod
    def describe(self) -> Dict[str, Any]:
        pass
