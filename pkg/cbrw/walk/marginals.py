"""One-dimensional jump marginals with closed-form transforms"""

from typing import Any, Dict, List, Sequence

import numpy as np

from cbrw.walk.base import Marginal, check_exponent

PROB_TOL = 1e-12


class Rademacher(Marginal):
    """+1 or -1 with probability 1/2 each"""

    kind = "rademacher"

    def mgf(self, u: np.ndarray, bound: float) -> np.ndarray:
        check_exponent(np.abs(np.real(u)), bound)
        return np.cosh(u)

    def mgf_m1(self, u: np.ndarray, bound: float) -> np.ndarray:
        check_exponent(np.abs(u), bound)
        return 2.0 * np.sinh(0.5 * np.asarray(u)) ** 2

    def mgf_prime(self, u: np.ndarray, bound: float) -> np.ndarray:
        check_exponent(np.abs(np.real(u)), bound)
        return np.sinh(u)

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        return np.where(rng.random(size) < 0.5, 1, -1).astype(np.int64)

    @property
    def mean(self) -> float:
        return 0.0

    @property
    def second_moment(self) -> float:
        return 1.0

    @property
    def zero_mass(self) -> float:
        return 0.0

    @property
    def symmetric(self) -> bool:
        return True

    def support_points(self) -> List[int]:
        return [1, -1]

    def validate(self) -> List[str]:
        return []

    def describe(self) -> Dict[str, Any]:
        return {"kind": self.kind}


class DisplacedPoisson(Marginal):
    """Two-sided displaced Poisson law.

    Takes the value +n with probability p_plus * sigma_plus^(n-1) e^(-sigma_plus) / (n-1)!
    and -n with probability p_minus * sigma_minus^(n-1) e^(-sigma_minus) / (n-1)!, n >= 1.
    """

    kind = "displaced_poisson"

    def __init__(self, sigma_plus: float, sigma_minus: float, p_plus: float, p_minus: float):
        self.sigma_plus = float(sigma_plus)
        self.sigma_minus = float(sigma_minus)
        self.p_plus = float(p_plus)
        self.p_minus = float(p_minus)

    def _exponents(self, u: np.ndarray, bound: float):
        u = np.asarray(u)
        check_exponent(np.abs(np.real(u)), bound)
        up = self.sigma_plus * (np.exp(u) - 1.0) + u
        down = self.sigma_minus * (np.exp(-u) - 1.0) - u
        if self.p_plus > 0:
            check_exponent(up, bound)
        if self.p_minus > 0:
            check_exponent(down, bound)
        return up, down

    def mgf(self, u: np.ndarray, bound: float) -> np.ndarray:
        up, down = self._exponents(u, bound)
        result = np.zeros(np.shape(up), dtype=np.result_type(up, float))
        if self.p_plus > 0:
            result = result + self.p_plus * np.exp(up)
        if self.p_minus > 0:
            result = result + self.p_minus * np.exp(down)
        return result

    def mgf_m1(self, u: np.ndarray, bound: float) -> np.ndarray:
        u = np.asarray(u, dtype=float)
        self._exponents(u, bound)
        up = self.sigma_plus * np.expm1(u) + u
        down = self.sigma_minus * np.expm1(-u) - u
        return self.p_plus * np.expm1(up) + self.p_minus * np.expm1(down)

    def mgf_prime(self, u: np.ndarray, bound: float) -> np.ndarray:
        up, down = self._exponents(u, bound)
        u = np.asarray(u)
        result = np.zeros(np.shape(up), dtype=np.result_type(up, float))
        if self.p_plus > 0:
            result = result + self.p_plus * np.exp(up) * (self.sigma_plus * np.exp(u) + 1.0)
        if self.p_minus > 0:
            result = result - self.p_minus * np.exp(down) * (self.sigma_minus * np.exp(-u) + 1.0)
        return result

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        positive = rng.random(size) < self.p_plus
        sigma = np.where(positive, self.sigma_plus, self.sigma_minus)
        magnitude = 1 + rng.poisson(sigma)
        return np.where(positive, magnitude, -magnitude).astype(np.int64)

    @property
    def mean(self) -> float:
        return self.p_plus * (self.sigma_plus + 1.0) - self.p_minus * (self.sigma_minus + 1.0)

    @property
    def second_moment(self) -> float:
        plus = self.sigma_plus + (self.sigma_plus + 1.0) ** 2
        minus = self.sigma_minus + (self.sigma_minus + 1.0) ** 2
        return self.p_plus * plus + self.p_minus * minus

    @property
    def zero_mass(self) -> float:
        return 0.0

    @property
    def symmetric(self) -> bool:
        return self.sigma_plus == self.sigma_minus and self.p_plus == self.p_minus

    def support_points(self) -> List[int]:
        points = []
        if self.p_plus > 0:
            points += [1, 2] if self.sigma_plus > 0 else [1]
        if self.p_minus > 0:
            points += [-1, -2] if self.sigma_minus > 0 else [-1]
        return points

    def validate(self) -> List[str]:
        problems = []
        if self.sigma_plus < 0 or self.sigma_minus < 0:
            problems.append("displaced_poisson: sigma must be nonnegative")
        if self.p_plus < 0 or self.p_minus < 0:
            problems.append("displaced_poisson: probabilities must be nonnegative")
        if abs(self.p_plus + self.p_minus - 1.0) > PROB_TOL:
            problems.append(
                f"displaced_poisson: p_plus + p_minus = {self.p_plus + self.p_minus!r} != 1"
            )
        return problems

    def describe(self) -> Dict[str, Any]:
        return {
            "kind": self.kind,
            "sigma_plus": self.sigma_plus,
            "sigma_minus": self.sigma_minus,
            "p_plus": self.p_plus,
            "p_minus": self.p_minus,
        }


class FiniteList(Marginal):
    """Finite list of (integer value, probability)"""

    kind = "finite_list"

    def __init__(self, values: Sequence[int], probs: Sequence[float]):
        self.values = np.asarray(values, dtype=np.int64)
        self.probs = np.asarray(probs, dtype=float)
        self._cumulative = np.cumsum(self.probs)

    def _products(self, u: np.ndarray, bound: float) -> np.ndarray:
        products = np.multiply.outer(np.asarray(u), self.values)
        check_exponent(products, bound)
        return products

    def mgf(self, u: np.ndarray, bound: float) -> np.ndarray:
        return np.exp(self._products(u, bound)) @ self.probs

    def mgf_m1(self, u: np.ndarray, bound: float) -> np.ndarray:
        return np.expm1(self._products(np.asarray(u, dtype=float), bound)) @ self.probs

    def mgf_prime(self, u: np.ndarray, bound: float) -> np.ndarray:
        return np.exp(self._products(u, bound)) @ (self.probs * self.values)

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        u = rng.random(size) * self._cumulative[-1]
        index = np.searchsorted(self._cumulative, u, side="right")
        return self.values[np.minimum(index, len(self.values) - 1)]

    @property
    def mean(self) -> float:
        return float(self.probs @ self.values)

    @property
    def second_moment(self) -> float:
        return float(self.probs @ self.values.astype(float) ** 2)

    @property
    def zero_mass(self) -> float:
        return float(self.probs[self.values == 0].sum())

    @property
    def symmetric(self) -> bool:
        law = dict(zip(self.values.tolist(), self.probs.tolist()))
        return all(abs(law.get(-v, 0.0) - p) <= PROB_TOL for v, p in law.items())

    def support_points(self) -> List[int]:
        return [int(v) for v, p in zip(self.values, self.probs) if p > 0]

    def validate(self) -> List[str]:
        problems = []
        if len(self.values) == 0:
            problems.append("finite_list: empty support")
            return problems
        if len(set(self.values.tolist())) != len(self.values):
            problems.append("finite_list: repeated values")
        if np.any(self.probs < 0):
            problems.append("finite_list: negative probability")
        if abs(self.probs.sum() - 1.0) > PROB_TOL:
            problems.append(f"finite_list: probabilities sum to {self.probs.sum()!r}")
        return problems

    def describe(self) -> Dict[str, Any]:
        return {"kind": self.kind, "values": self.values.tolist(), "probs": self.probs.tolist()}
