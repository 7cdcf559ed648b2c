"""Jump laws on Z^d"""

import itertools
from dataclasses import dataclass
from typing import Any, Dict, List, Sequence

import numpy as np

from cbrw.walk.base import JumpLaw, Marginal, check_exponent
from cbrw.walk.marginals import PROB_TOL


class FiniteSupport(JumpLaw):
    """Finitely many jump vectors with explicit probabilities"""

    kind = "finite_support"

    def __init__(self, vectors: Sequence[Sequence[int]], probs: Sequence[float]):
        self.vectors = np.atleast_2d(np.asarray(vectors, dtype=np.int64))
        self.probs = np.asarray(probs, dtype=float)
        self._cumulative = np.cumsum(self.probs)

    @property
    def dimension(self) -> int:
        return int(self.vectors.shape[1])

    def _products(self, u: np.ndarray, bound: float) -> np.ndarray:
        products = np.asarray(u) @ self.vectors.T
        check_exponent(products, bound)
        return products

    def mgf(self, u: np.ndarray, bound: float) -> np.ndarray:
        return np.exp(self._products(u, bound)) @ self.probs

    def mgf_m1(self, s: np.ndarray, bound: float) -> np.ndarray:
        return np.expm1(self._products(np.asarray(s, dtype=float), bound)) @ self.probs

    def grad_mgf(self, u: np.ndarray, bound: float) -> np.ndarray:
        weights = np.exp(self._products(u, bound)) * self.probs
        return weights @ self.vectors

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        u = rng.random(size) * self._cumulative[-1]
        index = np.searchsorted(self._cumulative, u, side="right")
        return self.vectors[np.minimum(index, len(self.probs) - 1)]

    def mean(self) -> np.ndarray:
        return self.probs @ self.vectors

    def second_moment(self) -> np.ndarray:
        vectors = self.vectors.astype(float)
        return vectors.T @ (vectors * self.probs[:, None])

    def zero_mass(self) -> float:
        return float(self.probs[np.all(self.vectors == 0, axis=1)].sum())

    @property
    def symmetric(self) -> bool:
        law = {tuple(v): p for v, p in zip(self.vectors.tolist(), self.probs.tolist())}
        return all(
            abs(law.get(tuple(-x for x in v), 0.0) - p) <= PROB_TOL for v, p in law.items()
        )

    def support_vectors(self) -> np.ndarray:
        return self.vectors[self.probs > 0]

    def validate(self) -> List[str]:
        problems = []
        rows = [tuple(v) for v in self.vectors.tolist()]
        if len(set(rows)) != len(rows):
            problems.append("finite_support: repeated jump vectors")
        if np.any(self.probs < 0):
            problems.append("finite_support: negative probability")
        if abs(self.probs.sum() - 1.0) > PROB_TOL:
            problems.append(f"finite_support: probabilities sum to {self.probs.sum()!r}")
        return problems

    def describe(self) -> Dict[str, Any]:
        return {
            "kind": self.kind,
            "jumps": [
                {"vector": v, "prob": p} for v, p in zip(self.vectors.tolist(), self.probs.tolist())
            ],
        }


@dataclass(frozen=True)
class AxisComponent:
    """Mixture component moving along a single axis"""

    axis: int
    weight: float
    marginal: Marginal


class AxisMixture(JumpLaw):
    """Each jump moves along exactly one axis, chosen by mixture weight"""

    kind = "axis_mixture"

    def __init__(self, dimension: int, components: Sequence[AxisComponent]):
        self._dimension = int(dimension)
        self.components = list(components)
        self.weights = np.array([c.weight for c in self.components], dtype=float)
        self._cumulative = np.cumsum(self.weights)

    @property
    def dimension(self) -> int:
        return self._dimension

    def mgf(self, u: np.ndarray, bound: float) -> np.ndarray:
        u = np.asarray(u)
        return sum(c.weight * c.marginal.mgf(u[..., c.axis], bound) for c in self.components)

    def mgf_m1(self, s: np.ndarray, bound: float) -> np.ndarray:
        s = np.asarray(s, dtype=float)
        return sum(c.weight * c.marginal.mgf_m1(s[..., c.axis], bound) for c in self.components)

    def grad_mgf(self, u: np.ndarray, bound: float) -> np.ndarray:
        u = np.asarray(u)
        grad = np.zeros(u.shape, dtype=np.result_type(u, float))
        for c in self.components:
            grad[..., c.axis] += c.weight * c.marginal.mgf_prime(u[..., c.axis], bound)
        return grad

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        u = rng.random(size) * self._cumulative[-1]
        choice = np.searchsorted(self._cumulative, u, side="right")
        choice = np.minimum(choice, len(self.components) - 1)
        jumps = np.zeros((size, self._dimension), dtype=np.int64)
        for index, c in enumerate(self.components):
            rows = np.flatnonzero(choice == index)
            if rows.size:
                jumps[rows, c.axis] = c.marginal.sample(rng, rows.size)
        return jumps

    def mean(self) -> np.ndarray:
        mean = np.zeros(self._dimension)
        for c in self.components:
            mean[c.axis] += c.weight * c.marginal.mean
        return mean

    def second_moment(self) -> np.ndarray:
        moment = np.zeros((self._dimension, self._dimension))
        for c in self.components:
            moment[c.axis, c.axis] += c.weight * c.marginal.second_moment
        return moment

    def zero_mass(self) -> float:
        return float(sum(c.weight * c.marginal.zero_mass for c in self.components))

    @property
    def symmetric(self) -> bool:
        return all(c.marginal.symmetric for c in self.components)

    def support_vectors(self) -> np.ndarray:
        vectors = []
        for c in self.components:
            if c.weight <= 0:
                continue
            for point in c.marginal.support_points():
                vector = np.zeros(self._dimension, dtype=np.int64)
                vector[c.axis] = point
                vectors.append(vector)
        return np.array(vectors, dtype=np.int64).reshape(-1, self._dimension)

    def validate(self) -> List[str]:
        problems = []
        for c in self.components:
            if not 0 <= c.axis < self._dimension:
                problems.append(f"axis_mixture: axis {c.axis} outside dimension {self._dimension}")
            problems += c.marginal.validate()
        if np.any(self.weights < 0):
            problems.append("axis_mixture: negative mixture weight")
        if abs(self.weights.sum() - 1.0) > PROB_TOL:
            problems.append(f"axis_mixture: weights sum to {self.weights.sum()!r}")
        return problems

    def describe(self) -> Dict[str, Any]:
        return {
            "kind": self.kind,
            "components": [
                {"axis": c.axis, "weight": c.weight, "marginal": c.marginal.describe()}
                for c in self.components
            ],
        }


class ProductMarginals(JumpLaw):
    """Independent coordinates, one marginal per axis"""

    kind = "product"

    def __init__(self, marginals: Sequence[Marginal]):
        self.marginals = list(marginals)

    @property
    def dimension(self) -> int:
        return len(self.marginals)

    def mgf(self, u: np.ndarray, bound: float) -> np.ndarray:
        u = np.asarray(u)
        result = self.marginals[0].mgf(u[..., 0], bound)
        for axis, marginal in enumerate(self.marginals[1:], start=1):
            result = result * marginal.mgf(u[..., axis], bound)
        return result

    def mgf_m1(self, s: np.ndarray, bound: float) -> np.ndarray:
        s = np.asarray(s, dtype=float)
        log_mgf = sum(np.log1p(m.mgf_m1(s[..., a], bound)) for a, m in enumerate(self.marginals))
        return np.expm1(log_mgf)

    def grad_mgf(self, u: np.ndarray, bound: float) -> np.ndarray:
        u = np.asarray(u)
        values = [m.mgf(u[..., a], bound) for a, m in enumerate(self.marginals)]
        primes = [m.mgf_prime(u[..., a], bound) for a, m in enumerate(self.marginals)]
        columns = []
        for axis in range(self.dimension):
            column = primes[axis]
            for other in range(self.dimension):
                if other != axis:
                    column = column * values[other]
            columns.append(column)
        return np.stack(columns, axis=-1)

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        return np.stack([m.sample(rng, size) for m in self.marginals], axis=-1)

    def mean(self) -> np.ndarray:
        return np.array([m.mean for m in self.marginals])

    def second_moment(self) -> np.ndarray:
        means = self.mean()
        moment = np.outer(means, means)
        np.fill_diagonal(moment, [m.second_moment for m in self.marginals])
        return moment

    def zero_mass(self) -> float:
        return float(np.prod([m.zero_mass for m in self.marginals]))

    @property
    def symmetric(self) -> bool:
        return all(m.symmetric for m in self.marginals)

    def support_vectors(self) -> np.ndarray:
        points = [m.support_points() for m in self.marginals]
        vectors = [v for v in itertools.product(*points) if any(v)]
        return np.array(vectors, dtype=np.int64).reshape(-1, self.dimension)

    def validate(self) -> List[str]:
        problems = []
        for marginal in self.marginals:
            problems += marginal.validate()
        return problems

    def describe(self) -> Dict[str, Any]:
        return {"kind": self.kind, "marginals": [m.describe() for m in self.marginals]}
