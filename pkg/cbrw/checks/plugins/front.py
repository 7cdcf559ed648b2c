"""Checks of the level set and the propagation front"""

from typing import Dict, List, Tuple

import numpy as np
import structlog

from cbrw.checks.base import BaseCheck, CheckResult
from cbrw.context import RunContext
from cbrw.front import FrontModel, sample_front, support_margin
from cbrw.walk.catalogue import (
    FRONT_LEVELS,
    example_1,
    example_2a,
    example_2b,
    example_2c,
    example_3,
)

logger = structlog.get_logger()


def square_lattice_front(nu: float, q: float) -> Tuple[float, float]:
    """Axis crossing and diagonal coordinate of the simple-walk front on Z^2.

    On an axis H(r e_1) = (q / 2)(cosh r - 1) and z = nu / r; on the
    diagonal H(a, a) = q (cosh a - 1) and z = (nu / (2 a), nu / (2 a)).
    """
    axis = nu / np.arccosh(1.0 + 2.0 * nu / q)
    diagonal = nu / (2.0 * np.arccosh(1.0 + nu / q))
    return float(axis), float(diagonal)


def line_front(nu: float, q: float, p_right: float) -> Tuple[float, float]:
    """nu / r for the two roots of H(r) = nu, H(r) = q (p e^r + (1 - p) e^-r - 1).

    With y = e^r the level equation is p y^2 - (1 + nu / q) y + (1 - p) = 0.
    """
    b = 1.0 + nu / q
    root = np.sqrt(b * b - 4.0 * p_right * (1.0 - p_right))
    r_left = np.log((b - root) / (2.0 * p_right))
    r_right = np.log((b + root) / (2.0 * p_right))
    return float(nu / r_left), float(nu / r_right)


class SquareLatticeFrontCheck(BaseCheck):
    check_id = "C4"
    description = "Front of the simple walk on Z^2 at nu = 2, q = 2"
    time_limit = 10.0
    resolution = 720
    axis_tolerance = 1e-6
    diagonal_tolerance = 1e-4
    symmetry_tolerance = 1e-9
    q = 2.0

    def run(self, context: RunContext) -> CheckResult:
        nu = FRONT_LEVELS["example_2a"]
        sample = sample_front(FrontModel(example_2a(self.q), nu), self.resolution)
        z = sample.z
        axis, diagonal = square_lattice_front(nu, self.q)
        quarter = self.resolution // 4

        axis_error = max(
            abs(z[0, 0] - axis),
            abs(z[2 * quarter, 0] + axis),
            abs(z[quarter, 1] - axis),
            abs(z[3 * quarter, 1] + axis),
        )
        diagonal_error = float(np.max(np.abs(z[quarter // 2] - diagonal)))

        index = np.arange(self.resolution)
        rotated = np.column_stack([-z[:, 1], z[:, 0]])
        mirrored = np.column_stack([z[:, 0], -z[:, 1]])
        swapped = z[:, ::-1]
        symmetry_error = max(
            float(np.max(np.abs(z[(index + quarter) % self.resolution] - rotated))),
            float(np.max(np.abs(z[(-index) % self.resolution] - mirrored))),
            float(np.max(np.abs(z[(quarter - index) % self.resolution] - swapped))),
        )

        measured = {
            "axis_error": float(axis_error),
            "diagonal_error": diagonal_error,
            "symmetry_error": symmetry_error,
        }
        threshold = {
            "axis_error": self.axis_tolerance,
            "diagonal_error": self.diagonal_tolerance,
            "symmetry_error": self.symmetry_tolerance,
        }
        passed = all(measured[key] < threshold[key] for key in measured)
        return self.result(
            passed,
            measured,
            threshold,
            axis_crossing=axis,
            diagonal=diagonal,
            x_extent=[float(z[:, 0].min()), float(z[:, 0].max())],
        )


class FrontConsistencyCheck(BaseCheck):
    """z(r) sits on the boundary of the half-spaces {<x, r'> <= nu}"""

    check_id = "C5"
    description = "support_margin(z(r)) = 0 and <z(r), r'> < nu on the worked examples"
    margin_tolerance = 1e-7
    points_per_model = 50

    def _models(self) -> List[Tuple[str, FrontModel]]:
        return [
            ("example_2a", FrontModel(example_2a(), FRONT_LEVELS["example_2a"])),
            ("example_2b", FrontModel(example_2b(), FRONT_LEVELS["example_2b"])),
            ("example_2c", FrontModel(example_2c(), FRONT_LEVELS["example_2c"])),
            ("example_3", FrontModel(example_3(), FRONT_LEVELS["example_3"])),
        ]

    def _sample(self, front: FrontModel):
        if front.dimension == 2:
            return sample_front(front, self.points_per_model)
        sample = sample_front(front, int(np.ceil(np.sqrt(self.points_per_model))) + 1)
        keep = np.linspace(0, len(sample) - 1, self.points_per_model).round().astype(int)
        sample.directions, sample.r, sample.z = (
            sample.directions[keep],
            sample.r[keep],
            sample.z[keep],
        )
        return sample

    def run(self, context: RunContext) -> CheckResult:
        worst_margin = 0.0
        worst_gap = -np.inf
        per_model: Dict[str, Dict[str, float]] = {}
        for name, front in self._models():
            sample = self._sample(front)
            margins = np.array([support_margin(front, z) for z in sample.z])
            products = sample.z @ sample.r.T - front.nu
            np.fill_diagonal(products, -np.inf)
            per_model[name] = {
                "points": len(sample),
                "max_abs_margin": float(np.max(np.abs(margins))),
                "max_off_diagonal": float(products.max()),
            }
            worst_margin = max(worst_margin, per_model[name]["max_abs_margin"])
            worst_gap = max(worst_gap, per_model[name]["max_off_diagonal"])
            logger.debug("Front consistency", model=name, **per_model[name])

        measured = {"max_abs_margin": worst_margin, "max_off_diagonal": float(worst_gap)}
        threshold = {"max_abs_margin": self.margin_tolerance, "max_off_diagonal": 0.0}
        passed = worst_margin < self.margin_tolerance and worst_gap < 0.0
        return self.result(passed, measured, threshold, models=per_model)


class LineFrontCheck(BaseCheck):
    check_id = "C6"
    description = "Front on Z equals {nu / r_1, nu / r_2}"
    tolerance = 1e-10
    cases = (
        (0.5, 1.0, 0.5),
        (1.0, 1.0, 0.5),
        (2.0, 2.0, 0.7),
        (0.25, 3.0, 0.3),
        (4.0, 0.5, 0.6),
    )

    def run(self, context: RunContext) -> CheckResult:
        errors = {}
        for nu, q, p_right in self.cases:
            sample = sample_front(FrontModel(example_1(q, p_right), nu), 2)
            left, right = line_front(nu, q, p_right)
            # directions are [-1] then [+1]
            error = max(abs(sample.z[0, 0] - left), abs(sample.z[1, 0] - right))
            errors[f"nu={nu:g},q={q:g},p={p_right:g}"] = float(error)
        worst = max(errors.values())
        return self.result(worst < self.tolerance, worst, self.tolerance, errors=errors)
