"""Checks of the Malthusian solver, the resolvent and criticality"""

from typing import Optional

import numpy as np
import structlog
from scipy import integrate, optimize, special

from cbrw.checks.base import BaseCheck, CheckResult
from cbrw.context import RunContext
from cbrw.malthus import (
    Catalyst,
    CatalyticSystem,
    Deterministic,
    classify,
    lambda_grid,
    rho_curve,
)
from cbrw.resolvent import green_origin
from cbrw.walk.catalogue import nearest_neighbour

logger = structlog.get_logger()

CUBIC_EXPECTED_RHO = 0.6724


def _nearest_neighbour_line(context: RunContext) -> bool:
    # a symmetric law on Z \ {0} with E Y^2 = 1 puts mass 1/2 on each of -1, +1
    model = context.model
    if model.dimension != 1 or not model.symmetric:
        return False
    return abs(float(model.covariance()[0, 0]) - 1.0) < 1e-12


def simple_walk_taboo(lam: float, q: float) -> float:
    """Return transform of the simple walk on Z to its start after the first jump"""
    return (lam + q - np.sqrt(lam * lam + 2.0 * lam * q)) / q


def single_catalyst_nu(q: float, alpha: float, m: float) -> float:
    """Root of alpha m G*(nu) + (1 - alpha) G*(nu) F(nu) = 1 for the simple walk on Z"""
    beta = q / (1.0 - alpha)

    def excess(lam: float) -> float:
        hold = beta / (beta + lam)
        return alpha * m * hold + (1.0 - alpha) * hold * simple_walk_taboo(lam, q) - 1.0

    upper = 1.0
    while excess(upper) > 0:
        upper *= 2.0
    return float(optimize.brentq(excess, 0.0, upper, xtol=1e-15, rtol=1e-15))


def cubic_return_probability() -> float:
    """Return probability of the simple walk on Z^3 from its expected occupation time.

    The occupation time of the origin is int_0^inf exp(-t) I_0(t / 3)^3 dt.
    """

    def density(t: float) -> float:
        return float(special.ive(0, t / 3.0) ** 3)

    head, _ = integrate.quad(density, 0.0, 100.0, limit=400, epsabs=1e-13, epsrel=1e-13)
    tail, _ = integrate.quad(density, 100.0, np.inf, limit=400, epsabs=1e-13, epsrel=1e-13)
    return 1.0 - 1.0 / (head + tail)


class MalthusClosedFormCheck(BaseCheck):
    check_id = "C1"
    description = "Malthusian parameter of one catalyst on Z against the closed form"
    time_limit = 5.0
    tolerance = 1e-8

    def skip_reason(self, context: RunContext) -> Optional[str]:
        if not _nearest_neighbour_line(context):
            return "needs the symmetric nearest-neighbour walk on Z"
        if context.system.size != 1:
            return "needs a single catalyst"
        if context.solution.nu is None:
            return "system is not supercritical"
        return None

    def run(self, context: RunContext) -> CheckResult:
        catalyst = context.system.catalysts[0]
        expected = single_catalyst_nu(context.model.q, catalyst.alpha, catalyst.m)
        nu = context.solved_nu
        error = abs(nu - expected)
        return self.result(error < self.tolerance, error, self.tolerance, nu=nu, expected=expected)


class GreenClosedFormCheck(BaseCheck):
    check_id = "C2"
    description = "G_lambda(0, 0) on Z against 1 / sqrt(lambda^2 + 2 lambda q)"
    time_limit = 5.0
    tolerance = 1e-10
    lambdas = (0.1, 1.0, 5.0)
    rates = (1.0, 2.0)

    def run(self, context: RunContext) -> CheckResult:
        quadrature = context.settings.quadrature
        errors = {}
        for q in self.rates:
            model = nearest_neighbour(1, q)
            for lam in self.lambdas:
                value = green_origin(model, lam, settings=quadrature)
                exact = 1.0 / np.sqrt(lam * lam + 2.0 * lam * q)
                errors[f"q={q:g},lambda={lam:g}"] = abs(value - exact)
        worst = max(errors.values())
        return self.result(worst < self.tolerance, worst, self.tolerance, errors=errors)


class CubicCriticalityCheck(BaseCheck):
    check_id = "C3"
    description = "Simple walk on Z^3 with alpha = 0.2, m = 2 is not supercritical"
    tolerance = 5e-4
    alpha = 0.2
    offspring = 2

    def run(self, context: RunContext) -> CheckResult:
        system = CatalyticSystem(
            model=nearest_neighbour(3, 1.0),
            catalysts=(Catalyst((0, 0, 0), self.alpha, Deterministic(self.offspring)),),
            start=(0, 0, 0),
        )
        classification = classify(system, context.settings)
        returns = cubic_return_probability()
        expected = self.alpha * self.offspring + (1.0 - self.alpha) * returns
        error = abs(classification.rho_at_floor - expected)
        passed = (
            not classification.supercritical
            and error < self.tolerance
            and abs(expected - CUBIC_EXPECTED_RHO) < self.tolerance
        )
        return self.result(
            passed,
            error,
            self.tolerance,
            regime=classification.regime,
            rho=classification.rho_at_floor,
            expected=expected,
            return_probability=returns,
        )


class MonotonicityCheck(BaseCheck):
    check_id = "C11"
    description = "rho(D(lambda)) strictly decreasing; nu + q > alpha beta (m - 1)"
    points = 20

    def skip_reason(self, context: RunContext) -> Optional[str]:
        if context.solution.nu is None:
            return "system is not supercritical"
        return None

    def run(self, context: RunContext) -> CheckResult:
        solution = context.solution
        nu = context.solved_nu
        grid = lambda_grid(nu, solution.bracket[1], self.points, context.settings)
        values = rho_curve(context.system, grid, context.settings)
        steps = np.diff(values)
        largest_step = float(steps.max())
        bound = solution.growth_bound
        passed = bool(np.all(steps < 0)) and (bound is None or bound["holds"])
        return self.result(
            passed,
            largest_step,
            0.0,
            lambdas=grid,
            rho=values.tolist(),
            growth_bound=bound,
        )
