"""
Unit tests for the Green function quadrature
"""

import numpy as np
import pytest

from cbrw.errors import ModelError, NonPositiveLambda, QuadratureNotConverged
from cbrw.resolvent import (
    QuadratureSettings,
    displacements,
    evaluate_green,
    green_limit,
    green_matrix,
    green_origin,
    peak_width,
)
from cbrw.walk.catalogue import example_1

WATSON_INTEGRAL = 1.516386059151978


def line_green(lam, q, x=0):
    """G_lambda(0, x) of the symmetric nearest-neighbour walk on Z"""
    root = np.sqrt(lam * lam + 2.0 * lam * q)
    return ((lam + q - root) / q) ** abs(x) / root


@pytest.mark.unit
class TestEvaluateGreen:
    """Test evaluate_green functionality"""

    @pytest.mark.parametrize("lam", [0.1, 1.0, 5.0])
    @pytest.mark.parametrize("q", [1.0, 2.0])
    def test_line_closed_form(self, lam, q):
        """Test G_lambda(0, 0) = 1 / sqrt(lambda^2 + 2 lambda q) on Z"""
        assert green_origin(example_1(q=q), lam) == pytest.approx(line_green(lam, q), abs=1e-10)

    def test_line_off_origin(self, line_model):
        """Test the geometric decay of G_lambda(0, x) on Z"""
        evaluation = evaluate_green(line_model, 0.5, [[0], [1], [-3], [4]])
        for x in (0, 1, -3, 4):
            assert evaluation.value([x]) == pytest.approx(line_green(0.5, 1.0, x), abs=1e-10)

    def test_shared_pass_metadata(self, line_model):
        """Test that one pass reports grid size and error for all points"""
        evaluation = evaluate_green(line_model, 1.0, [[0], [2]])
        assert evaluation.grid_size >= 256
        assert evaluation.est_error <= 1e-10
        assert evaluation.to_dict()["lambda"] == 1.0

    def test_square_lattice_symmetry(self, square_model):
        """Test that the square lattice resolvent respects the lattice symmetries"""
        evaluation = evaluate_green(square_model, 0.3, [[1, 0], [0, 1], [-1, 0], [2, 1], [1, 2]])
        assert evaluation.value([1, 0]) == pytest.approx(evaluation.value([0, 1]), abs=1e-10)
        assert evaluation.value([1, 0]) == pytest.approx(evaluation.value([-1, 0]), abs=1e-10)
        assert evaluation.value([2, 1]) == pytest.approx(evaluation.value([1, 2]), abs=1e-10)

    def test_drifting_walk_positive_lambda(self):
        """Test the tilted contour against the closed form of a biased walk"""
        model = example_1(q=1.0, p_right=0.7)
        expected = 1.0 / np.sqrt(1.5**2 - 4.0 * 0.7 * 0.3)
        assert green_origin(model, 0.5) == pytest.approx(expected, abs=1e-10)

    def test_drifting_walk_at_zero(self):
        """Test that a transient walk with drift accepts lambda = 0"""
        model = example_1(q=1.0, p_right=0.7)
        evaluation = evaluate_green(model, 0.0, [[0], [3], [-2]], allow_zero=True)
        assert evaluation.value([0]) == pytest.approx(2.5, abs=1e-9)
        assert evaluation.value([3]) == pytest.approx(2.5, abs=1e-9)
        assert evaluation.value([-2]) == pytest.approx(2.5 * (3.0 / 7.0) ** 2, abs=1e-9)

    def test_zero_lambda_rejected_without_drift(self, line_model):
        """Test that lambda = 0 is rejected for zero-drift walks"""
        with pytest.raises(NonPositiveLambda):
            evaluate_green(line_model, 0.0, [[0]], allow_zero=True)

    def test_negative_lambda_rejected(self, line_model):
        """Test that lambda < 0 is rejected"""
        with pytest.raises(NonPositiveLambda):
            green_origin(line_model, -1.0)

    def test_not_converged(self, square_model):
        """Test that an unreachable tolerance raises with the last grid size"""
        settings = QuadratureSettings(quad_tol=1e-300, grid_start=8, grid_cap=16)
        with pytest.raises(QuadratureNotConverged) as excinfo:
            evaluate_green(square_model, 0.01, [[0, 0]], settings)
        assert excinfo.value.grid_size == 16
        assert excinfo.value.est_error > 0

    @pytest.mark.parametrize("lam", [1e-6, 1e-8, 5e-9])
    def test_line_small_lambda(self, line_model, lam):
        """Test the line walk far below the trapezoid range against the closed form"""
        evaluation = evaluate_green(line_model, lam, [[0], [1], [-3]])
        assert evaluation.method == "adaptive"
        origin = evaluation.value([0])
        assert origin == pytest.approx(line_green(lam, 1.0), rel=1e-10)
        for x in (1, -3):
            spread = line_green(lam, 1.0) - line_green(lam, 1.0, x)
            assert origin - evaluation.value([x]) == pytest.approx(spread, abs=1e-10)

    def test_adaptive_agrees_with_trapezoid(self, line_model):
        """Test that a small grid cap switches methods without changing values"""
        points = [[0], [2], [-5]]
        trapezoid = evaluate_green(line_model, 1e-3, points)
        adaptive = evaluate_green(line_model, 1e-3, points, QuadratureSettings(grid_cap=64))
        assert trapezoid.method == "trapezoid"
        assert adaptive.method == "adaptive"
        assert adaptive.grid_size == 0
        np.testing.assert_allclose(adaptive.values, trapezoid.values, rtol=0, atol=1e-9)

    def test_peak_width(self, line_model, drift_model):
        """Test the peak width sqrt(2 lambda / (q sigma^2))"""
        assert peak_width(line_model, 0.02) == pytest.approx(0.2)
        assert peak_width(drift_model, 0.02) == np.inf

    @pytest.mark.parametrize("model_name", ["line_model", "square_model", "drift_model"])
    def test_bounds_and_monotonicity(self, request, model_name):
        """Test 0 < G_lambda(0, x) <= 1 / lambda and the decrease in lambda"""
        model = request.getfixturevalue(model_name)
        points = [[0] * model.dimension, [1] + [0] * (model.dimension - 1)]
        previous = None
        for lam in (0.1, 0.5, 2.0):
            values = evaluate_green(model, lam, points).values
            assert np.all(values > 0)
            assert np.all(values <= 1.0 / lam)
            if previous is not None:
                assert np.all(values < previous)
            previous = values


@pytest.mark.unit
class TestGreenMatrix:
    """Test displacement bookkeeping and matrix assembly"""

    def test_displacements(self):
        """Test that displacements are distinct and include the origin"""
        result = displacements(np.array([[0], [2], [5]]))
        assert result[:, 0].tolist() == [-5, -3, -2, 0, 2, 3, 5]

    def test_matrix_entries(self, line_model):
        """Test that entry (i, j) is G(0, x_j - x_i)"""
        matrix = green_matrix(line_model, 1.0, [[0], [2], [5]])
        assert matrix.shape == (3, 3)
        np.testing.assert_allclose(matrix, matrix.T, atol=1e-12)
        assert matrix[0, 2] == pytest.approx(line_green(1.0, 1.0, 5), abs=1e-10)
        assert matrix[1, 2] == pytest.approx(line_green(1.0, 1.0, 3), abs=1e-10)

    def test_repeated_points_rejected(self, line_model):
        """Test that a repeated point is a model error, not a singular matrix"""
        with pytest.raises(ModelError, match="repeat"):
            green_matrix(line_model, 1.0, [[0], [2], [0]])


@pytest.mark.unit
class TestGreenLimit:
    """Test the lambda -> 0 limit"""

    def test_recurrent_line(self, line_model):
        """Test lim G(0, x) - G(0, 0) = -|x| / q on Z"""
        limit = green_limit(line_model, [[1], [2], [-3]])
        assert limit.kind == "recurrent"
        assert limit.value([1]) == pytest.approx(-1.0, abs=1e-7)
        assert limit.value([2]) == pytest.approx(-2.0, abs=1e-7)
        assert limit.value([-3]) == pytest.approx(-3.0, abs=1e-7)

    def test_recurrent_line_rate(self):
        """Test that the recurrent limit scales with 1 / q"""
        limit = green_limit(example_1(q=4.0), [[2]])
        assert limit.value([2]) == pytest.approx(-0.5, abs=1e-7)

    def test_drifting_walk(self):
        """Test that walks with drift use lambda = 0 directly"""
        limit = green_limit(example_1(q=1.0, p_right=0.7), [[0], [1]])
        assert limit.kind == "transient"
        assert limit.lambda_floor == 0.0
        assert limit.value([0]) == pytest.approx(2.5, abs=1e-9)

    @pytest.mark.slow
    def test_cubic_lattice(self, cubic_model):
        """Test G_0(0, 0) of the simple walk on Z^3 against the Watson integral"""
        limit = green_limit(cubic_model, [[0, 0, 0]])
        assert limit.kind == "transient"
        assert limit.value([0, 0, 0]) == pytest.approx(WATSON_INTEGRAL, abs=2e-5)
