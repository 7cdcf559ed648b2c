"""
Unit tests for jump laws and the walk model
"""

import numpy as np
import pytest
from scipy import stats

from cbrw.errors import (
    BadProbabilities,
    ModelError,
    NonFullRankSupport,
    RangeError,
    ZeroJumpInSupport,
)
from cbrw.walk import (
    AxisComponent,
    AxisMixture,
    DisplacedPoisson,
    FiniteList,
    FiniteSupport,
    ProductMarginals,
    Rademacher,
    validate_model,
)
from cbrw.walk.catalogue import CATALOGUE, FRONT_LEVELS, example_1, nearest_neighbour


@pytest.mark.unit
class TestMarginals:
    """Test one-dimensional marginal laws"""

    def test_rademacher_transform(self):
        """Test that the Rademacher law has E e^{uX} = cosh u"""
        u = np.linspace(-2.0, 2.0, 9)
        marginal = Rademacher()
        np.testing.assert_allclose(marginal.mgf(u, 700.0), np.cosh(u), rtol=1e-14)
        np.testing.assert_allclose(marginal.mgf_m1(u, 700.0), np.cosh(u) - 1.0, atol=1e-14)

    def test_displaced_poisson_moments(self):
        """Test closed-form moments of the displaced Poisson law"""
        marginal = DisplacedPoisson(2.0, 1.0, 0.5, 0.5)
        assert marginal.mean == pytest.approx(0.5)
        assert marginal.second_moment == pytest.approx(0.5 * 11.0 + 0.5 * 5.0)
        assert marginal.zero_mass == 0.0
        assert not marginal.symmetric

    def test_displaced_poisson_derivative_at_origin(self):
        """Test that the transform derivative at zero equals the mean"""
        marginal = DisplacedPoisson(2.0, 1.0, 0.5, 0.5)
        assert float(marginal.mgf_prime(np.array(0.0), 700.0)) == pytest.approx(marginal.mean)

    def test_displaced_poisson_sample_mean(self):
        """Test that sampled jumps match the closed-form mean"""
        marginal = DisplacedPoisson(2.0, 1.0, 0.5, 0.5)
        rng = np.random.default_rng(7)
        draws = marginal.sample(rng, 200_000)
        assert np.all(draws != 0)
        assert draws.mean() == pytest.approx(marginal.mean, abs=0.03)

    def test_finite_list_symmetry(self):
        """Test symmetry detection of a finite marginal"""
        assert FiniteList([-2, 2], [0.5, 0.5]).symmetric
        assert not FiniteList([-1, 2], [0.5, 0.5]).symmetric


@pytest.mark.unit
class TestJumpModel:
    """Test JumpModel functionality"""

    @pytest.mark.parametrize("name", sorted(CATALOGUE))
    def test_log_mgf_vanishes_at_origin(self, name):
        """Test that H(0) = 0 for every catalogue model"""
        model = CATALOGUE[name]()
        assert model.log_mgf(np.zeros(model.dimension)) == pytest.approx(0.0, abs=1e-14)

    def test_square_lattice_log_mgf(self, square_model):
        """Test that the simple walk on Z^2 has H(s) = cosh s1 + cosh s2 - 2"""
        s = np.array([0.3, -1.1])
        expected = np.cosh(0.3) + np.cosh(-1.1) - 2.0
        assert square_model.log_mgf(s) == pytest.approx(expected, rel=1e-13)

    def test_log_mgf_batched(self, square_model):
        """Test that H accepts a batch of points"""
        points = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, -1.0]])
        values = square_model.log_mgf(points)
        assert values.shape == (3,)
        np.testing.assert_allclose(values, [0.0, np.cosh(1.0) - 1.0, np.cosh(1.0) - 1.0])

    def test_char_fn_of_symmetric_walk(self, line_model):
        """Test that phi(theta) = cos theta for the symmetric walk on Z"""
        theta = np.array([0.7])
        value = line_model.char_fn(theta)
        assert value.real == pytest.approx(np.cos(0.7))
        assert value.imag == pytest.approx(0.0, abs=1e-15)

    def test_gradient_matches_finite_differences(self, poisson_model):
        """Test grad H against central differences"""
        s = np.array([0.2, -0.4])
        step = 1e-6
        numeric = [
            (poisson_model.log_mgf(s + step * e) - poisson_model.log_mgf(s - step * e))
            / (2 * step)
            for e in np.eye(2)
        ]
        np.testing.assert_allclose(poisson_model.grad_log_mgf(s), numeric, rtol=1e-6)

    def test_drift_and_covariance(self, drift_model):
        """Test drift q E Y and second moments of the example 2b walk"""
        np.testing.assert_allclose(drift_model.drift(), [2.5, 0.0], atol=1e-14)
        np.testing.assert_allclose(
            drift_model.covariance(), [[2.0 + 1.0 / 6.0, 0.0], [0.0, 1.0 / 3.0]], atol=1e-14
        )
        assert drift_model.has_drift
        assert not drift_model.symmetric

    def test_drift_of_displaced_poisson_walk(self, poisson_model):
        """Test that the example 2c walk drifts to the right at rate 2"""
        np.testing.assert_allclose(poisson_model.drift(), [2.0, 0.0], atol=1e-12)

    def test_recurrence(self, line_model, square_model, cubic_model, drift_model):
        """Test recurrence classification"""
        assert line_model.recurrent
        assert square_model.recurrent
        assert not cubic_model.recurrent
        assert not drift_model.recurrent

    def test_min_log_mgf_of_zero_drift_walk(self, square_model):
        """Test that a symmetric walk has its minimum at the origin"""
        s_star, h_min = square_model.min_log_mgf()
        np.testing.assert_allclose(s_star, [0.0, 0.0], atol=1e-6)
        assert h_min == pytest.approx(0.0, abs=1e-10)

    def test_min_log_mgf_of_drifting_walk(self):
        """Test the minimum of H for a biased walk on Z"""
        model = example_1(q=2.0, p_right=0.7)
        s_star, h_min = model.min_log_mgf()
        assert s_star[0] == pytest.approx(0.5 * np.log(3.0 / 7.0), abs=1e-6)
        assert h_min == pytest.approx(2.0 * (2.0 * np.sqrt(0.21) - 1.0), abs=1e-10)

    def test_min_log_mgf_is_cached(self, drift_model):
        """Test that the minimiser is computed once"""
        first = drift_model.min_log_mgf()
        second = drift_model.min_log_mgf()
        assert first[1] == second[1]

    def test_range_error(self, line_model):
        """Test that exponents beyond the bound raise RangeError"""
        with pytest.raises(RangeError):
            line_model.log_mgf(np.array([800.0]))

    def test_sample_jumps(self, drift_model):
        """Test that sampled jumps are drawn from the support"""
        rng = np.random.default_rng(3)
        jumps = drift_model.sample_jumps(rng, 50_000)
        assert jumps.shape == (50_000, 2)
        support = {tuple(v) for v in drift_model.law.support_vectors()}
        assert {tuple(v) for v in jumps} <= support
        np.testing.assert_allclose(jumps.mean(axis=0), drift_model.law.mean(), atol=0.03)

    def test_sample_jump_frequencies(self, drift_model):
        """Test sampled jump frequencies against the law with a chi-square test"""
        rng = np.random.default_rng(17)
        jumps = drift_model.sample_jumps(rng, 60_000)
        support = drift_model.law.support_vectors()
        observed = [int(np.all(jumps == v, axis=1).sum()) for v in support]
        expected = 60_000 * drift_model.law.probs
        assert sum(observed) == 60_000
        assert stats.chisquare(observed, expected).pvalue > 1e-3

    @pytest.mark.parametrize("name", sorted(CATALOGUE))
    def test_log_mgf_is_convex(self, name):
        """Test H((s + t) / 2) <= (H(s) + H(t)) / 2 at random pairs"""
        model = CATALOGUE[name]()
        rng = np.random.default_rng(5)
        s = rng.uniform(-1.0, 1.0, size=(200, model.dimension))
        t = rng.uniform(-1.0, 1.0, size=(200, model.dimension))
        middle = model.log_mgf(0.5 * (s + t))
        chord = 0.5 * (model.log_mgf(s) + model.log_mgf(t))
        assert np.all(middle <= chord + 1e-12)

    @pytest.mark.parametrize("name", sorted(CATALOGUE))
    def test_char_fn_conjugate_symmetry(self, name):
        """Test phi(-theta) = conj(phi(theta)), asymmetric laws included"""
        model = CATALOGUE[name]()
        theta = np.random.default_rng(2).uniform(-np.pi, np.pi, size=(50, model.dimension))
        np.testing.assert_allclose(
            model.char_fn(-theta), np.conj(model.char_fn(theta)), rtol=0, atol=1e-14
        )

    def test_catalogue_front_levels(self):
        """Test that every front level refers to a catalogue model"""
        assert set(FRONT_LEVELS) <= set(CATALOGUE)
        assert all(level > 0 for level in FRONT_LEVELS.values())

    def test_nearest_neighbour_describe(self):
        """Test describe output of a nearest-neighbour walk"""
        summary = nearest_neighbour(3, 1.0).describe()
        assert summary["dimension"] == 3
        assert summary["q"] == 1.0


@pytest.mark.unit
class TestValidateModel:
    """Test model validation errors"""

    def test_bad_probabilities(self):
        """Test that probabilities not summing to one are rejected"""
        law = FiniteSupport([[1], [-1]], [0.5, 0.4])
        with pytest.raises(BadProbabilities) as excinfo:
            validate_model(1, 1.0, law)
        assert excinfo.value.diagnostics

    def test_zero_jump(self):
        """Test that a jump to the same site is rejected"""
        law = FiniteSupport([[1], [0], [-1]], [0.4, 0.2, 0.4])
        with pytest.raises(ZeroJumpInSupport):
            validate_model(1, 1.0, law)

    def test_degenerate_support(self):
        """Test that a support confined to a line in Z^2 is rejected"""
        law = AxisMixture(2, [AxisComponent(0, 1.0, Rademacher())])
        with pytest.raises(NonFullRankSupport):
            validate_model(2, 1.0, law)

    def test_nonpositive_rate(self):
        """Test that q <= 0 is rejected"""
        law = FiniteSupport([[1], [-1]], [0.5, 0.5])
        with pytest.raises(ModelError) as excinfo:
            validate_model(1, 0.0, law)
        assert any("q must be positive" in line for line in excinfo.value.diagnostics)

    def test_dimension_mismatch(self):
        """Test that the law dimension must match the model"""
        law = ProductMarginals([Rademacher(), Rademacher()])
        with pytest.raises(ModelError):
            validate_model(3, 1.0, law)

    def test_valid_product_model(self):
        """Test that a product law builds a model"""
        law = ProductMarginals([Rademacher(), DisplacedPoisson(0.5, 0.5, 0.5, 0.5)])
        model = validate_model(2, 1.5, law)
        assert model.q == 1.5
        assert model.symmetric
