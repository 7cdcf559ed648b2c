"""
Unit tests for the simulator and its estimators
"""

from dataclasses import replace

import numpy as np
import pytest
from scipy import stats

from cbrw.errors import (
    AllExtinct,
    EmptySnapshot,
    EventCapExceeded,
    InsufficientReplicates,
    PopulationCapExceeded,
    SimulationError,
)
from cbrw.front import FrontModel
from cbrw.malthus import Catalyst, CatalyticSystem, Deterministic
from cbrw.simulate import (
    HalfSpace,
    ParticleSnapshot,
    SimulationCaps,
    SimulationTrace,
    conditioned_snapshots,
    conditioned_spread,
    empirical_mgf_check,
    growth_rate_fit,
    local_time_walk,
    many_to_one_estimate,
    run_cbrw,
    run_replicates,
    spread_statistics,
)
from cbrw.simulate.engine import COMPLETE, EVENT_CAP
from cbrw.simulate.estimators import mean_population, z_score


def single_catalyst(model, k):
    return CatalyticSystem(model, (Catalyst((0,), 0.5, Deterministic(k)),), (0,))


def fake_trace(replicate, population, checkpoints):
    return SimulationTrace(
        seed=0,
        replicate=replicate,
        horizon=float(checkpoints[-1]),
        checkpoints=np.asarray(checkpoints, dtype=float),
        population=np.asarray(population, dtype=np.int64),
        local_times=np.zeros(1),
        survived=True,
        visited=True,
        status=COMPLETE,
        final_time=float(checkpoints[-1]),
        events=0,
        branch_events=0,
    )


def capped_trace(replicate, population, checkpoints, final_time):
    return replace(
        fake_trace(replicate, population, checkpoints),
        status=EVENT_CAP,
        final_time=final_time,
        survived=False,
    )


@pytest.mark.unit
class TestRunCBRW:
    """Test run_cbrw functionality"""

    def test_deterministic_replay(self, line_system):
        """Test that a (seed, replicate) pair replays exactly"""
        first = run_cbrw(line_system, 4.0, [1, 2, 3, 4], seed=5, replicate=2, snapshot_times=[4])
        second = run_cbrw(line_system, 4.0, [1, 2, 3, 4], seed=5, replicate=2, snapshot_times=[4])
        np.testing.assert_array_equal(first.population, second.population)
        np.testing.assert_array_equal(first.snapshots[0].positions, second.snapshots[0].positions)
        assert first.events == second.events
        assert first.summary() == second.summary()

    def test_replicates_are_independent(self, line_system):
        """Test that replicates draw from different streams"""
        traces = run_replicates(line_system, 3.0, [3.0], runs=8, seed=1)
        assert [trace.replicate for trace in traces] == list(range(8))
        assert len({trace.events for trace in traces}) > 1

    def test_single_offspring_keeps_one_particle(self, line_model):
        """Test population accounting when branching replaces a particle by one"""
        trace = run_cbrw(single_catalyst(line_model, 1), 5.0, [1, 2, 3, 4, 5], seed=3)
        assert trace.population.tolist() == [1, 1, 1, 1, 1]
        assert trace.survived
        assert 0.0 <= trace.local_times[0] <= 5.0

    def test_killing_is_monotone(self, line_model):
        """Test that zero offspring can only remove the particle"""
        trace = run_cbrw(single_catalyst(line_model, 0), 5.0, np.arange(0.5, 5.5, 0.5), seed=4)
        assert set(trace.population.tolist()) <= {0, 1}
        assert np.all(np.diff(trace.population) <= 0)

    def test_two_offspring_never_shrinks(self, line_system):
        """Test that binary splitting only grows the population"""
        trace = run_cbrw(line_system, 4.0, [1, 2, 3, 4], seed=9)
        assert trace.population[0] >= 1
        assert np.all(np.diff(trace.population) >= 0)
        assert trace.population[-1] == 1 + trace.branch_events

    def test_snapshots_match_checkpoints(self, line_system):
        """Test that snapshots and checkpoints count the same particles"""
        trace = run_cbrw(line_system, 3.0, [1.5, 3.0], seed=6, snapshot_times=[1.5, 3.0])
        assert [s.population for s in trace.snapshots] == trace.population.tolist()
        assert [s.time for s in trace.snapshots] == [1.5, 3.0]

    def test_event_cap(self, line_system):
        """Test that the event cap stops the run with a partial trace"""
        trace = run_cbrw(line_system, 200.0, [200.0], caps=SimulationCaps(max_events=50), seed=2)
        assert trace.status == EVENT_CAP
        assert trace.capped
        assert not trace.survived
        assert trace.events == 50

    @pytest.mark.parametrize("position,rate", [((50,), 1.0), ((0,), 2.0)])
    def test_holding_times_are_exponential(self, line_model, position, rate):
        """Test the first clock against Exp(q) off the catalysts and Exp(beta) on one"""
        system = CatalyticSystem(line_model, (Catalyst(position, 0.5, Deterministic(1)),), (0,))
        caps = SimulationCaps(max_events=1)
        times = [
            run_cbrw(system, 1000.0, [0.0], caps=caps, seed=12, replicate=i).final_time
            for i in range(2000)
        ]
        assert stats.kstest(times, "expon", args=(0.0, 1.0 / rate)).pvalue > 1e-3

    def test_strict_cap_raises(self, line_system):
        """Test that strict runs raise on a cap"""
        with pytest.raises(EventCapExceeded):
            run_cbrw(
                line_system, 200.0, [200.0], caps=SimulationCaps(max_events=50), seed=2, strict=True
            )

    @pytest.mark.parametrize("horizon,checkpoints", [(0.0, [0.0]), (2.0, [3.0]), (2.0, [-1.0])])
    def test_bad_arguments(self, line_system, horizon, checkpoints):
        """Test horizon and checkpoint validation"""
        with pytest.raises(ValueError):
            run_cbrw(line_system, horizon, checkpoints)


@pytest.mark.unit
class TestEstimators:
    """Test Monte Carlo estimators"""

    def test_z_score(self):
        """Test the standardized difference and its degenerate cases"""
        assert z_score(1.0, 0.3, 1.0, 0.4) == 0.0
        assert z_score(2.0, 0.3, 1.0, 0.4) == pytest.approx(2.0)
        assert z_score(1.0, 0.0, 1.0, 0.0) == 0.0
        assert z_score(2.0, 0.0, 1.0, 0.0) == np.inf

    def test_half_space(self):
        """Test the half-space indicator"""
        g = HalfSpace([1.0, 0.0], 2.0)
        values = g(np.array([[3, 0], [1, 5], [2, -1]]))
        assert values.tolist() == [1.0, 0.0, 1.0]
        assert g.describe()["kind"] == "half_space"

    def test_neutral_weight(self, line_model):
        """Test that mean offspring one gives weight one"""
        walk = local_time_walk(single_catalyst(line_model, 1), 3.0, seed=1)
        assert walk.weight == 1.0
        assert walk.local_times[0] <= 3.0

    def test_weight_from_local_time(self, line_system):
        """Test weight = exp(alpha beta (m - 1) L)"""
        walk = local_time_walk(line_system, 3.0, seed=8)
        assert walk.weight == pytest.approx(np.exp(walk.local_times[0]))

    def test_empirical_mgf(self, line_model):
        """Test that E exp(s S(t)) agrees with exp(t H(s))"""
        check = empirical_mgf_check(line_model, 1.0, [0.3], runs=20_000, seed=1)
        assert check.predicted == pytest.approx(np.exp(np.cosh(0.3) - 1.0))
        assert abs(check.z) < 4.0

    def test_empirical_mgf_refuses_huge_prediction(self, line_model):
        """Test that exponentially large predictions are refused"""
        with pytest.raises(ValueError):
            empirical_mgf_check(line_model, 10.0, [5.0], runs=100)

    def test_many_to_one_needs_replicates(self, line_system):
        """Test the minimum replicate count"""
        with pytest.raises(InsufficientReplicates):
            many_to_one_estimate(line_system, 1.0, runs=10)

    def test_many_to_one(self, line_system):
        """Test that both sides of the many-to-one formula agree"""
        estimate = many_to_one_estimate(line_system, 1.0, runs=400, seed=3)
        assert estimate.lhs_mean >= 1.0
        assert abs(estimate.z) < 4.0
        assert estimate.to_json()["runs"] == 400

    def test_many_to_one_half_space(self, line_system):
        """Test the many-to-one formula for the indicator of x >= 1"""
        g = HalfSpace([1.0], 1.0)
        estimate = many_to_one_estimate(line_system, 1.0, g=g, runs=400, seed=4)
        assert 0.0 < estimate.lhs_mean
        assert abs(estimate.z) < 4.0

    def test_growth_rate_fit(self):
        """Test the log-linear slope of the mean population"""
        checkpoints = [1.0, 2.0, 3.0, 4.0, 5.0]
        population = [round(1000.0 * np.exp(0.5 * t)) for t in checkpoints]
        traces = [fake_trace(i, population, checkpoints) for i in range(100)]
        assert growth_rate_fit(traces, (1.0, 5.0)) == pytest.approx(0.5, abs=1e-3)

    def test_growth_rate_needs_replicates(self):
        """Test that the fit refuses small samples"""
        traces = [fake_trace(i, [1, 2], [1.0, 2.0]) for i in range(10)]
        with pytest.raises(InsufficientReplicates):
            growth_rate_fit(traces, (1.0, 2.0))

    def test_growth_rate_extinct(self):
        """Test that an extinct mean population is reported"""
        traces = [fake_trace(i, [1, 0, 0], [1.0, 2.0, 3.0]) for i in range(100)]
        with pytest.raises(AllExtinct):
            growth_rate_fit(traces, (1.0, 3.0))

    def test_capped_traces_censor_the_window(self):
        """Test that capped traces stay in the mean up to their stopping time"""
        checkpoints = [1.0, 2.0, 3.0, 4.0, 5.0]
        slow = [round(1000.0 * np.exp(0.5 * t)) for t in checkpoints]
        fast = [2 * n for n in slow[:3]] + [0, 0]
        traces = [fake_trace(i, slow, checkpoints) for i in range(90)]
        traces += [capped_trace(90 + i, fast, checkpoints, 3.5) for i in range(10)]
        times, means = mean_population(traces)
        assert times.tolist() == [1.0, 2.0, 3.0]
        np.testing.assert_allclose(means, 1.1 * np.array(slow[:3]), rtol=1e-12)
        assert growth_rate_fit(traces, (1.0, 5.0)) == pytest.approx(0.5, abs=1e-3)

    def test_capped_traces_strict(self):
        """Test that strict fits refuse capped traces"""
        checkpoints = [1.0, 2.0, 3.0]
        traces = [fake_trace(i, [10, 20, 40], checkpoints) for i in range(99)]
        traces.append(capped_trace(99, [10, 0, 0], checkpoints, 1.5))
        with pytest.raises(PopulationCapExceeded):
            growth_rate_fit(traces, (1.0, 3.0), strict=True)

    def test_cap_before_window(self):
        """Test that a cap ahead of the window leaves nothing to fit"""
        checkpoints = [1.0, 2.0, 3.0, 4.0]
        traces = [fake_trace(i, [10, 20, 40, 80], checkpoints) for i in range(99)]
        traces.append(capped_trace(99, [10, 0, 0, 0], checkpoints, 2.5))
        with pytest.raises(SimulationError):
            growth_rate_fit(traces, (3.0, 4.0))


@pytest.mark.unit
class TestSpreadStatistics:
    """Test spread_statistics functionality"""

    @pytest.fixture
    def line_front(self, line_model):
        return FrontModel(line_model, 0.5)

    def test_origin_is_inside(self, line_front):
        """Test a particle at the origin"""
        snapshot = ParticleSnapshot(1.0, np.array([[0]]))
        report = spread_statistics([snapshot], line_front, [0.5])
        assert report.outside_fraction == {"0.5": 0.0}
        assert report.near_front_rate == {"0.5": 0.0}
        assert report.sector_coverage is None
        assert report.max_margin == [pytest.approx(-0.5)]

    def test_far_particle_is_outside(self, line_front):
        """Test that a particle beyond the front counts as outside"""
        snapshot = ParticleSnapshot(1.0, np.array([[0], [10]]))
        report = spread_statistics([snapshot], line_front, [0.15, 0.5])
        assert report.outside_fraction["0.15"] == 0.5
        assert report.near_front_rate["0.15"] == 1.0
        assert report.to_json()["snapshots"] == 1

    def test_empty_snapshot(self, line_front):
        """Test that empty snapshots are refused"""
        snapshot = ParticleSnapshot(1.0, np.zeros((0, 1), dtype=np.int64))
        with pytest.raises(EmptySnapshot):
            spread_statistics([snapshot], line_front, [0.5])

    def test_square_lattice_coverage(self, square_model):
        """Test sector coverage in d = 2"""
        front = FrontModel(square_model, 2.0)
        positions = np.array([[10, 0], [0, 10], [-10, 0], [0, -10]])
        report = spread_statistics([ParticleSnapshot(10.0, positions)], front, [0.5], resolution=90)
        assert report.sector_coverage == {"0.5": pytest.approx(4.0 / 36.0)}

    def test_conditioning(self, line_front):
        """Test containment over survivors and attainment over late visitors only"""
        far = [ParticleSnapshot(1.0, np.array([[10]]))]
        home = [ParticleSnapshot(1.0, np.array([[0]]))]
        traces = [
            replace(fake_trace(0, [1], [1.0]), snapshots=far),
            replace(fake_trace(1, [1], [1.0]), snapshots=home, visited=False),
            replace(fake_trace(2, [0], [1.0]), snapshots=far, survived=False),
            replace(capped_trace(3, [1], [1.0], 0.5), snapshots=far),
        ]
        surviving, visited = conditioned_snapshots(traces)
        assert len(surviving) == 2
        assert len(visited) == 1
        report = conditioned_spread(traces, line_front, [0.5])
        assert report.outside_fraction == {"0.5": 0.5}
        assert report.near_front_rate == {"0.5": 1.0}
        assert report.to_json()["surviving"] == 2
        assert report.to_json()["visited"] == 1

    def test_separate_attainment_fracs(self, line_front):
        """Test that attainment keys follow their own epsilon fractions"""
        snapshots = [ParticleSnapshot(1.0, np.array([[0]]))]
        traces = [replace(fake_trace(0, [1], [1.0]), snapshots=snapshots)]
        report = conditioned_spread(traces, line_front, [0.15], [0.5])
        assert set(report.outside_fraction) == {"0.15"}
        assert set(report.near_front_rate) == {"0.5"}

    def test_conditioning_without_survivors(self, line_front):
        """Test that a sample without survivors is reported as extinct"""
        traces = [replace(fake_trace(0, [0], [1.0]), survived=False)]
        with pytest.raises(AllExtinct):
            conditioned_spread(traces, line_front, [0.5])
