import json

import numpy as np
import pytest

from pfev import geometry, harness
from pfev.direct import DirectConfig
from pfev.errors import ConfigError
from pfev.harness import ProblemSpec, ReferenceSpec, RunConfig, config_from_dict, config_to_dict
from pfev.moo import Nsga2Config, ParetoSet, non_dominated_filter


def small_cfg(**overrides):
    base = dict(
        problem=ProblemSpec(kind="synthetic", dim=2, n_objectives=2, length_scale=0.2, seed=3),
        strategy="pfev-map",
        iterations=2,
        k_samples=3,
        nsga2=Nsga2Config(population=12, generations=15),
        direct=DirectConfig(max_evaluations=60),
        n_features=64,
        reference=ReferenceSpec(generations=100, population=20),
        seed=0,
    )
    base.update(overrides)
    return RunConfig(**base)


@pytest.fixture(scope="module")
def small_reference():
    problem = ProblemSpec(
        kind="synthetic", dim=2, n_objectives=2, length_scale=0.2, seed=3
    ).build()
    from pfev.benchmarks import reference_frontier

    return reference_frontier(problem, 100, 20, seed=0)


class TestConfig:
    def test_unknown_strategy_rejected(self):
        with pytest.raises(ConfigError):
            small_cfg(strategy="gradient-descent")

    def test_round_trip_through_json(self):
        cfg = small_cfg(batch_size=2, observation_noise_sigma=0.1)
        payload = json.loads(json.dumps(config_to_dict(cfg)))
        assert config_from_dict(payload) == cfg

    def test_unknown_fields_rejected(self):
        with pytest.raises(ConfigError):
            config_from_dict({"strategyy": "random"})
        with pytest.raises(ConfigError):
            config_from_dict({"problem": {"kindd": "synthetic"}})

    def test_default_direct_budget_scales_with_dim(self):
        cfg = RunConfig()
        assert cfg.direct_config(2).max_evaluations == 600
        assert cfg.direct_config(4).max_evaluations == 1000

    def test_problem_spec_builds_each_kind(self):
        assert ProblemSpec(kind="named", name="viennet").build().n_objectives == 3
        combined = ProblemSpec(kind="combined", components=("fonseca", "viennet")).build()
        assert combined.n_objectives == 5
        with pytest.raises(ConfigError):
            ProblemSpec(kind="combined", components=("fonseca",)).build()
        with pytest.raises(ConfigError):
            ProblemSpec(kind="mystery").build()


class TestRhv:
    def test_reference_equals_itself(self):
        frontier = non_dominated_filter(np.array([[1.0, 0.0], [0.0, 1.0], [0.7, 0.7]]))
        assert harness.rhv(frontier.points, frontier) == pytest.approx(1.0, abs=1e-12)

    def test_fully_dominated_observations_clip_to_zero(self):
        reference = non_dominated_filter(np.array([[1.0, 0.0], [0.0, 1.0]]))
        observed = np.array([[-5.0, -5.0], [-6.0, -2.0]])
        assert harness.rhv(observed, reference) == 0.0

    def test_subset_ratio_oracle(self):
        from itertools import combinations

        def hv_oracle(points, ref):
            total = 0.0
            for k in range(1, len(points) + 1):
                for idx in combinations(range(len(points)), k):
                    corner = np.min(points[list(idx)], axis=0)
                    total += (-1) ** (k + 1) * np.prod(np.maximum(corner - ref, 0.0))
            return total

        rng = np.random.default_rng(1)
        for _ in range(10):
            reference = non_dominated_filter(rng.normal(size=(6, 3)))
            take = rng.random(len(reference)) < 0.6
            if not take.any():
                take[0] = True
            observed = reference.points[take]
            ref_point = reference.points.min(axis=0) - 1e-6
            expected = hv_oracle(observed, ref_point) / hv_oracle(
                reference.points, ref_point
            )
            got = harness.rhv(observed, reference)
            assert got == pytest.approx(expected, abs=1e-9)
            assert 0.0 < got <= 1.0

    def test_empty_reference_rejected(self):
        with pytest.raises(ValueError):
            harness.rhv(np.array([[0.0, 0.0]]), ParetoSet(np.empty((0, 2))))


class TestRunBo:
    def test_random_strategy_bookkeeping(self, small_reference):
        history = harness.run_bo(
            small_cfg(strategy="random", iterations=20), reference=small_reference
        )
        assert history.n_observations == 25
        assert len(history.records) == 20
        assert all(r.chosen_lambda == [None] for r in history.records)

    def test_observed_hypervolume_nondecreasing(self, small_reference):
        history = harness.run_bo(
            small_cfg(strategy="pfev-map", iterations=4), reference=small_reference
        )
        volumes = [history.initial_hypervolume] + [
            r.observed_hypervolume for r in history.records
        ]
        assert all(b >= a - 1e-12 for a, b in zip(volumes, volumes[1:]))

    def test_lambda_recorded_for_frontier_strategies(self, small_reference):
        history = harness.run_bo(small_cfg(iterations=2), reference=small_reference)
        for record in history.records:
            assert record.chosen_lambda[0] in harness.LambdaPolicy().grid
            assert np.isfinite(record.acquisition_value[0])

    def test_lambda_ablations_pin_the_weight(self, small_reference):
        one = harness.run_bo(
            small_cfg(strategy="pfev-lambda1", iterations=2), reference=small_reference
        )
        assert all(r.chosen_lambda == [1.0] for r in one.records)
        low = harness.run_bo(
            small_cfg(strategy="pfev-lambda-min", iterations=2),
            reference=small_reference,
        )
        assert all(r.chosen_lambda == [harness.LAMBDA_MIN] for r in low.records)

    def test_all_strategies_runnable(self, small_reference):
        for strategy in harness.STRATEGIES:
            history = harness.run_bo(
                small_cfg(strategy=strategy, iterations=1), reference=small_reference
            )
            assert len(history.records) == 1

    def test_deterministic_histories(self, small_reference):
        a = harness.run_bo(small_cfg(iterations=2), reference=small_reference)
        b = harness.run_bo(small_cfg(iterations=2), reference=small_reference)
        for ra, rb in zip(a.records, b.records):
            assert ra.chosen_x == rb.chosen_x
            assert ra.observed_y == rb.observed_y
            assert ra.rhv == rb.rhv

    def test_batch_mode_produces_distinct_picks(self, small_reference):
        history = harness.run_bo(
            small_cfg(batch_size=2, iterations=2), reference=small_reference
        )
        for record in history.records:
            assert len(record.chosen_x) == 2
            assert record.chosen_x[0] != record.chosen_x[1]
        assert history.n_observations == 5 + 4

    def test_observation_noise_applied(self, small_reference):
        noisy = harness.run_bo(
            small_cfg(strategy="random", iterations=1, observation_noise_sigma=0.3),
            reference=small_reference,
        )
        clean = harness.run_bo(
            small_cfg(strategy="random", iterations=1), reference=small_reference
        )
        problem = small_cfg().problem.build()
        x = np.asarray(noisy.records[0].chosen_x)
        true_val = problem.evaluate(x)
        assert not np.allclose(noisy.records[0].observed_y, true_val)
        x_clean = np.asarray(clean.records[0].chosen_x)
        np.testing.assert_allclose(
            clean.records[0].observed_y, problem.evaluate(x_clean), atol=1e-12
        )

    def test_noisy_acquisition_strategy_runs(self, small_reference):
        history = harness.run_bo(
            small_cfg(
                iterations=1,
                observation_noise_sigma=0.1,
                gp_noise_variance=0.01,
                noisy_acquisition=True,
                noise_draws=2,
            ),
            reference=small_reference,
        )
        assert np.isfinite(history.records[0].acquisition_value[0])

    def test_phase_timings_cover_iteration(self, small_reference):
        history = harness.run_bo(small_cfg(iterations=3), reference=small_reference)
        for record in history.records:
            phases = {k: v for k, v in record.timings.items() if k != "total"}
            assert sum(phases.values()) <= record.timings["total"]
            assert sum(phases.values()) >= 0.9 * record.timings["total"]


class TestGapStudy:
    def test_row_structure_and_convergence(self):
        rows = harness.gap_study(2, sample_sizes=(10, 200), seeds=range(3))
        assert len(rows) == 6
        small = np.mean([r["over_ratio"] for r in rows if r["frontier_size"] == 10])
        large = np.mean([r["over_ratio"] for r in rows if r["frontier_size"] == 200])
        assert abs(large - 1.0) < abs(small - 1.0)
        for row in rows:
            assert row["true_volume"] == 0.5
            assert row["over_ratio"] <= 1.0 + 1e-9
            assert row["under_ratio"] >= 1.0 - 1e-9

    def test_bracketing_property_l3(self):
        rows = harness.gap_study(3, sample_sizes=(50,), seeds=range(2))
        for row in rows:
            assert row["true_volume"] == pytest.approx(1.0 / 6.0)
            assert row["over_volume"] <= row["true_volume"] + 1e-9
            assert row["under_volume"] >= row["true_volume"] - 1e-9

    def test_validation(self):
        with pytest.raises(ValueError):
            harness.gap_study(1)


class TestEstimatorStudy:
    def test_smoke_structure(self):
        rows = harness.estimator_study(
            n_seeds=2, k_values=(10, 50), gt_samples=300, frontier_grid=128
        )
        labels = {(r["estimator"], r["k"]) for r in rows}
        assert labels == {
            ("naive-mc", 10),
            ("naive-mc", 50),
            ("map-r1", 10),
            ("map-r1", 50),
            ("map-rk", 10),
            ("map-rk", 50),
        }
        for row in rows:
            assert row["mse_mean"] >= 0.0

    def test_decayed_r_equals_fixed_r_at_k10(self):
        rows = harness.estimator_study(
            n_seeds=2, k_values=(10,), gt_samples=200, frontier_grid=128
        )
        by = {(r["estimator"], r["k"]): r["mse_mean"] for r in rows}
        assert by[("map-rk", 10)] == by[("map-r1", 10)]
