import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pfev import geometry, moo
from pfev.domain import Box, unit_box


def brute_force_filter(points):
    """O(n^2) oracle for the non-dominated subset (duplicates collapsed)."""
    points = np.unique(np.asarray(points, dtype=float), axis=0)
    keep = []
    for i, p in enumerate(points):
        dominated = False
        for j, q in enumerate(points):
            if i != j and np.all(q >= p) and np.any(q > p):
                dominated = True
                break
        if not dominated:
            keep.append(p)
    return np.array(sorted(map(tuple, keep)))


class TestNonDominatedFilter:
    def test_simple_case(self):
        result = moo.non_dominated_filter([(1, 2), (2, 1), (0, 0)])
        assert sorted(map(tuple, result.points)) == [(1.0, 2.0), (2.0, 1.0)]

    def test_duplicates_collapse(self):
        result = moo.non_dominated_filter([(1, 1), (1, 1)])
        assert result.points.shape == (1, 2)

    def test_empty_input(self):
        assert len(moo.non_dominated_filter(np.empty((0, 3)))) == 0

    @pytest.mark.parametrize("n_obj", [2, 3])
    def test_matches_brute_force(self, n_obj):
        rng = np.random.default_rng(n_obj)
        points = rng.normal(size=(200, n_obj))
        result = moo.non_dominated_filter(points)
        got = np.array(sorted(map(tuple, result.points)))
        np.testing.assert_array_equal(got, brute_force_filter(points))

    def test_idempotent(self):
        rng = np.random.default_rng(5)
        points = rng.normal(size=(80, 3))
        once = moo.non_dominated_filter(points)
        twice = moo.non_dominated_filter(once.points)
        np.testing.assert_array_equal(
            np.sort(once.points, axis=0), np.sort(twice.points, axis=0)
        )

    def test_inputs_stay_aligned(self):
        points = np.array([[1.0, 2.0], [2.0, 1.0], [0.0, 0.0]])
        inputs = np.array([[0.1], [0.2], [0.3]])
        result = moo.non_dominated_filter(points, inputs)
        for point, inp in zip(result.points, result.inputs):
            idx = np.flatnonzero((points == point).all(axis=1))[0]
            assert inputs[idx, 0] == inp[0]


class TestParetoSetInvariants:
    def test_rejects_dominated_members(self):
        with pytest.raises(ValueError):
            moo.ParetoSet(np.array([[1.0, 1.0], [0.0, 0.0]]))

    def test_rejects_duplicates(self):
        with pytest.raises(ValueError):
            moo.ParetoSet(np.array([[1.0, 0.0], [1.0, 0.0]]))

    def test_rejects_misaligned_inputs(self):
        with pytest.raises(ValueError):
            moo.ParetoSet(np.array([[1.0, 0.0]]), inputs=np.zeros((2, 1)))


coordinate = st.integers(min_value=-3, max_value=3)
vector3 = st.tuples(coordinate, coordinate, coordinate).map(
    lambda t: np.array(t, dtype=float)
)


class TestDominanceOrder:
    @given(vector3)
    def test_irreflexive(self, a):
        assert not geometry.dominates(a, a)

    @settings(max_examples=200)
    @given(vector3, vector3, vector3)
    def test_transitive(self, a, b, c):
        if geometry.dominates(a, b) and geometry.dominates(b, c):
            assert geometry.dominates(a, c)

    @given(vector3, vector3)
    def test_antisymmetric(self, a, b):
        assert not (geometry.dominates(a, b) and geometry.dominates(b, a))


class TestNsga2:
    def test_config_validation(self):
        with pytest.raises(ValueError):
            moo.Nsga2Config(population=5)
        with pytest.raises(ValueError):
            moo.Nsga2Config(generations=0)

    def test_bi_sphere_pareto_set(self):
        # maximizing (-x^2, -(x-1)^2) on [0, 1]: every x is Pareto-optimal
        # and the optima of both objectives must be approached
        def objective(x):
            return np.column_stack([-x[:, 0] ** 2, -((x[:, 0] - 1.0) ** 2)])

        cfg = moo.Nsga2Config(population=50, generations=200, rng_seed=0)
        result = moo.nsga2_solve(objective, unit_box(1), cfg)
        assert np.all(result.inputs >= -0.02) and np.all(result.inputs <= 1.02)
        assert result.points[:, 0].max() >= -1e-3
        assert result.points[:, 1].max() >= -1e-3

    def test_constant_objective_collapses(self):
        def objective(x):
            return np.ones((x.shape[0], 2))

        cfg = moo.Nsga2Config(population=16, generations=5, rng_seed=1)
        result = moo.nsga2_solve(objective, unit_box(2), cfg)
        assert len(result) == 1

    def test_deterministic_given_seed(self):
        def objective(x):
            return np.column_stack([np.sin(3 * x[:, 0]), np.cos(2 * x[:, 1])])

        cfg = moo.Nsga2Config(population=20, generations=30, rng_seed=7)
        a = moo.nsga2_solve(objective, unit_box(2), cfg)
        b = moo.nsga2_solve(objective, unit_box(2), cfg)
        np.testing.assert_array_equal(a.points, b.points)
        np.testing.assert_array_equal(a.inputs, b.inputs)

    def test_output_satisfies_pareto_invariants(self):
        def objective(x):
            return np.column_stack(
                [np.sin(5 * x[:, 0]) + x[:, 1], np.cos(4 * x[:, 1]) - x[:, 0]]
            )

        cfg = moo.Nsga2Config(population=24, generations=40, rng_seed=3)
        result = moo.nsga2_solve(objective, unit_box(2), cfg)
        # construction re-validates mutual non-domination and uniqueness
        assert 1 <= len(result) <= 24

    def test_hypervolume_progress(self):
        problem_box = Box(np.array([-1.0, -1.0]), np.array([1.0, 1.0]))

        def objective(x):
            return np.column_stack(
                [
                    -np.sum((x - 0.4) ** 2, axis=1),
                    -np.sum((x + 0.4) ** 2, axis=1),
                ]
            )

        wins = 0
        reference = np.array([-4.0, -4.0])
        for seed in range(10):
            short = moo.nsga2_solve(
                objective, problem_box, moo.Nsga2Config(50, 10, rng_seed=seed)
            )
            long = moo.nsga2_solve(
                objective, problem_box, moo.Nsga2Config(50, 200, rng_seed=seed)
            )
            hv_short = geometry.hypervolume(short, reference)
            hv_long = geometry.hypervolume(long, reference)
            if hv_long >= hv_short:
                wins += 1
        assert wins >= 9
