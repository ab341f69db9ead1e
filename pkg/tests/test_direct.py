import numpy as np
import pytest

from pfev.direct import DirectConfig, direct_maximize
from pfev.domain import Box, unit_box


class TestDirectMaximize:
    def test_quadratic_optimum(self):
        def f(x):
            return -((x[:, 0] - 0.5) ** 2)

        x_best, value = direct_maximize(f, unit_box(1), DirectConfig(max_evaluations=500))
        assert abs(x_best[0] - 0.5) <= 1e-2
        assert value == pytest.approx(f(x_best[None, :])[0])

    def test_constant_function(self):
        def f(x):
            return np.full(x.shape[0], 3.25)

        x_best, value = direct_maximize(f, unit_box(2), DirectConfig(max_evaluations=100))
        assert value == 3.25
        np.testing.assert_allclose(x_best, [0.5, 0.5])  # first center

    def test_offset_optimum_in_rectangular_domain(self):
        domain = Box(np.array([-2.0, 1.0]), np.array([4.0, 5.0]))
        target = np.array([3.1, 1.7])

        def f(x):
            return -np.sum((x - target) ** 2, axis=1)

        x_best, _ = direct_maximize(f, domain, DirectConfig(max_evaluations=2000))
        assert np.linalg.norm(x_best - target) <= 0.05

    def test_bowl_matches_grid_oracle(self):
        # smooth multi-modal-ish bowl; optimum checked against a dense grid
        def f(x):
            a = x[:, 0] * 6 - 3
            b = x[:, 1] * 6 - 3
            return -(a**2 + b**2) + 2.0 * np.cos(a) * np.cos(b)

        x_best, value = direct_maximize(f, unit_box(2), DirectConfig(max_evaluations=2000))
        grid = np.linspace(0, 1, 200)
        gx, gy = np.meshgrid(grid, grid)
        dense = f(np.column_stack([gx.ravel(), gy.ravel()])).max()
        assert value >= dense - 1e-2

    def test_value_nondecreasing_in_budget(self):
        def f(x):
            return np.sin(13 * x[:, 0]) * np.sin(27 * x[:, 0])

        values = [
            direct_maximize(f, unit_box(1), DirectConfig(max_evaluations=budget))[1]
            for budget in (10, 50, 200, 1000)
        ]
        assert all(b >= a - 1e-15 for a, b in zip(values, values[1:]))

    def test_respects_evaluation_budget_and_unique_centers(self):
        seen = []

        def f(x):
            seen.extend(map(tuple, np.atleast_2d(x)))
            return np.sum(x, axis=1)

        budget = 123
        direct_maximize(f, unit_box(3), DirectConfig(max_evaluations=budget))
        assert len(seen) <= budget
        assert len(set(seen)) == len(seen)  # centers never repeat

    def test_deterministic(self):
        def f(x):
            return np.cos(9 * x[:, 0]) + np.sin(7 * x[:, 1])

        a = direct_maximize(f, unit_box(2), DirectConfig(max_evaluations=400))
        b = direct_maximize(f, unit_box(2), DirectConfig(max_evaluations=400))
        np.testing.assert_array_equal(a[0], b[0])
        assert a[1] == b[1]

    def test_invalid_config(self):
        with pytest.raises(ValueError):
            DirectConfig(max_evaluations=0)
        with pytest.raises(ValueError):
            DirectConfig(epsilon=-1.0)
