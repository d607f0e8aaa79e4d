"""The exhaustive reference optimizers themselves."""

import numpy as np
import pytest

from selectkit import InstanceTooLarge
from selectkit.oracle import (
    exhaustive_fl_opt,
    exhaustive_kcenter_opt,
    exhaustive_mixture_opt,
    exhaustive_topk,
)

KERNEL_3x3 = [[1.0, 0.5, 0.1], [0.5, 1.0, 0.2], [0.1, 0.2, 1.0]]


class TestFacilityLocation:
    def test_identity_kernel_value_is_k(self):
        best, val = exhaustive_fl_opt(np.eye(6), 2)
        assert val == pytest.approx(2.0)
        assert best == (0, 1)  # lexicographically smallest tie

    def test_all_ones_kernel_any_singleton_covers_everyone(self):
        best, val = exhaustive_fl_opt(np.ones((5, 5)), 2)
        assert val == pytest.approx(5.0)
        assert best == (0, 1)

    def test_three_point_singleton(self):
        best, val = exhaustive_fl_opt(KERNEL_3x3, 1)
        assert best == (1,)
        assert val == pytest.approx(1.7)

    def test_enumeration_bounds(self):
        with pytest.raises(InstanceTooLarge):
            exhaustive_fl_opt(np.eye(15), 2)
        with pytest.raises(InstanceTooLarge):
            exhaustive_fl_opt(np.eye(10), 6)

    def test_mixture_reduces_to_fl_at_zero_uncertainty(self):
        u = np.zeros(3)
        assert exhaustive_mixture_opt(KERNEL_3x3, u, 2) == exhaustive_fl_opt(KERNEL_3x3, 2)

    def test_mixture_prefers_uncertain_item(self):
        # identical rows: FL indifferent, uncertainty decides
        W = np.ones((3, 3))
        best, _ = exhaustive_mixture_opt(W, [0.0, 1.0, 0.2], 1)
        assert best == (1,)


class TestKCenter:
    def test_two_points_two_centers(self):
        best, radius = exhaustive_kcenter_opt([0.0, 10.0], 2)
        assert radius == 0.0 and best == (0, 1)

    def test_three_collinear_one_center(self):
        best, radius = exhaustive_kcenter_opt([0.0, 1.0, 2.0], 1)
        assert best == (1,) and radius == pytest.approx(1.0)

    def test_radius_is_unsquared(self):
        _, radius = exhaustive_kcenter_opt(np.array([[0.0, 0.0], [3.0, 4.0]]), 1)
        assert radius == pytest.approx(5.0)

    def test_bounds(self):
        with pytest.raises(InstanceTooLarge):
            exhaustive_kcenter_opt(np.zeros((20, 2)), 2)


class TestTopK:
    def test_matches_sorting(self):
        scores = [-0.1, -0.5, -0.3, -0.05]
        best, val = exhaustive_topk(scores, 2)
        assert set(best) == {0, 3}
        assert val == pytest.approx(-0.1)

    def test_tie_returns_lexicographically_smallest(self):
        best, val = exhaustive_topk([0.5, 0.5, 0.5], 2)
        assert best == (0, 1) and val == 0.5

    def test_bounds(self):
        with pytest.raises(InstanceTooLarge):
            exhaustive_topk(np.zeros(21), 2)
