"""LP feasibility and piecewise-linear maximization kernels."""

import numpy as np
import pytest

from cptmech import numerics
from cptmech.probs import DomainError
from cptmech.scenarios import (hedge_value_split, market_weighting,
                               unfavorable_mix_value)


class TestLpFeasible:
    def test_feasible_with_witness(self):
        res = numerics.lp_feasible([[1.0, 1.0], [1.0, -1.0]], [1.0, 0.2])
        assert res.status == "feasible"
        assert res.residual < 1e-9
        assert np.allclose(np.array([[1.0, 1.0], [1.0, -1.0]]) @ res.x,
                           [1.0, 0.2], atol=1e-8)

    def test_infeasible(self):
        res = numerics.lp_feasible([[1.0], [1.0]], [1.0, 2.0])
        assert res.status == "infeasible"
        assert res.residual > 1e-7
        assert res.x is None

    def test_nonnegativity_binds(self):
        # only solution of x1 + x2 = -1 needs a negative variable
        res = numerics.lp_feasible([[1.0, 1.0]], [-1.0])
        assert res.status == "infeasible"

    def test_indeterminate_band(self):
        res = numerics.lp_feasible([[1.0], [1.0]], [0.0, 5e-8])
        assert res.status == "indeterminate"

    def test_dimension_mismatch(self):
        with pytest.raises(DomainError):
            numerics.lp_feasible([[1.0, 2.0]], [1.0, 2.0])


class TestKinkCrossings:
    def test_market_kinks(self):
        kinks = market_weighting()[0].kinks
        pts = numerics.affine_kink_crossings([(0.25, 18 / 32), (-0.25, 14 / 32)],
                                             kinks, (0, 1))
        # 0.25x + 18/32 hits 25/32 at x = 7/8; 14/32 - 0.25x never hits a kink inside
        assert pts == pytest.approx([7 / 8])

    def test_constant_affine_skipped(self):
        assert numerics.affine_kink_crossings([(0.0, 0.3)], (0.3,), (0, 1)) == []

    def test_out_of_interval_dropped(self):
        assert numerics.affine_kink_crossings([(1.0, 0.0)], (0.5,), (0.6, 1.0)) == []


class TestMaximizePiecewise:
    def test_matches_dense_scan(self):
        kinks = market_weighting()[0].kinks
        bps = numerics.affine_kink_crossings([(0.25, 18 / 32), (-0.25, 14 / 32)],
                                             kinks, (0, 1))
        arg, best = numerics.maximize_piecewise_1d(hedge_value_split, bps, (0, 1))
        grid_best = max(hedge_value_split(k / 10000) for k in range(10001))
        assert best >= grid_best - 1e-9
        assert any(abs(hedge_value_split(x) - best) <= 1e-12 for x in arg)

    def test_worst_type_mix(self):
        loss_kinks = market_weighting()[1].kinks
        bps = numerics.affine_kink_crossings([(0.5, 0.0), (-0.5, 1.0)],
                                             loss_kinks, (0, 1))
        arg, best = numerics.maximize_piecewise_1d(unfavorable_mix_value, bps, (0, 1))
        assert arg == [0.5]
        assert best == pytest.approx(-66.25, abs=5e-3)

    def test_symmetric_objective_keeps_all_argmaxes(self):
        arg, best = numerics.maximize_piecewise_1d(lambda x: -abs(x - 0.5) * 0.0 + 1.0,
                                                   [0.25], (0, 1))
        assert best == 1.0
        assert arg == [0.0, 0.25, 1.0]

    def test_empty_interval(self):
        with pytest.raises(DomainError):
            numerics.maximize_piecewise_1d(lambda x: x, [], (1.0, 1.0))


class TestGridRefine:
    def test_linear_objective_finds_vertex(self):
        coefs = [0.3, 1.7, -0.4]
        pt, val = numerics.grid_refine_max(
            lambda x: sum(c * xi for c, xi in zip(coefs, x)), 3)
        assert val == pytest.approx(1.7, abs=1e-6)
        assert pt[1] == pytest.approx(1.0, abs=1e-6)

    def test_dimension_one(self):
        pt, val = numerics.grid_refine_max(lambda x: 5.0 * x[0], 1)
        assert pt == (1.0,)
        assert val == 5.0

    def test_constant_objective(self):
        _, val = numerics.grid_refine_max(lambda x: 2.5, 2, resolution=4, rounds=2)
        assert val == 2.5

    def test_rejects_bad_dimension(self):
        with pytest.raises(DomainError):
            numerics.grid_refine_max(lambda x: 0.0, 0)
