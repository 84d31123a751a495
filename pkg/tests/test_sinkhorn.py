"""Sinkhorn operator, its two gradient modes, and plan entropy."""

import dataclasses

import numpy as np
import pytest

from helpers import numeric_gradient, relative_error
from lib.config.base import DimensionError, InvalidInputError, NonConvergenceError
from lib.config.enums import GradMode
from lib.config.sinkhorn import SinkhornConfig
from lib.sinkhorn.operator import entropy, marginal_residual, sinkhorn, sinkhorn_vjp


class TestForward:
    def test_zeros_give_uniform_plan(self):
        np.testing.assert_allclose(sinkhorn(np.zeros((2, 2)), SinkhornConfig()), np.full((2, 2), 0.5))

    def test_single_entry(self):
        np.testing.assert_allclose(sinkhorn(np.array([[-7.0]]), SinkhornConfig(iters=1)), [[1.0]])

    def test_symmetric_closed_form(self):
        # Equal row sums: exp(X) is already balanced up to scale
        p = np.exp(2.0) / (1.0 + np.exp(2.0))
        np.testing.assert_allclose(
            sinkhorn(np.array([[2.0, 0.0], [0.0, 2.0]]), SinkhornConfig(iters=200)),
            [[p, 1.0 - p], [1.0 - p, p]],
            atol=1e-12,
        )

    def test_columns_sum_to_one(self, rng):
        for _ in range(100):
            x = rng.standard_normal((64, 64))
            plan = sinkhorn(x, SinkhornConfig())
            assert np.all(plan > 0.0)
            np.testing.assert_allclose(plan.sum(axis=0), 1.0, atol=1e-12)

    def test_row_residual_shrinks(self, rng):
        x = rng.standard_normal((8, 8))
        residuals = [marginal_residual(sinkhorn(x, SinkhornConfig(iters=t))) for t in (1, 2, 4, 8)]
        assert all(b < a for a, b in zip(residuals, residuals[1:]))
        assert marginal_residual(sinkhorn(x, SinkhornConfig(iters=200))) < 1e-9

    def test_wide_inputs_converge_with_iterations(self, rng):
        steps = (1, 5, 20, 50, 200)
        for _ in range(100):
            x = rng.uniform(-5.0, 5.0, size=(64, 64))
            plans = {t: sinkhorn(x, SinkhornConfig(tau=1.0, iters=t)) for t in steps}
            for plan in plans.values():
                np.testing.assert_allclose(plan.sum(axis=0), 1.0, atol=1e-12)
            rows = [np.abs(plans[t].sum(axis=1) - 1.0).max() for t in steps]
            assert rows[steps.index(20)] < 1e-2
            assert rows[steps.index(200)] < 1e-6
            assert all(b <= a + 1e-14 for a, b in zip(rows, rows[1:]))

    def test_shift_invariance(self, rng):
        x = rng.standard_normal((5, 5))
        cfg = SinkhornConfig()
        np.testing.assert_allclose(sinkhorn(x + 4.2, cfg), sinkhorn(x, cfg), atol=1e-12)
        rows = rng.standard_normal((5, 1))
        cols = rng.standard_normal((1, 5))
        converged = SinkhornConfig(iters=2000)
        np.testing.assert_allclose(sinkhorn(x + rows + cols, converged), sinkhorn(x, converged), atol=1e-9)

    def test_plain_and_log_domain_agree(self, rng):
        x = rng.standard_normal((6, 6))
        np.testing.assert_allclose(
            sinkhorn(x, SinkhornConfig(log_domain=False)),
            sinkhorn(x, SinkhornConfig(log_domain=True)),
            rtol=1e-10,
        )

    def test_log_domain_survives_small_tau(self, rng):
        plan = sinkhorn(rng.standard_normal((6, 6)), SinkhornConfig(tau=1e-3))
        assert np.all(np.isfinite(plan))

    def test_small_tau_approaches_permutation(self):
        x = np.array([[0.0, 1.0, 0.2], [0.9, 0.1, 0.0], [0.0, 0.3, 1.0]])
        plan = sinkhorn(x, SinkhornConfig(tau=0.01, iters=200))
        np.testing.assert_allclose(plan, np.eye(3)[[1, 0, 2]], atol=1e-6)

    def test_rejects_bad_input(self):
        with pytest.raises(DimensionError):
            _ = sinkhorn(np.zeros((2, 3)), SinkhornConfig())
        with pytest.raises(InvalidInputError):
            _ = sinkhorn(np.array([[0.0, np.nan], [0.0, 0.0]]), SinkhornConfig())

    def test_residual(self):
        assert marginal_residual(np.eye(3)) == 0.0
        assert marginal_residual(np.array([[1.0, 0.5], [0.0, 0.5]])) == 0.5


class TestGradient:
    def test_zero_upstream(self, rng):
        grad = sinkhorn_vjp(rng.standard_normal((4, 4)), SinkhornConfig(), np.zeros((4, 4)))
        np.testing.assert_array_equal(grad, 0.0)

    @pytest.mark.parametrize("log_domain", [True, False])
    def test_unrolled_matches_finite_differences(self, rng, log_domain):
        cfg = SinkhornConfig(iters=3, log_domain=log_domain)
        x = rng.standard_normal((4, 4))
        g = rng.standard_normal((4, 4))
        grad = sinkhorn_vjp(x, cfg, g)
        expected = numeric_gradient(lambda v: float(np.sum(sinkhorn(v, cfg) * g)), x)
        assert relative_error(grad, expected) < 1e-6

    def test_unrolled_respects_tau(self, rng):
        cfg = SinkhornConfig(tau=0.5, iters=5)
        x = rng.standard_normal((3, 3))
        g = rng.standard_normal((3, 3))
        expected = numeric_gradient(lambda v: float(np.sum(sinkhorn(v, cfg) * g)), x)
        assert relative_error(sinkhorn_vjp(x, cfg, g), expected) < 1e-6

    def test_implicit_matches_long_unrolled(self, rng):
        x = rng.standard_normal((5, 5))
        g = rng.standard_normal((5, 5))
        unrolled = SinkhornConfig(iters=500)
        implicit = dataclasses.replace(unrolled, grad_mode=GradMode.IMPLICIT)
        assert relative_error(sinkhorn_vjp(x, implicit, g), sinkhorn_vjp(x, unrolled, g)) < 1e-3

    def test_implicit_matches_finite_differences(self, rng):
        cfg = SinkhornConfig(iters=500, grad_mode=GradMode.IMPLICIT)
        x = rng.standard_normal((4, 4))
        g = rng.standard_normal((4, 4))
        expected = numeric_gradient(lambda v: float(np.sum(sinkhorn(v, cfg) * g)), x)
        assert relative_error(sinkhorn_vjp(x, cfg, g), expected) < 1e-4

    def test_implicit_refuses_unconverged_plan(self, rng):
        cfg = SinkhornConfig(iters=1, grad_mode=GradMode.IMPLICIT)
        x = 5.0 * rng.standard_normal((6, 6))
        with pytest.raises(NonConvergenceError) as e:
            _ = sinkhorn_vjp(x, cfg, np.ones((6, 6)))
        assert e.value.residual > e.value.threshold

    def test_upstream_shape_checked(self):
        with pytest.raises(DimensionError):
            _ = sinkhorn_vjp(np.zeros((3, 3)), SinkhornConfig(), np.zeros((3, 2)))


class TestEntropy:
    def test_permutation_has_zero_entropy(self):
        assert entropy(np.eye(4)[[2, 0, 3, 1]]) == 0.0

    def test_uniform_plan(self):
        np.testing.assert_allclose(entropy(np.full((2, 2), 0.5)), 2.0 * np.log(2.0))

    def test_rejects_negative_entries(self):
        with pytest.raises(InvalidInputError):
            _ = entropy(np.array([[1.5, -0.5], [-0.5, 1.5]]))
