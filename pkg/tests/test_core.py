"""Objective and closed-form update tests against independent oracles."""

import numpy as np
import pytest

from oracles import (
    direct_shared_objective,
    direct_tl_objective,
    gd_minimize_transform,
    gd_objective,
)
from stmatch.core import (
    HyperParams,
    SingularTransformWarning,
    SparsityPolicy,
    hard_threshold,
    shared_objective,
    tl_objective,
    transform_objective_gradient,
    update_transform,
)
from stmatch.errors import (
    DimensionError,
    IllPosedError,
    NumericError,
    PairingError,
)


class TestHardThreshold:
    def test_magnitude_ordering_example(self):
        m = np.array([[3.0], [-5.0], [1.0]])
        out = hard_threshold(m, SparsityPolicy(tau=2))
        assert np.array_equal(out, np.array([[3.0], [-5.0], [0.0]]))

    def test_inactive_constraint_returns_input(self):
        rng = np.random.default_rng(0)
        m = rng.standard_normal((6, 3))
        out = hard_threshold(m, SparsityPolicy(tau=6))
        assert np.array_equal(out, m)

    def test_tie_toward_smaller_row(self):
        m = np.array([[2.0], [2.0], [1.0]])
        out = hard_threshold(m, SparsityPolicy(tau=1))
        assert np.array_equal(out, np.array([[2.0], [0.0], [0.0]]))

    def test_tau_above_rows_rejected(self):
        with pytest.raises(DimensionError):
            hard_threshold(np.ones((2, 2)), SparsityPolicy(tau=3))

    def test_non_finite_rejected(self):
        m = np.array([[1.0], [np.nan]])
        with pytest.raises(NumericError):
            hard_threshold(m, SparsityPolicy(tau=1))

    def test_idempotent_on_random_inputs(self):
        rng = np.random.default_rng(12)
        for _ in range(25):
            n = int(rng.integers(1, 12))
            cols = int(rng.integers(1, 8))
            tau = int(rng.integers(1, n + 1))
            m = rng.standard_normal((n, cols))
            policy = SparsityPolicy(tau=tau)
            once = hard_threshold(m, policy)
            assert np.array_equal(hard_threshold(once, policy), once)
            assert np.all((once != 0).sum(axis=0) <= tau)


class TestTlObjective:
    def test_exact_fit_no_regularization(self):
        x = np.random.default_rng(1).standard_normal((4, 7))
        assert tl_objective(np.eye(4), x, x, 0.0, 0.0) == 0.0

    def test_identity_frobenius_term(self):
        n = 5
        x = np.random.default_rng(2).standard_normal((n, 3))
        assert tl_objective(np.eye(n), x, x, 1.0, 0.0) == pytest.approx(n)

    def test_matches_direct_summation_oracle(self):
        rng = np.random.default_rng(42)
        for _ in range(10):
            t = rng.standard_normal((4, 4))
            x = rng.standard_normal((4, 6))
            a = rng.standard_normal((4, 6))
            lam1, lam2 = rng.uniform(0.1, 2.0, size=2)
            got = tl_objective(t, x, a, lam1, lam2)
            want = direct_tl_objective(t, x, a, lam1, lam2)
            assert got == pytest.approx(want, rel=1e-12)

    def test_singular_transform_flagged_as_inf(self):
        t = np.zeros((3, 3))
        x = np.ones((3, 2))
        with pytest.warns(SingularTransformWarning):
            assert tl_objective(t, x, x, 1.0, 1.0) == np.inf

    def test_column_permutation_invariance(self):
        rng = np.random.default_rng(3)
        t = rng.standard_normal((5, 5))
        x = rng.standard_normal((5, 9))
        a = rng.standard_normal((5, 9))
        perm = rng.permutation(9)
        base = tl_objective(t, x, a, 0.3, 0.7)
        assert tl_objective(t, x[:, perm], a[:, perm], 0.3, 0.7) == pytest.approx(base, rel=1e-12)


class TestSharedObjective:
    def _instance(self, seed=7, n=4, cols=6):
        rng = np.random.default_rng(seed)
        return (rng.standard_normal((n, n)),
                rng.standard_normal((n, cols)),
                rng.standard_normal((n, cols)),
                rng.standard_normal((n, cols)),
                rng.standard_normal((n, cols)))

    def test_identical_codes_zero_coupling(self):
        t, xs, xd, a, _ = self._instance()
        hyper0 = HyperParams(tau=2, lambda3=0.0)
        hyper5 = HyperParams(tau=2, lambda3=5.0)
        assert shared_objective(t, xs, xd, a, a, hyper5) == pytest.approx(
            shared_objective(t, xs, xd, a, a, hyper0), rel=1e-15
        )

    def test_lambda3_zero_reduces_to_stacked_tl(self):
        t, xs, xd, a_s, a_d = self._instance(seed=11)
        hyper = HyperParams(tau=2, lambda1=0.9, lambda2=1.7, lambda3=0.0)
        got = shared_objective(t, xs, xd, a_s, a_d, hyper)
        want = tl_objective(t, np.hstack((xs, xd)), np.hstack((a_s, a_d)), 0.9, 1.7)
        assert got == pytest.approx(want, rel=1e-12)

    def test_matches_direct_summation_oracle(self):
        t, xs, xd, a_s, a_d = self._instance(seed=13)
        hyper = HyperParams(tau=2, lambda1=0.4, lambda2=1.1, lambda3=0.8)
        got = shared_objective(t, xs, xd, a_s, a_d, hyper)
        want = direct_shared_objective(t, xs, xd, a_s, a_d, 0.4, 1.1, 0.8)
        assert got == pytest.approx(want, rel=1e-12)

    def test_pair_count_mismatch_rejected(self):
        t, xs, xd, a_s, a_d = self._instance()
        with pytest.raises(PairingError):
            shared_objective(t, xs[:, :3], xd, a_s[:, :3], a_d, HyperParams(tau=2))

    def test_simultaneous_pair_permutation_invariance(self):
        t, xs, xd, a_s, a_d = self._instance(seed=29)
        hyper = HyperParams(tau=2, lambda1=0.4, lambda2=1.1, lambda3=0.8)
        perm = np.random.default_rng(5).permutation(xs.shape[1])
        base = shared_objective(t, xs, xd, a_s, a_d, hyper)
        permuted = shared_objective(t, xs[:, perm], xd[:, perm],
                                    a_s[:, perm], a_d[:, perm], hyper)
        assert permuted == pytest.approx(base, rel=1e-12)


class TestUpdateTransform:
    def test_exact_fit_limit(self):
        n = 4
        eye = np.eye(n)
        t = update_transform(eye, eye, 1e-8, 1e-8)
        assert np.max(np.abs(t - eye)) < 1e-3

    def test_beats_gradient_descent_oracle(self):
        rng = np.random.default_rng(101)
        n, cols = 6, 20
        x = rng.standard_normal((n, cols))
        a = rng.standard_normal((n, cols))
        lam1, lam2 = 0.8, 1.2
        t = update_transform(x, a, lam1, lam2)
        closed = gd_objective(t, x, a, lam1, lam2)
        _, oracle = gd_minimize_transform(x, a, lam1, lam2, steps=10_000)
        assert closed <= oracle + 1e-6 * (1.0 + abs(oracle))

    def test_stationarity_of_closed_form(self):
        rng = np.random.default_rng(55)
        for _ in range(5):
            n = int(rng.integers(2, 7))
            x = rng.standard_normal((n, 15))
            a = rng.standard_normal((n, 15))
            t = update_transform(x, a, 0.6, 0.9)
            grad = transform_objective_gradient(t, x, a, 0.6, 0.9)
            obj = tl_objective(t, x, a, 0.6, 0.9)
            assert np.linalg.norm(grad) <= 1e-6 * (1.0 + abs(obj))

    def test_gradient_matches_central_differences(self):
        rng = np.random.default_rng(77)
        n = 5
        x = rng.standard_normal((n, 9))
        a = rng.standard_normal((n, 9))
        t = rng.standard_normal((n, n)) + 2.0 * np.eye(n)
        lam1, lam2 = 0.5, 1.5
        analytic = transform_objective_gradient(t, x, a, lam1, lam2)
        step = 1e-5
        numeric = np.zeros_like(t)
        for i in range(n):
            for j in range(n):
                plus = t.copy()
                minus = t.copy()
                plus[i, j] += step
                minus[i, j] -= step
                numeric[i, j] = (
                    tl_objective(plus, x, a, lam1, lam2)
                    - tl_objective(minus, x, a, lam1, lam2)
                ) / (2.0 * step)
        err = np.linalg.norm(analytic - numeric)
        assert err <= 1e-4 * (1.0 + np.linalg.norm(analytic))

    def test_log_det_always_finite(self):
        rng = np.random.default_rng(31)
        for _ in range(5):
            x = rng.standard_normal((4, 3))  # fewer samples than features
            a = rng.standard_normal((4, 3))
            t = update_transform(x, a, 0.5, 0.5)
            sign, logdet = np.linalg.slogdet(t)
            assert sign != 0 and np.isfinite(logdet)

    def test_nonpositive_regularizers_rejected(self):
        x = np.ones((3, 4))
        with pytest.raises(IllPosedError):
            update_transform(x, x, 0.0, 1.0)
        with pytest.raises(IllPosedError):
            update_transform(x, x, 1.0, -0.1)


class TestHyperParams:
    def test_rejects_bad_values(self):
        with pytest.raises(IllPosedError):
            HyperParams(tau=0)
        with pytest.raises(IllPosedError):
            HyperParams(tau=2, lambda1=-1.0)
        with pytest.raises(IllPosedError):
            HyperParams(tau=2, rel_tol=0.0)
        with pytest.raises(IllPosedError):
            HyperParams(tau=2, max_iters=0)
