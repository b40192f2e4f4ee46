import numpy as np
import pytest

from tctnn.sampling import SamplingMask, bernoulli_mask, prediction_mask
from tctnn.solver import solve_tctnn, solve_tnn
from tctnn.synth import synth_incoherent_lowrank
from tctnn.theory import (
    bernoulli_success_probability,
    deterministic_recovery_check,
    incoherence_mu,
    max_exact_horizon,
    recovery_threshold,
)
from tctnn.tsvd import identity_tensor, t_product, t_svd, transpose


def rng(seed=0):
    return np.random.Generator(np.random.PCG64(seed))


class TestIncoherence:
    def test_identity_is_perfectly_incoherent(self):
        rep = incoherence_mu(identity_tensor(4, (3,)))
        assert rep.mu == pytest.approx(1.0, abs=1e-10)
        assert rep.tubal_rank == 4
        assert rep.multi_rank_sum == 12

    def test_single_horizontal_slab_is_maximally_spiky(self):
        a = np.zeros((5, 4, 3))
        a[2] = rng(1).standard_normal((4, 3))
        rep = incoherence_mu(a)
        assert rep.mu == pytest.approx(5.0, rel=1e-8)
        assert rep.tubal_rank == 1

    def test_random_gaussian_mu_in_range(self):
        a = rng(2).standard_normal((8, 8, 4))
        rep = incoherence_mu(a)
        assert 1.0 - 1e-9 <= rep.mu <= 8.0

    def test_leverages_match_literal_basis_contraction(self):
        a = rng(3).standard_normal((8, 8, 4))
        rep = incoherence_mu(a)
        f = t_svd(a, skinny=True)
        for i1 in (0, 3, 7):
            basis = np.zeros((8, 1, 4))
            basis[i1, 0, 0] = 1.0
            literal = np.linalg.norm(t_product(transpose(f.u), basis))
            assert rep.per_row_leverage[i1] == pytest.approx(literal, rel=1e-9)
        for i2 in (0, 5):
            basis = np.zeros((8, 1, 4))
            basis[i2, 0, 0] = 1.0
            literal = np.linalg.norm(t_product(transpose(f.v), basis))
            assert rep.per_col_leverage[i2] == pytest.approx(literal, rel=1e-9)

    def test_leverage_trace_identity(self):
        a = rng(4).standard_normal((6, 5, 3))
        rep = incoherence_mu(a)
        assert (rep.per_row_leverage ** 2).sum() == pytest.approx(rep.tubal_rank, abs=1e-8)
        assert (rep.per_col_leverage ** 2).sum() == pytest.approx(rep.tubal_rank, abs=1e-8)

    def test_zero_tensor_rejected(self):
        with pytest.raises(ValueError):
            incoherence_mu(np.zeros((3, 3, 2)))


class TestRecoveryCheck:
    def test_full_mask_always_satisfied(self):
        a = rng(5).standard_normal((4, 4, 2))
        chk = deterministic_recovery_check(SamplingMask(np.ones((4, 4, 2))), a)
        assert chk.satisfied
        assert chk.lhs == 1.0
        assert 0.0 < chk.rhs < 1.0

    def test_prediction_mask_never_satisfied(self):
        a = rng(6).standard_normal((6, 3, 2))
        chk = deterministic_recovery_check(prediction_mask(6, 2, (3, 2)), a)
        assert not chk.satisfied
        assert chk.lhs == 0.0

    def test_rank1_flat_instance_threshold(self):
        a = synth_incoherent_lowrank((8, 8, 2), rank=1, seed=7)
        rep = incoherence_mu(a)
        assert rep.mu == pytest.approx(1.0, abs=1e-8)
        assert rep.multi_rank_sum == 2
        rhs = recovery_threshold(rep.mu, rep.tubal_rank, rep.multi_rank_sum)
        assert rhs == pytest.approx(1.0 - 1.0 / 6.0, abs=1e-8)

    def test_dense_bernoulli_typically_satisfies(self):
        a = synth_incoherent_lowrank((8, 8, 2), rank=1, seed=8)
        hits = sum(
            deterministic_recovery_check(bernoulli_mask((8, 8, 2), 0.95, seed=s), a).satisfied
            for s in range(20)
        )
        assert hits >= 1

    def test_passing_check_implies_recovery(self):
        for i in range(3):
            truth = synth_incoherent_lowrank((8, 8, 3), rank=1, seed=30 + i)
            mask = next(
                m for s in range(200)
                for m in [bernoulli_mask((8, 8, 3), 0.95, seed=s)]
                if deterministic_recovery_check(m, truth).satisfied
            )
            solution, _ = solve_tnn(truth * mask.indicator, mask)
            err = np.linalg.norm(solution - truth) / np.linalg.norm(truth)
            assert err <= 1e-6


class TestBernoulliProbability:
    def test_vacuous_gap(self):
        a = synth_incoherent_lowrank((8, 8, 2), rank=1, seed=9)
        rep = incoherence_mu(a)
        p_at_threshold = recovery_threshold(rep.mu, rep.tubal_rank, rep.multi_rank_sum)
        assert bernoulli_success_probability(p_at_threshold, a) == 0.0

    def test_monotone_in_gap(self):
        a = synth_incoherent_lowrank((8, 8, 2), rank=1, seed=10)
        probs = [bernoulli_success_probability(p, a) for p in (0.9, 0.95, 1.0)]
        assert probs == sorted(probs)

    def test_formula_value(self):
        # mu = 1, r = 1, rs = 2 by construction: gap at p=1 is 1/6
        a = synth_incoherent_lowrank((8, 8, 2), rank=1, seed=11)
        expect = 1.0 - np.exp(-4.0 * (1.0 / 6.0) ** 2 * a.size)
        assert bernoulli_success_probability(1.0, a) == pytest.approx(expect, rel=1e-9)

    def test_quarter_gap_instance(self):
        # single trailing extent gives mu = 1, r = 1, rs = 1, so the gap at
        # p = 1 is 1/4 and the bound is 1 - exp(-4 * 0.25^2 * m0)
        a = synth_incoherent_lowrank((40, 25, 1), rank=1, seed=12)
        rep = incoherence_mu(a)
        assert rep.mu == pytest.approx(1.0, abs=1e-8)
        assert rep.multi_rank_sum == 1
        gap = 1.0 - recovery_threshold(rep.mu, 1, 1)
        assert gap == pytest.approx(0.25, abs=1e-9)
        expect = 1.0 - np.exp(-4.0 * 0.25 ** 2 * a.size)
        assert bernoulli_success_probability(1.0, a) == pytest.approx(expect, rel=1e-12)

    def test_bad_probability(self):
        with pytest.raises(ValueError):
            bernoulli_success_probability(1.2, np.ones((2, 2, 2)))


class TestMaxExactHorizon:
    def test_white_noise_collapses(self):
        series = rng(12).standard_normal((32, 3, 2))
        rep = max_exact_horizon(series, 16)
        assert rep.h_max == 0
        assert rep.r_T == 16

    def test_two_periodic_scalar_fiber_certifies_one_step(self):
        series = np.tile(np.array([1.3, -0.7]), 16).reshape(32, 1)
        rep = max_exact_horizon(series, 16)
        assert rep.r_T <= 2
        assert rep.bound > 1.0
        assert rep.h_max >= 1

    def test_certified_horizon_is_predictable(self):
        series = np.tile(np.array([1.3, -0.7]), 16).reshape(32, 1)
        rep = max_exact_horizon(series, 16)
        h = rep.h_max
        padded = series.copy()
        padded[32 - h:] = 0.0
        mask = prediction_mask(32, h, (1,))
        from tctnn.solver import AdmmConfig

        completed, _ = solve_tctnn(padded, mask, AdmmConfig(kernel_k=16))
        err = np.linalg.norm(completed[32 - h:] - series[32 - h:])
        assert err <= 1e-6 * max(np.linalg.norm(series[32 - h:]), 1.0)

    def test_formula_linear_in_k(self):
        rep = max_exact_horizon(np.tile(np.array([1.0, 2.0]), 16).reshape(32, 1), 16)
        ratio = rep.bound / rep.kernel
        assert ratio == pytest.approx(
            1.0 / (2.0 * rep.mu_T * rep.r_T * (rep.rs_T + 1)), rel=1e-12
        )

    def test_kernel_out_of_range(self):
        with pytest.raises(ValueError):
            max_exact_horizon(np.ones((8, 2)), 9)
