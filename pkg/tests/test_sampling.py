import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tctnn.sampling import (
    SamplingMask,
    bernoulli_mask,
    min_sampling_ratio,
    prediction_mask,
    project,
)
from tctnn.tensor_core import load_tensor, save_tensor


def rng(seed=0):
    return np.random.Generator(np.random.PCG64(seed))


class TestSamplingMask:
    def test_rejects_non_binary(self):
        with pytest.raises(ValueError):
            SamplingMask(np.full((2, 2), 0.5))

    def test_counts_match_recount(self):
        ind = (rng(1).random((4, 3, 2)) < 0.6).astype(float)
        mask = SamplingMask(ind)
        for i1 in range(4):
            assert mask.horizontal_count(i1) == int(ind[i1].sum())
        for i2 in range(3):
            assert mask.lateral_count(i2) == int(ind[:, i2].sum())

    def test_count_sums_agree(self):
        ind = (rng(2).random((5, 4, 3)) < 0.5).astype(float)
        mask = SamplingMask(ind)
        horiz = sum(mask.horizontal_count(i) for i in range(5))
        lat = sum(mask.lateral_count(j) for j in range(4))
        assert horiz == lat == mask.total_count

    def test_index_out_of_range(self):
        mask = SamplingMask(np.ones((2, 2, 2)))
        with pytest.raises(IndexError):
            mask.horizontal_count(2)
        with pytest.raises(IndexError):
            mask.lateral_count(-1)

    def test_indicator_immutable(self):
        mask = SamplingMask(np.ones((2, 2)))
        with pytest.raises(ValueError):
            mask.indicator[0, 0] = 0.0

    def test_complement_partitions(self):
        ind = (rng(3).random((3, 3, 2)) < 0.4).astype(float)
        mask = SamplingMask(ind)
        a = rng(4).standard_normal((3, 3, 2))
        assert np.array_equal(project(mask, a) + project(mask.complement(), a), a)


class TestPredictionMask:
    def test_structure(self):
        mask = prediction_mask(4, 1, (3, 2))
        assert mask.indicator.size == 24
        assert (mask.indicator[3] == 0).all()
        assert (mask.indicator[:3] == 1).all()

    def test_zero_horizon_is_all_ones(self):
        mask = prediction_mask(5, 0, (2,))
        assert mask.total_count == 10

    def test_min_ratio_is_zero(self):
        assert min_sampling_ratio(prediction_mask(4, 1, (3, 2))) == 0.0

    def test_bad_horizon(self):
        with pytest.raises(ValueError):
            prediction_mask(4, 4, (2,))
        with pytest.raises(ValueError):
            prediction_mask(4, -1, (2,))


class TestMinSamplingRatio:
    def test_full(self):
        assert min_sampling_ratio(SamplingMask(np.ones((4, 3, 2)))) == 1.0

    def test_all_ones_horizontal_counts(self):
        mask = SamplingMask(np.ones((4, 3, 2)))
        assert all(mask.horizontal_count(i) == 6 for i in range(4))

    def test_invariant_under_trailing_permutation(self):
        ind = (rng(5).random((4, 3, 5)) < 0.5).astype(float)
        perm = rng(6).permutation(5)
        a, b = SamplingMask(ind), SamplingMask(ind[:, :, perm])
        assert min_sampling_ratio(a) == min_sampling_ratio(b)


class TestBernoulliMask:
    def test_p_zero_and_one(self):
        assert bernoulli_mask((3, 3, 3), 0.0, seed=1).total_count == 0
        assert bernoulli_mask((3, 3, 3), 1.0, seed=1).total_count == 27

    def test_reproducible(self):
        a = bernoulli_mask((10, 10, 10), 0.5, seed=42)
        b = bernoulli_mask((10, 10, 10), 0.5, seed=42)
        assert np.array_equal(a.indicator, b.indicator)

    def test_different_seeds_differ(self):
        a = bernoulli_mask((10, 10, 10), 0.5, seed=1)
        b = bernoulli_mask((10, 10, 10), 0.5, seed=2)
        assert not np.array_equal(a.indicator, b.indicator)

    def test_metadata(self):
        mask = bernoulli_mask((10, 10, 10), 0.5, seed=3)
        assert mask.meta["algorithm"] == "PCG64"
        assert mask.meta["seed"] == 3
        assert mask.meta["empirical_fraction"] == mask.total_count / 1000
        assert isinstance(mask.meta["within_band"], bool)

    def test_bad_probability(self):
        with pytest.raises(ValueError):
            bernoulli_mask((2, 2), 1.5, seed=0)

    def test_serializes_in_tensor_format(self, tmp_path):
        mask = bernoulli_mask((4, 5), 0.5, seed=9)
        path = tmp_path / "mask.tnsr"
        save_tensor(mask.indicator, path)
        again = SamplingMask(load_tensor(path))
        assert np.array_equal(again.indicator, mask.indicator)


class TestProject:
    def test_all_ones_identity(self):
        a = rng(7).standard_normal((3, 2, 2))
        assert np.array_equal(project(SamplingMask(np.ones((3, 2, 2))), a), a)

    def test_idempotent(self):
        mask = bernoulli_mask((3, 2, 2), 0.5, seed=11)
        a = rng(8).standard_normal((3, 2, 2))
        once = project(mask, a)
        assert np.array_equal(project(mask, once), once)

    def test_contraction(self):
        mask = bernoulli_mask((3, 2, 2), 0.5, seed=12)
        a = rng(9).standard_normal((3, 2, 2))
        assert np.linalg.norm(project(mask, a)) <= np.linalg.norm(a)

    def test_shape_mismatch(self):
        with pytest.raises(ValueError):
            project(SamplingMask(np.ones((2, 2))), np.ones((2, 3)))


@settings(max_examples=25, deadline=None)
@given(
    t=st.integers(2, 6),
    n=st.integers(1, 4),
    p=st.floats(0.0, 1.0),
    seed=st.integers(0, 2**31),
)
def test_ratio_bounds_and_count_consistency(t, n, p, seed):
    mask = bernoulli_mask((t, n, 2), p, seed=seed)
    rho = min_sampling_ratio(mask)
    assert 0.0 <= rho <= 1.0
    assert sum(mask.horizontal_count(i) for i in range(t)) == mask.total_count
