import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from cplsh.errors import DimensionError, ParameterError
from cplsh.transforms import (
    DenseGaussian,
    RademacherDiagonal,
    RowSubset,
    apply_fjlt,
    apply_fjlt_batch,
    fwht_in_place,
    fwht_rows,
    next_pow2,
    pad_to_pow2,
    sample_dense_gaussian,
    sample_fjlt,
)

from oracles import naive_hadamard


class TestFwht:
    def test_identity_at_length_one(self):
        assert fwht_in_place(np.array([1.0])).tolist() == [1.0]

    def test_first_basis_vector_gives_all_ones(self):
        v = np.array([1.0, 0.0, 0.0, 0.0])
        assert fwht_in_place(v).tolist() == [1.0, 1.0, 1.0, 1.0]

    @pytest.mark.parametrize("d", [2, 4, 8, 16, 32, 64])
    def test_matches_naive_hadamard_matrix(self, d):
        rng = np.random.default_rng(d)
        H = naive_hadamard(d)
        for _ in range(5):
            v = rng.standard_normal(d)
            np.testing.assert_allclose(
                fwht_in_place(v.copy()), H @ v, rtol=1e-10, atol=1e-12
            )

    @pytest.mark.parametrize("d", [2, 8, 256, 4096, 16384])
    def test_self_inverse_and_norm(self, d):
        rng = np.random.default_rng(d + 1)
        v = rng.standard_normal(d)
        w = fwht_in_place(v.copy())
        assert np.linalg.norm(w) == pytest.approx(np.sqrt(d) * np.linalg.norm(v),
                                                  rel=1e-12)
        back = fwht_in_place(w)
        assert np.linalg.norm(back - d * v) <= 1e-12 * np.linalg.norm(d * v)

    @given(st.integers(min_value=0, max_value=10), st.integers(0, 2**32 - 1))
    def test_self_inverse_property(self, k, seed):
        d = 1 << k
        v = np.random.default_rng(seed).uniform(-10, 10, size=d)
        back = fwht_in_place(fwht_in_place(v.copy()))
        assert np.linalg.norm(back - d * v) <= 1e-12 * max(np.linalg.norm(d * v), 1e-30)

    def test_mutates_argument_in_place(self):
        v = np.array([1.0, 2.0, 3.0, 4.0])
        out = fwht_in_place(v)
        assert out is v

    def test_rejects_bad_lengths_and_shapes(self):
        with pytest.raises(DimensionError):
            fwht_in_place(np.zeros(3))
        with pytest.raises(DimensionError):
            fwht_in_place(np.zeros((2, 2)))
        with pytest.raises(DimensionError):
            fwht_in_place(np.zeros(8)[::2])
        with pytest.raises(DimensionError):
            fwht_in_place([1.0, 1.0])

    def test_rows_variant_matches_vector_path(self):
        rng = np.random.default_rng(0)
        M = rng.standard_normal((5, 16))
        expected = np.stack([fwht_in_place(row.copy()) for row in M])
        np.testing.assert_array_equal(fwht_rows(M.copy()), expected)


class TestPad:
    def test_power_of_two_passthrough(self):
        assert pad_to_pow2([3.0, 4.0]).tolist() == [3.0, 4.0]

    def test_zero_extension(self):
        assert pad_to_pow2([1.0, 1.0, 1.0]).tolist() == [1.0, 1.0, 1.0, 0.0]

    def test_norm_preserved(self):
        x = np.random.default_rng(3).standard_normal(100)
        assert np.linalg.norm(pad_to_pow2(x)) == pytest.approx(np.linalg.norm(x),
                                                               rel=1e-15)

    def test_empty_rejected(self):
        with pytest.raises(DimensionError):
            pad_to_pow2(np.array([]))

    @given(st.lists(st.floats(-1e6, 1e6), min_size=1, max_size=40))
    def test_padding_never_changes_norm(self, vals):
        x = np.array(vals)
        padded = pad_to_pow2(x)
        assert padded.shape[0] == next_pow2(len(vals))
        assert np.linalg.norm(padded) == pytest.approx(np.linalg.norm(x), rel=1e-15,
                                                       abs=0.0)


class TestRademacherAndSubset:
    def test_signs_validated(self):
        with pytest.raises(ParameterError):
            RademacherDiagonal(np.array([1.0, 0.5]))

    def test_apply_twice_is_identity(self):
        d = RademacherDiagonal(np.array([1.0, -1.0, -1.0, 1.0]))
        x = np.array([3.0, 1.0, -2.0, 0.5])
        np.testing.assert_array_equal(d.apply(d.apply(x)), x)

    def test_subset_must_increase(self):
        with pytest.raises(ParameterError):
            RowSubset(np.array([3, 1]))
        with pytest.raises(ParameterError):
            RowSubset(np.array([1, 1]))


class TestSampleFjlt:
    def test_full_subset_when_m_equals_d(self):
        t = sample_fjlt(8, 8, np.random.default_rng(0))
        assert t.rows.indices.tolist() == list(range(8))

    def test_deterministic_per_seed(self):
        a = sample_fjlt(1024, 64, np.random.default_rng(42))
        b = sample_fjlt(1024, 64, np.random.default_rng(42))
        np.testing.assert_array_equal(a.diag.signs, b.diag.signs)
        np.testing.assert_array_equal(a.rows.indices, b.rows.indices)
        assert a.scale == b.scale and a.input_dim == b.input_dim

    def test_sign_empirical_mean(self):
        rng = np.random.default_rng(7)
        total = 0.0
        for _ in range(1000):
            total += sample_fjlt(1024, 1, rng).diag.signs.sum()
        assert abs(total / (1000 * 1024)) < 0.005

    def test_pads_input_dimension(self):
        t = sample_fjlt(100, 16, np.random.default_rng(1))
        assert t.input_dim == 128

    def test_m_out_of_range(self):
        with pytest.raises(DimensionError):
            sample_fjlt(8, 9, np.random.default_rng(0))
        with pytest.raises(DimensionError):
            sample_fjlt(8, 0, np.random.default_rng(0))


class TestApplyFjlt:
    def test_zero_maps_to_zero(self):
        t = sample_fjlt(16, 4, np.random.default_rng(2))
        assert np.all(apply_fjlt(t, np.zeros(16)) == 0.0)

    def test_isometry_on_full_subset(self):
        rng = np.random.default_rng(3)
        t = sample_fjlt(16, 16, rng)
        for _ in range(10):
            x = rng.standard_normal(16)
            assert np.linalg.norm(apply_fjlt(t, x)) == pytest.approx(
                np.linalg.norm(x), rel=1e-12
            )

    def test_linearity(self):
        rng = np.random.default_rng(4)
        t = sample_fjlt(64, 16, rng)
        x, y = rng.standard_normal(64), rng.standard_normal(64)
        a, b = 2.5, -1.25
        np.testing.assert_allclose(
            apply_fjlt(t, a * x + b * y),
            a * apply_fjlt(t, x) + b * apply_fjlt(t, y),
            rtol=1e-12, atol=1e-12,
        )

    def test_norm_concentration_over_resamples(self):
        # E||x~||^2 = 1; at m = 32 the squared norm has std ~ 0.25, so the
        # tail fraction beyond +-0.5 sits near 3% (measured 2.9%).
        rng = np.random.default_rng(5)
        x = rng.standard_normal(256)
        x /= np.linalg.norm(x)
        bad = 0
        for i in range(5000):
            t = sample_fjlt(256, 32, np.random.default_rng((6, i)))
            n2 = np.linalg.norm(apply_fjlt(t, x)) ** 2
            bad += abs(n2 - 1.0) > 0.5
        assert bad / 5000 < 0.05

    def test_batch_matches_single(self):
        rng = np.random.default_rng(8)
        t = sample_fjlt(48, 12, rng)
        X = rng.standard_normal((7, 48))
        expected = np.stack([apply_fjlt(t, row) for row in X])
        np.testing.assert_array_equal(apply_fjlt_batch(t, X), expected)

    def test_dimension_mismatch(self):
        t = sample_fjlt(16, 4, np.random.default_rng(9))
        with pytest.raises(DimensionError):
            apply_fjlt(t, np.zeros(17))


class TestDenseGaussian:
    def test_shape_contract(self):
        g = sample_dense_gaussian(4, 2, np.random.default_rng(0))
        assert (g.rows, g.cols) == (4, 2) and g.entries.shape == (4, 2)

    def test_deterministic_per_seed(self):
        a = sample_dense_gaussian(1, 1, np.random.default_rng(11))
        b = sample_dense_gaussian(1, 1, np.random.default_rng(11))
        assert a.entries[0, 0] == b.entries[0, 0]

    def test_moments(self):
        g = sample_dense_gaussian(1000, 1000, np.random.default_rng(12))
        assert abs(g.entries.mean()) < 0.005
        assert 0.99 < g.entries.var() < 1.01

    def test_zero_dimension_rejected(self):
        with pytest.raises(DimensionError):
            sample_dense_gaussian(0, 3, np.random.default_rng(0))

    def test_non_finite_rejected(self):
        with pytest.raises(ParameterError):
            DenseGaussian(np.array([[np.inf, 1.0]]))
