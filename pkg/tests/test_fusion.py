import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from topoattn import (
    AttentionMap,
    ScalePyramid,
    ValidationError,
    cbam_stub,
    channel_reduce,
    fuse,
    hadamard_inject,
    rescale_feature,
    resize_attention,
    sdi_fuse,
)


def random_pyramid(rng, dims=(16, 8, 4, 2), channels=3):
    return ScalePyramid(tuple(rng.random((d, d, channels)) for d in dims))


class TestCbamStub:
    def test_identity_by_default(self, rng):
        f = rng.random((3, 4, 2))
        assert np.array_equal(cbam_stub(f), f)

    def test_hook_applied(self, rng):
        f = rng.random((3, 4, 2))
        assert np.array_equal(cbam_stub(f, lambda x: 2.0 * x), 2.0 * f)

    def test_dim_changing_hook_rejected(self, rng):
        f = rng.random((3, 4, 2))
        with pytest.raises(ValidationError, match="hook"):
            cbam_stub(f, lambda x: x[:, :, :1])


class TestChannelReduce:
    def test_identity_weights(self, rng):
        f = rng.random((2, 3, 4))
        assert np.array_equal(channel_reduce(f, np.eye(4)), f)

    def test_ones_weights_sum_channels(self, rng):
        f = rng.random((2, 2, 3))
        out = channel_reduce(f, np.ones((1, 3)))
        np.testing.assert_allclose(out[:, :, 0], f.sum(axis=2))

    def test_matches_per_pixel_matmul(self, rng):
        f = rng.random((2, 2, 3))
        w = rng.standard_normal((2, 3))
        out = channel_reduce(f, w)
        for h in range(2):
            for x in range(2):
                np.testing.assert_allclose(out[h, x], w @ f[h, x], atol=1e-12)

    def test_shape_mismatch(self, rng):
        with pytest.raises(ValidationError):
            channel_reduce(rng.random((2, 2, 3)), np.eye(4))


class TestResizeAttention:
    def test_constant_preserved(self):
        attn = AttentionMap(np.full((3, 5), 0.7, dtype=np.float32))
        out = resize_attention(attn, 7, 2)
        assert (out.weights == np.float32(0.7)).all()

    def test_same_dims_identical(self, rng):
        attn = AttentionMap(rng.random((4, 6), dtype=np.float32))
        out = resize_attention(attn, 4, 6)
        assert np.array_equal(out.weights, attn.weights)

    def test_half_pixel_upsample_row(self):
        attn = AttentionMap(np.array([[0.0, 1.0], [0.0, 1.0]], dtype=np.float32))
        out = resize_attention(attn, 2, 4)
        np.testing.assert_allclose(out.weights, [[0.0, 0.25, 0.75, 1.0]] * 2, atol=1e-7)

    def test_output_in_unit_interval(self, rng):
        attn = AttentionMap(rng.random((5, 5), dtype=np.float32))
        out = resize_attention(attn, 13, 3)
        assert out.weights.min() >= 0.0 and out.weights.max() <= 1.0


class TestHadamardInject:
    def test_ones_is_identity(self, rng):
        f = rng.random((3, 3, 2))
        ones = AttentionMap(np.ones((3, 3), dtype=np.float32))
        assert np.array_equal(hadamard_inject(f, ones), f)

    def test_zeros_annihilate(self, rng):
        f = rng.random((3, 3, 2))
        zeros = AttentionMap(np.zeros((3, 3), dtype=np.float32))
        assert (hadamard_inject(f, zeros) == 0).all()

    def test_broadcast_over_channels(self):
        f = np.array([[[2.0, 3.0]]])
        attn = AttentionMap(np.array([[0.5]], dtype=np.float32))
        assert hadamard_inject(f, attn).tolist() == [[[1.0, 1.5]]]

    def test_spatial_mismatch(self, rng):
        with pytest.raises(ValidationError):
            hadamard_inject(rng.random((3, 3, 1)), AttentionMap(np.ones((2, 3), dtype=np.float32)))


def identity_kernel(channels):
    w = np.zeros((channels, channels, 3, 3))
    for ch in range(channels):
        w[ch, ch, 1, 1] = 1.0
    return w


class TestRescaleFeature:
    def test_equal_dims_identity_exact(self, rng):
        f = rng.random((4, 5, 2))
        assert np.array_equal(rescale_feature(f, 4, 5), f)
        assert np.array_equal(rescale_feature(f, 4, 5, identity_kernel(2)), f)

    def test_constant_pooling(self):
        f = np.full((6, 6, 2), 3.25)
        out = rescale_feature(f, 2, 3)
        assert (out == 3.25).all()

    def test_pool_window_means(self):
        f = np.arange(16, dtype=np.float64).reshape(4, 4, 1)
        out = rescale_feature(f, 2, 2)
        assert out[:, :, 0].tolist() == [[2.5, 4.5], [10.5, 12.5]]

    def test_overlapping_pool_windows(self):
        # 3 -> 2 splits into windows [0,2) and [1,3)
        f = np.array([0.0, 6.0, 12.0]).reshape(3, 1, 1)
        out = rescale_feature(f, 2, 1)
        assert out[:, 0, 0].tolist() == [3.0, 9.0]

    def test_bilinear_upsample(self):
        f = np.array([[0.0, 1.0], [0.0, 1.0]])[:, :, None]
        out = rescale_feature(f, 2, 4)
        np.testing.assert_allclose(out[:, :, 0], [[0.0, 0.25, 0.75, 1.0]] * 2, atol=1e-12)

    def test_mixed_resize_rejected(self, rng):
        with pytest.raises(ValidationError, match="mixed"):
            rescale_feature(rng.random((4, 4, 1)), 2, 8)

    def test_conv_weights_shape_checked(self, rng):
        with pytest.raises(ValidationError):
            rescale_feature(rng.random((4, 4, 2)), 4, 4, np.zeros((2, 2, 2, 2)))

    def test_conv_matches_double_loop(self, rng):
        f = rng.random((3, 4, 2))
        w = rng.standard_normal((2, 2, 3, 3))
        out = rescale_feature(f, 3, 4, w)
        padded = np.pad(f, ((1, 1), (1, 1), (0, 0)))
        for h in range(3):
            for x in range(4):
                expected = np.zeros(2)
                for dy in range(3):
                    for dx in range(3):
                        expected += w[:, :, dy, dx] @ padded[h + dy, x + dx]
                np.testing.assert_allclose(out[h, x], expected, atol=1e-12)


class TestFuse:
    def test_ones_identity(self, rng):
        x = rng.random((2, 3, 2))
        ones = np.ones_like(x)
        assert np.array_equal(fuse([ones, x, ones, ones]), x)

    def test_zero_propagates(self, rng):
        parts = [rng.random((2, 2, 1)) for _ in range(4)]
        for p in parts:
            p[0, 0, 0] = 0.0
        assert fuse(parts)[0, 0, 0] == 0.0

    def test_scalar_product(self):
        parts = [np.full((1, 1, 1), v) for v in (2.0, 3.0, 4.0, 5.0)]
        assert fuse(parts)[0, 0, 0] == 120.0

    def test_dim_mismatch(self, rng):
        with pytest.raises(ValidationError):
            fuse([rng.random((2, 2, 1)), rng.random((2, 3, 1))])


class TestScalePyramid:
    def test_rejects_non_decreasing(self, rng):
        with pytest.raises(ValidationError, match="strictly decrease"):
            ScalePyramid((rng.random((4, 4, 1)), rng.random((4, 2, 1))))

    def test_accepts_strictly_decreasing(self, rng):
        pyr = random_pyramid(rng)
        assert pyr.num_scales == 4


class TestSdiFuse:
    def test_all_ones_attention_equals_plain(self, rng):
        pyr = random_pyramid(rng)
        ones = AttentionMap(np.ones((32, 32), dtype=np.float32))
        with_attn = sdi_fuse(pyr, ones)
        plain = sdi_fuse(pyr, None)
        for a, b in zip(with_attn, plain):
            assert np.array_equal(a, b)

    def test_output_dims_match_scales(self, rng):
        dims = (13, 9, 5, 2)
        pyr = ScalePyramid(tuple(rng.random((h, h + 1, 2)) for h in dims))
        outs = sdi_fuse(pyr, AttentionMap(rng.random((17, 19), dtype=np.float32)))
        for out, f in zip(outs, pyr.features):
            assert out.shape == f.shape

    def test_constant_pyramid_product(self, rng):
        consts = (0.5, 1.5, 2.0, 0.25)
        pyr = ScalePyramid(tuple(np.full((d, d, 2), k) for d, k in zip((16, 8, 4, 2), consts)))
        ones = AttentionMap(np.ones((16, 16), dtype=np.float32))
        outs = sdi_fuse(pyr, ones)
        expected = 0.5 * 1.5 * 2.0 * 0.25
        for out in outs:
            np.testing.assert_allclose(out, expected, atol=1e-12)

    def test_attention_monotonicity(self, rng):
        pyr = random_pyramid(rng)  # nonnegative features
        t1 = rng.random((32, 32)).astype(np.float32) * 0.6
        t2 = np.minimum(t1 + 0.3, 1.0).astype(np.float32)
        out1 = sdi_fuse(pyr, AttentionMap(t1))
        out2 = sdi_fuse(pyr, AttentionMap(t2))
        for a, b in zip(out1, out2):
            assert (a <= b + 1e-12).all()

    def test_channel_reduction_per_scale(self, rng):
        dims = (8, 6, 4, 2)
        chans = (4, 3, 2, 5)
        pyr = ScalePyramid(tuple(rng.random((d, d, c)) for d, c in zip(dims, chans)))
        weights = [rng.standard_normal((2, c)) for c in chans]
        outs = sdi_fuse(pyr, None, reduce_weights=weights)
        for out, d in zip(outs, dims):
            assert out.shape == (d, d, 2)

    def test_mismatched_channels_rejected(self, rng):
        pyr = ScalePyramid((rng.random((4, 4, 2)), rng.random((2, 2, 3))))
        with pytest.raises(ValidationError, match="channel"):
            sdi_fuse(pyr, None)

    def test_cbam_hook_threads_through(self, rng):
        pyr = random_pyramid(rng)
        doubled = sdi_fuse(pyr, None, cbam_hook=lambda x: 2.0 * x)
        plain = sdi_fuse(pyr, None)
        for a, b in zip(doubled, plain):
            np.testing.assert_allclose(a, 16.0 * b, atol=1e-9)

    @given(st.lists(st.integers(1, 24), min_size=4, max_size=4, unique=True),
           st.lists(st.integers(1, 24), min_size=4, max_size=4, unique=True),
           st.integers(1, 3))
    @settings(max_examples=25, deadline=None)
    def test_dims_contract_random_shapes(self, hs, ws, channels):
        rng = np.random.default_rng(42)
        hs, ws = sorted(hs, reverse=True), sorted(ws, reverse=True)
        pyr = ScalePyramid(tuple(rng.random((h, w, channels)) for h, w in zip(hs, ws)))
        outs = sdi_fuse(pyr, AttentionMap(rng.random((hs[0], ws[0]), dtype=np.float32)))
        assert [o.shape for o in outs] == [(h, w, channels) for h, w in zip(hs, ws)]
