import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from palmforge.errors import ConfigError, DegenerateGeometryError
from palmforge.geometry import (DEFAULT_TARGETS, AffineTransform, HandKeyPoints,
                                Rect, estimate_affine, roi_grid, warp)

from .oracles import warp_reference


def keypoints_with_reference(ref_pts):
    """21-point set whose MCP rows (5, 9, 13, 17) hold ``ref_pts``."""
    pts = np.tile(np.array([[10.0, 10.0]]), (21, 1))
    pts += np.arange(21)[:, None] * [1.0, 2.0]  # keep the rest non-degenerate
    for row, p in zip((5, 9, 13, 17), ref_pts):
        pts[row] = p
    return HandKeyPoints(pts)


class TestEstimateAffine:
    def test_identity_when_reference_equals_targets(self):
        kp = keypoints_with_reference(DEFAULT_TARGETS)
        t = estimate_affine(kp)
        np.testing.assert_allclose(t.matrix, AffineTransform.identity().matrix, atol=1e-9)

    def test_pure_translation(self):
        kp = keypoints_with_reference(DEFAULT_TARGETS + [10.0, -5.0])
        t = estimate_affine(kp)
        np.testing.assert_allclose(t.matrix[:, :2], np.eye(2), atol=1e-9)
        np.testing.assert_allclose(t.matrix[:, 2], [-10.0, 5.0], atol=1e-9)

    def test_recovers_rotation_scale(self):
        # ground truth: rotation 30 degrees + scale 1.2 about the origin
        th = np.radians(30.0)
        s = 1.2
        truth = np.array([
            [s * np.cos(th), -s * np.sin(th), 0.0],
            [s * np.sin(th), s * np.cos(th), 0.0],
        ])
        truth_t = AffineTransform(truth)
        # joints = truth^-1(targets), so the fitted map (joints -> targets) is truth
        joints = truth_t.inverse().apply(DEFAULT_TARGETS)
        t = estimate_affine(keypoints_with_reference(joints))
        np.testing.assert_allclose(t.matrix, truth, atol=1e-9)

    def test_collinear_reference_raises(self):
        ref = np.array([[0.0, 0.0], [10.0, 10.0], [20.0, 20.0], [30.0, 30.0]])
        with pytest.raises(DegenerateGeometryError):
            estimate_affine(keypoints_with_reference(ref))

    def test_wrong_keypoint_count_rejected(self):
        with pytest.raises(ConfigError):
            HandKeyPoints(np.zeros((20, 2)))

    def test_nonfinite_keypoints_rejected(self):
        pts = np.zeros((21, 2))
        pts[3, 0] = np.nan
        with pytest.raises(ConfigError):
            HandKeyPoints(pts)

    @settings(max_examples=40, deadline=None)
    @given(st.integers(0, 2**32 - 1))
    def test_round_trip_recovers_transform(self, seed):
        # random, well-conditioned affine: estimate_affine(t(targets), targets)
        # must recover t's inverse to 1e-6 in every entry
        rng = np.random.default_rng(seed)
        while True:
            lin = rng.uniform(-2.0, 2.0, (2, 2))
            if abs(np.linalg.det(lin)) > 0.3:
                break
        t = AffineTransform(np.hstack([lin, rng.uniform(-50, 50, (2, 1))]))
        fitted = estimate_affine(keypoints_with_reference(t.apply(DEFAULT_TARGETS)))
        np.testing.assert_allclose(fitted.matrix, t.inverse().matrix, atol=1e-6)


class TestWarp:
    def test_identity_is_bitwise(self):
        rng = np.random.default_rng(0)
        img = rng.integers(0, 256, (256, 256), dtype=np.uint8)
        out = warp(img, AffineTransform.identity())
        assert np.array_equal(out, img)

    def test_constant_source_full_coverage(self):
        img = np.full((300, 300), 77, dtype=np.uint8)
        t = AffineTransform(np.array([[1.0, 0.0, -20.0], [0.0, 1.0, -20.0]]))
        out = warp(img, t)
        assert np.array_equal(out, np.full((256, 256), 77, dtype=np.uint8))

    def test_translated_impulse_matches_reference(self):
        img = np.zeros((64, 64), dtype=np.uint8)
        img[30, 20] = 255
        t = AffineTransform(np.array([[1.0, 0.0, 3.5], [0.0, 1.0, -2.25]]))
        out = warp(img, t, size=64)
        ref = warp_reference(img, t.matrix, size=64)
        assert np.array_equal(out, ref)
        # impulse lands at t(p) spread over the 2x2 bilinear footprint
        assert out[27:29, 23:25].sum() > 0

    def test_random_transform_matches_reference(self):
        rng = np.random.default_rng(11)
        img = rng.integers(0, 256, (48, 48), dtype=np.uint8)
        t = AffineTransform(np.array([[0.8, 0.2, 5.0], [-0.1, 1.1, 2.0]]))
        assert np.array_equal(warp(img, t, size=48), warp_reference(img, t.matrix, size=48))

    def test_intensity_linearity(self):
        rng = np.random.default_rng(5)
        img = rng.integers(0, 128, (64, 64)).astype(np.uint8)
        t = AffineTransform(np.array([[0.9, 0.1, 4.0], [0.0, 1.05, -3.0]]))
        a2 = warp((img * 2).astype(np.uint8), t, size=64).astype(int)
        twice = 2 * warp(img, t, size=64).astype(int)
        assert np.abs(a2 - twice).max() <= 2  # +-1 rounding on each side

    def test_non_invertible_rejected(self):
        with pytest.raises(DegenerateGeometryError):
            AffineTransform(np.array([[1.0, 0.0, 0.0], [2.0, 0.0, 0.0]]))


class TestRoiGrid:
    def test_default_grid_corners(self):
        g = roi_grid()
        assert g.roi == Rect(63, 63, 192, 192)
        # independent enumeration: 129/3 = 43 px blocks at x/y 63, 106, 149
        bounds = [63, 106, 149, 192]
        expected = [
            Rect(bounds[c], bounds[r], bounds[c + 1], bounds[r + 1])
            for r in range(3)
            for c in range(3)
        ]
        assert list(g.blocks) == expected

    def test_side_not_divisible_rejected(self):
        with pytest.raises(ConfigError):
            roi_grid((64, 64, 192, 192))  # side 128

    def test_divisible_variant_accepted(self):
        g = roi_grid((64, 64, 193, 193))  # side 129
        assert all(b.width == 43 and b.height == 43 for b in g.blocks)

    def test_full_frame_255(self):
        g = roi_grid((0, 0, 255, 255))
        assert all(b.width == 85 and b.height == 85 for b in g.blocks)

    def test_out_of_frame_rejected(self):
        with pytest.raises(ConfigError):
            roi_grid((200, 200, 260, 260))

    @settings(max_examples=30, deadline=None)
    @given(st.integers(0, 60), st.integers(0, 60), st.sampled_from([33, 63, 129, 192]))
    def test_tiling_partition(self, x0, y0, side):
        g = roi_grid((x0, y0, x0 + side, y0 + side))
        cover = np.zeros((256, 256), dtype=int)
        for b in g.blocks:
            cover[b.sl] += 1
        roi_mask = np.zeros((256, 256), dtype=bool)
        roi_mask[g.roi.sl] = True
        assert (cover[roi_mask] == 1).all()
        assert (cover[~roi_mask] == 0).all()

    def test_row_major_numbering(self):
        g = roi_grid()
        ys = [b.y0 for b in g.blocks]
        xs = [b.x0 for b in g.blocks]
        assert ys == sorted(ys)
        assert xs[:3] == sorted(xs[:3]) and xs[3:6] == sorted(xs[3:6])
