import pytest
import torch

from pix2palm_trainer import PatchDiscriminator, UNetGenerator


class TestGenerator:
    def test_output_shape_matches_input(self):
        g = UNetGenerator(base_channels=8, num_downs=8)
        x = torch.randn(2, 1, 256, 256)
        assert g(x).shape == (2, 1, 256, 256)

    def test_smaller_frame_variant(self):
        g = UNetGenerator(base_channels=8, num_downs=6)
        assert g(torch.randn(1, 1, 64, 64)).shape == (1, 1, 64, 64)

    def test_output_bounded(self):
        g = UNetGenerator(base_channels=8, num_downs=6)
        y = g(torch.randn(1, 1, 64, 64))
        assert y.min() >= -1.0 and y.max() <= 1.0

    def test_eval_mode_deterministic(self):
        # no stochastic layer is active at eval: identical bytes for
        # identical conditions (noise-free conditioning)
        g = UNetGenerator(base_channels=8, num_downs=6).eval()
        x = torch.randn(1, 1, 64, 64)
        with torch.no_grad():
            a, b = g(x), g(x)
        assert torch.equal(a, b)

    def test_conditioning_is_live(self):
        g = UNetGenerator(base_channels=8, num_downs=6).eval()
        x1 = torch.full((1, 1, 64, 64), -1.0)
        x2 = x1.clone()
        x2[0, 0, 20:40, 20:40] = 1.0
        with torch.no_grad():
            assert not torch.equal(g(x1), g(x2))

    def test_condition_is_the_only_input(self):
        import inspect
        params = list(inspect.signature(UNetGenerator.forward).parameters)
        assert params == ["self", "condition"]

    def test_too_shallow_rejected(self):
        with pytest.raises(ValueError):
            UNetGenerator(num_downs=4)


class TestDiscriminator:
    def test_patch_output(self):
        d = PatchDiscriminator(base_channels=8)
        score = d(torch.randn(2, 1, 256, 256), torch.randn(2, 1, 256, 256))
        assert score.shape[0] == 2 and score.shape[1] == 1
        assert 1 < score.shape[2] < 256  # patch map, not a scalar and not dense

    def test_pair_conditioning(self):
        d = PatchDiscriminator(base_channels=8).eval()
        x = torch.randn(1, 1, 64, 64)
        y1 = torch.randn(1, 1, 64, 64)
        y2 = y1 + 0.5
        with torch.no_grad():
            assert not torch.equal(d(x, y1), d(x, y2))
