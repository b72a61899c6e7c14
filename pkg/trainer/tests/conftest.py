import numpy as np
import pytest
from PIL import Image


def box_blur(arr, k=5):
    pad = k // 2
    padded = np.pad(arr, pad, mode="edge")
    out = np.zeros_like(arr, dtype=np.float64)
    for dy in range(k):
        for dx in range(k):
            out += padded[dy : dy + arr.shape[0], dx : dx + arr.shape[1]]
    return out / (k * k)


def build_toy_pairs(root, count, size=256, seed=0):
    """Aligned (edge, palm) pairs: random curves, palm = field darkened
    around the curves. Layout matches the synthesis pipeline's output."""
    rng = np.random.default_rng(seed)
    root.mkdir(parents=True, exist_ok=True)
    for i in range(count):
        edge = np.zeros((size, size), np.uint8)
        for _ in range(6):
            xs = np.arange(size)
            ys = (rng.uniform(0.15, 0.85) * size
                  + rng.uniform(3, size / 5) * np.sin(xs / rng.uniform(10, 40))).astype(int)
            ok = (ys >= 0) & (ys < size)
            edge[ys[ok], xs[ok]] = 1
        palm = np.clip(np.rint(230 - 180 * box_blur(edge.astype(float), 5)), 0, 255).astype(np.uint8)
        Image.fromarray(edge * 255, mode="L").save(root / f"p{i:03d}_edge.png")
        Image.fromarray(palm, mode="L").save(root / f"p{i:03d}.png")
    return root


@pytest.fixture(scope="session")
def toy_pairs_64(tmp_path_factory):
    return build_toy_pairs(tmp_path_factory.mktemp("pairs64"), count=12, size=64, seed=1)


@pytest.fixture(scope="session")
def toy_pairs_256(tmp_path_factory):
    return build_toy_pairs(tmp_path_factory.mktemp("pairs256"), count=50, size=256, seed=2)
