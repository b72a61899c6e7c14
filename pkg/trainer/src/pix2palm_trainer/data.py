"""Paired (edge, palm) dataset.

Two on-disk layouts are accepted, both produced by the upstream synthesis
pipeline:

- sibling files: ``{stem}_edge.png`` next to ``{stem}.png``;
- split roots: edges under one tree and palms under another with matching
  relative paths (e.g. the pipeline's ``assembled/`` and ``rendered/``
  stage directories).

Edges are 0/255 PNGs; palms 8-bit grayscale; both must be the configured
square size. Tensors are scaled to [-1, 1].
"""

from pathlib import Path

import numpy as np
import torch
from PIL import Image
from torch.utils.data import Dataset

EDGE_SUFFIX = "_edge.png"


class PairSpecError(ValueError):
    """A discovered pair violates the size or format contract."""


def _load_float(path, expect_size) -> np.ndarray:
    with Image.open(path) as im:
        if im.mode == "1":
            arr = np.asarray(im, dtype=bool).astype(np.float32) * 255.0
        else:
            if im.mode != "L":
                im = im.convert("L")
            arr = np.asarray(im, dtype=np.float32)
    if arr.shape != (expect_size, expect_size):
        raise PairSpecError(f"{path}: expected {expect_size}x{expect_size}, got {arr.shape}")
    return arr


def discover_pairs(root, palms_root=None) -> list[tuple[Path, Path]]:
    root = Path(root)
    pairs = []
    for edge_path in sorted(root.rglob(f"*{EDGE_SUFFIX}")):
        stem = edge_path.name[: -len(EDGE_SUFFIX)]
        if palms_root is None:
            palm_path = edge_path.with_name(stem + ".png")
        else:
            rel = edge_path.relative_to(root).with_name(stem + ".png")
            palm_path = Path(palms_root) / rel
        if palm_path.exists():
            pairs.append((edge_path, palm_path))
    return pairs


class PairDataset(Dataset):
    def __init__(self, root, image_size: int = 256, palms_root=None):
        self.image_size = image_size
        self.pairs = discover_pairs(root, palms_root)
        if not self.pairs:
            raise PairSpecError(f"no (*_edge.png, *.png) pairs under {root}")

    def __len__(self):
        return len(self.pairs)

    def __getitem__(self, idx):
        edge_path, palm_path = self.pairs[idx]
        edge = _load_float(edge_path, self.image_size) / 255.0          # {0,1}
        palm = _load_float(palm_path, self.image_size) / 127.5 - 1.0    # [-1,1]
        condition = torch.from_numpy(edge * 2.0 - 1.0).unsqueeze(0)
        target = torch.from_numpy(palm).unsqueeze(0)
        return condition, target
