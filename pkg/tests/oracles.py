"""Independent reference implementations used to cross-check the package.

Everything here is deliberately written the slow, obvious way (scalar
loops, library flood fill) and shares no code with the implementations it
verifies.
"""

import numpy as np
from scipy import ndimage


def warp_reference(src, matrix, size=256):
    """Scalar per-pixel inverse-mapped bilinear warp; OOB reads are 0."""
    src = np.asarray(src, dtype=np.float64)
    h, w = src.shape
    full = np.vstack([matrix, [0.0, 0.0, 1.0]])
    inv = np.linalg.inv(full)
    out = np.zeros((size, size), dtype=np.float64)

    def sample(y, x):
        if 0 <= y < h and 0 <= x < w:
            return src[y, x]
        return 0.0

    for dy in range(size):
        for dx in range(size):
            sx = inv[0, 0] * dx + inv[0, 1] * dy + inv[0, 2]
            sy = inv[1, 0] * dx + inv[1, 1] * dy + inv[1, 2]
            x0, y0 = int(np.floor(sx)), int(np.floor(sy))
            fx, fy = sx - x0, sy - y0
            v = (sample(y0, x0) * (1 - fx) * (1 - fy)
                 + sample(y0, x0 + 1) * fx * (1 - fy)
                 + sample(y0 + 1, x0) * (1 - fx) * fy
                 + sample(y0 + 1, x0 + 1) * fx * fy)
            out[dy, dx] = v
    return np.clip(np.rint(out), 0, 255).astype(np.uint8)


def nms_reference(mag, orient):
    """Scalar non-max suppression mirroring the documented tie rule."""
    offsets = {
        0: ((0, 1), (0, -1)),
        45: ((1, 1), (-1, -1)),
        90: ((1, 0), (-1, 0)),
        135: ((1, -1), (-1, 1)),
    }
    h, w = mag.shape
    out = np.zeros_like(mag)
    for y in range(h):
        for x in range(w):
            (fy, fx), (by, bx) = offsets[int(orient[y, x])]

            def val(yy, xx):
                return mag[yy, xx] if 0 <= yy < h and 0 <= xx < w else 0.0

            if mag[y, x] >= val(y + fy, x + fx) and mag[y, x] > val(y + by, x + bx):
                out[y, x] = mag[y, x]
    return out


def hysteresis_reference(thinned, low, high):
    """Flood fill via connected-component labeling: keep every 8-connected
    component of the >=low mask that contains a >=high pixel."""
    mask = thinned >= low
    labels, n = ndimage.label(mask, structure=np.ones((3, 3), dtype=int))
    strong_labels = np.unique(labels[thinned >= high])
    strong_labels = strong_labels[strong_labels != 0]
    return np.isin(labels, strong_labels).astype(np.uint8)


def assemble_reference(spec, lib, grid):
    """Per-pixel provenance: each pixel is looked up independently through
    the block-containment rule, then the whole frame is mirrored if flipped."""
    bg = lib.get(*spec.background)
    h, w = bg.shape
    out = np.empty((h, w), dtype=bg.dtype)
    for y in range(h):
        for x in range(w):
            source = bg
            for pos, rect in enumerate(grid.blocks):
                if rect.x0 <= x < rect.x1 and rect.y0 <= y < rect.y1:
                    source = lib.get(spec.combination.identities[pos],
                                     spec.block_gestures[pos])
                    break
            out[y, x] = source[y, x]
    if spec.flip:
        out = out[:, ::-1].copy()
    return out


def provenance_index_map(grid, shape=(256, 256)):
    """-1 for background pixels, block position 0..8 otherwise."""
    idx = np.full(shape, -1, dtype=np.int8)
    for pos, rect in enumerate(grid.blocks):
        idx[rect.y0:rect.y1, rect.x0:rect.x1] = pos
    return idx
