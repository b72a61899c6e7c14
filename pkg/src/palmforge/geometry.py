"""Keypoint-driven palm normalization and the ROI block grid.

A hand image is brought into a canonical 256x256 frame by a least-squares
affine transform fitted on four stable finger-base (MCP) landmarks. The
identity-bearing texture lives in a central ROI split into a 3x3 block grid.
"""

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, DegenerateGeometryError

FRAME_SIZE = 256

# MCP landmarks of index, middle, ring, pinky in the standard 21-point
# hand topology; the most gesture-stable quad.
REFERENCE_JOINTS = (5, 9, 13, 17)

# Canonical MCP positions: x spread over [64, 192], shallow arc centered on
# y=56 (middle/ring slightly higher than index/pinky, as on a real hand).
# Exactly collinear targets would make the least-squares affine singular.
DEFAULT_TARGETS = np.array(
    [[64.0, 58.0], [106.0, 54.0], [150.0, 54.0], [192.0, 58.0]]
)

DEFAULT_ROI = (63, 63, 192, 192)


@dataclass(frozen=True)
class HandKeyPoints:
    """21 detected hand landmarks in source-image pixel coordinates."""

    points: np.ndarray  # (21, 2) float64

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=np.float64)
        if pts.shape != (21, 2):
            raise ConfigError(f"expected 21 (x, y) keypoints, got shape {pts.shape}")
        if not np.isfinite(pts).all():
            raise ConfigError("keypoints contain non-finite coordinates")
        object.__setattr__(self, "points", pts)

    def reference(self, indices=REFERENCE_JOINTS) -> np.ndarray:
        if len(set(indices)) != len(indices):
            raise ConfigError(f"reference joint indices not distinct: {indices}")
        return self.points[list(indices)]


@dataclass(frozen=True)
class AffineTransform:
    """2x3 affine map, destination px per source px (row [a b tx; c d ty])."""

    matrix: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=np.float64)
        if m.shape != (2, 3):
            raise ConfigError(f"affine matrix must be 2x3, got {m.shape}")
        if abs(np.linalg.det(m[:, :2])) < 1e-12:
            raise DegenerateGeometryError("affine linear part is not invertible")
        object.__setattr__(self, "matrix", m)

    @classmethod
    def identity(cls) -> "AffineTransform":
        return cls(np.array([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0]]))

    def apply(self, points: np.ndarray) -> np.ndarray:
        """Map an (N, 2) array of (x, y) points."""
        pts = np.asarray(points, dtype=np.float64)
        return pts @ self.matrix[:, :2].T + self.matrix[:, 2]

    def inverse(self) -> "AffineTransform":
        lin = self.matrix[:, :2]
        inv = np.linalg.inv(lin)
        return AffineTransform(np.hstack([inv, -inv @ self.matrix[:, 2:]]))

    def compose(self, first: "AffineTransform") -> "AffineTransform":
        """Return the map equivalent to applying ``first`` then ``self``."""
        lin = self.matrix[:, :2] @ first.matrix[:, :2]
        off = self.matrix[:, :2] @ first.matrix[:, 2] + self.matrix[:, 2]
        return AffineTransform(np.hstack([lin, off[:, None]]))


def estimate_affine(
    kp: HandKeyPoints,
    targets: np.ndarray = DEFAULT_TARGETS,
    reference_indices=REFERENCE_JOINTS,
) -> AffineTransform:
    """Fit the least-squares affine sending the reference joints onto ``targets``.

    Raises DegenerateGeometryError when the reference joints are collinear
    (the fit is rank-deficient) or the fitted linear part is singular.
    """
    src = kp.reference(reference_indices)
    dst = np.asarray(targets, dtype=np.float64)
    if dst.shape != src.shape:
        raise ConfigError(f"targets shape {dst.shape} != reference shape {src.shape}")

    design = np.hstack([src, np.ones((len(src), 1))])
    coef, _, rank, _ = np.linalg.lstsq(design, dst, rcond=None)
    if rank < 3:
        raise DegenerateGeometryError("reference joints are collinear")
    return AffineTransform(coef.T)


def warp(src: np.ndarray, t: AffineTransform, size: int = FRAME_SIZE) -> np.ndarray:
    """Resample ``src`` into a size x size frame through ``t``.

    Every destination pixel is pulled from the source via the inverse map
    with bilinear interpolation; reads outside the source raster yield 0.
    """
    src = np.asarray(src, dtype=np.float64)
    inv = t.inverse().matrix

    xs, ys = np.meshgrid(np.arange(size, dtype=np.float64), np.arange(size, dtype=np.float64))
    sx = inv[0, 0] * xs + inv[0, 1] * ys + inv[0, 2]
    sy = inv[1, 0] * xs + inv[1, 1] * ys + inv[1, 2]

    x0 = np.floor(sx).astype(np.int64)
    y0 = np.floor(sy).astype(np.int64)
    fx = sx - x0
    fy = sy - y0

    h, w = src.shape
    out = np.zeros((size, size), dtype=np.float64)
    for dy in (0, 1):
        for dx in (0, 1):
            xi = x0 + dx
            yi = y0 + dy
            valid = (xi >= 0) & (xi < w) & (yi >= 0) & (yi < h)
            weight = (fx if dx else 1.0 - fx) * (fy if dy else 1.0 - fy)
            sample = np.zeros_like(out)
            sample[valid] = src[yi[valid], xi[valid]]
            out += weight * sample

    return np.clip(np.rint(out), 0, 255).astype(np.uint8)


@dataclass(frozen=True)
class Rect:
    """Axis-aligned rectangle with half-open bounds [x0, x1) x [y0, y1)."""

    x0: int
    y0: int
    x1: int
    y1: int

    @property
    def width(self) -> int:
        return self.x1 - self.x0

    @property
    def height(self) -> int:
        return self.y1 - self.y0

    @property
    def sl(self) -> tuple[slice, slice]:
        """Numpy index for arr[rect.sl]."""
        return slice(self.y0, self.y1), slice(self.x0, self.x1)


@dataclass(frozen=True)
class RoiGrid:
    """ROI rectangle plus its 9 row-major blocks (positions 1..9, stored 0..8)."""

    roi: Rect
    blocks: tuple[Rect, ...]


def roi_grid(roi=DEFAULT_ROI, frame_size: int = FRAME_SIZE) -> RoiGrid:
    """Build the 3x3 block grid for an ROI given as (x0, y0, x1, y1)."""
    rect = Rect(*(int(v) for v in roi))
    if not (0 <= rect.x0 < rect.x1 <= frame_size and 0 <= rect.y0 < rect.y1 <= frame_size):
        raise ConfigError(f"ROI {roi} does not fit the {frame_size}x{frame_size} frame")
    if rect.width % 3 or rect.height % 3:
        raise ConfigError(f"ROI sides {rect.width}x{rect.height} not divisible by 3")

    bw = rect.width // 3
    bh = rect.height // 3
    blocks = tuple(
        Rect(rect.x0 + col * bw, rect.y0 + row * bh,
             rect.x0 + (col + 1) * bw, rect.y0 + (row + 1) * bh)
        for row in range(3)
        for col in range(3)
    )
    return RoiGrid(roi=rect, blocks=blocks)
