"""Pre-training augmentations: border cutout plus the basic photometric
and geometric set (brightness, contrast, rotation, motion blur).

Every random draw is returned to the caller so a manifest can replay it;
given the same rng stream and config the output is byte-identical.
"""

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import ConfigError
from .geometry import AffineTransform, warp

BORDERS = ("top", "bottom", "left", "right")


@dataclass(frozen=True)
class CutoutConfig:
    probability: float = 0.5   # per border
    fill: int = 0

    def __post_init__(self):
        if not 0.0 <= self.probability <= 1.0:
            raise ConfigError(f"probability out of [0,1]: {self.probability}")
        if not 0 <= self.fill <= 255:
            raise ConfigError(f"fill out of [0,255]: {self.fill}")


@dataclass(frozen=True)
class CutoutSpec:
    """Depth in px per border; 0 means the border was not cut."""

    top: int = 0
    bottom: int = 0
    left: int = 0
    right: int = 0
    fill: int = 0

    def as_dict(self) -> dict:
        return {"top": self.top, "bottom": self.bottom, "left": self.left,
                "right": self.right, "fill": self.fill}


def max_cut_depth(shape: tuple[int, int], border: str) -> int:
    """Deepest cut keeping one border's area at most 1/4 of the image."""
    h, w = shape
    quarter = (h * w) // 4
    return quarter // w if border in ("top", "bottom") else quarter // h


def sample_cutout_spec(shape: tuple[int, int], rng: np.random.Generator,
                       cfg: CutoutConfig = CutoutConfig()) -> CutoutSpec:
    """Draw per-border applied flags and depths (uniform over [1, max])."""
    depths = {}
    for border in BORDERS:
        applied = rng.random() < cfg.probability
        if applied:
            depths[border] = int(rng.integers(1, max_cut_depth(shape, border) + 1))
        else:
            depths[border] = 0
    return CutoutSpec(fill=cfg.fill, **depths)


def apply_cutout(img: np.ndarray, spec: CutoutSpec) -> np.ndarray:
    out = img.copy()
    if spec.top:
        out[: spec.top, :] = spec.fill
    if spec.bottom:
        out[out.shape[0] - spec.bottom :, :] = spec.fill
    if spec.left:
        out[:, : spec.left] = spec.fill
    if spec.right:
        out[:, out.shape[1] - spec.right :] = spec.fill
    return out


def border_cutout(img: np.ndarray, rng: np.random.Generator,
                  cfg: CutoutConfig = CutoutConfig()) -> tuple[np.ndarray, CutoutSpec]:
    spec = sample_cutout_spec(img.shape, rng, cfg)
    return apply_cutout(img, spec), spec


@dataclass(frozen=True)
class AugmentConfig:
    """Ranges for the basic augmentations; None disables one entirely."""

    brightness: Optional[tuple[float, float]] = None   # additive, intensity units
    contrast: Optional[tuple[float, float]] = None     # gain about 128
    rotation: Optional[tuple[float, float]] = None     # degrees about the center
    motion_blur: Optional[tuple[int, int]] = None      # kernel length in px
    cutout: Optional[CutoutConfig] = None

    def __post_init__(self):
        for name in ("brightness", "contrast", "rotation", "motion_blur"):
            rng_pair = getattr(self, name)
            if rng_pair is not None and rng_pair[0] > rng_pair[1]:
                raise ConfigError(f"{name} range reversed: {rng_pair}")
        if self.motion_blur is not None and self.motion_blur[0] < 1:
            raise ConfigError(f"motion blur length must be >= 1: {self.motion_blur}")


def _rotate(img: np.ndarray, degrees: float) -> np.ndarray:
    """Rotate about the raster center; bilinear, out-of-frame reads are 0."""
    h, w = img.shape
    cy, cx = (h - 1) / 2.0, (w - 1) / 2.0
    rad = math.radians(degrees)
    c, s = math.cos(rad), math.sin(rad)
    # dest = R (src - center) + center
    t = AffineTransform(np.array([
        [c, -s, cx - c * cx + s * cy],
        [s, c, cy - s * cx - c * cy],
    ]))
    return warp(img, t, size=h)


def _motion_blur(img: np.ndarray, length: int, angle_deg: float) -> np.ndarray:
    """Average along a line of ``length`` px at ``angle_deg``; borders clamp."""
    if length <= 1:
        return img.copy()
    rad = math.radians(angle_deg)
    dx, dy = math.cos(rad), math.sin(rad)
    half = (length - 1) / 2.0
    offsets = [
        (int(round(dy * (k - half))), int(round(dx * (k - half))))
        for k in range(length)
    ]
    h, w = img.shape
    pad = length  # generous; offsets never exceed it
    padded = np.pad(np.asarray(img, dtype=np.float64), pad, mode="edge")
    acc = np.zeros((h, w), dtype=np.float64)
    for oy, ox in offsets:
        acc += padded[pad + oy : pad + oy + h, pad + ox : pad + ox + w]
    out = acc / len(offsets)
    return np.clip(np.rint(out), 0, 255).astype(np.uint8)


def basic_augs(img: np.ndarray, rng: np.random.Generator,
               cfg: AugmentConfig = AugmentConfig()) -> tuple[np.ndarray, dict]:
    """Apply the enabled subset in fixed order (brightness -> contrast ->
    rotation -> motion blur -> cutout); returns (image, draws)."""
    out = np.asarray(img, dtype=np.uint8)
    draws: dict = {}

    if cfg.brightness is not None:
        b = float(rng.uniform(*cfg.brightness))
        draws["brightness"] = b
        out = np.clip(np.rint(out.astype(np.float64) + b), 0, 255).astype(np.uint8)

    if cfg.contrast is not None:
        gain = float(rng.uniform(*cfg.contrast))
        draws["contrast"] = gain
        out = np.clip(np.rint((out.astype(np.float64) - 128.0) * gain + 128.0), 0, 255).astype(np.uint8)

    if cfg.rotation is not None:
        deg = float(rng.uniform(*cfg.rotation))
        draws["rotation_deg"] = deg
        out = _rotate(out, deg)

    if cfg.motion_blur is not None:
        lo, hi = cfg.motion_blur
        length = int(rng.integers(lo, hi + 1))
        angle = float(rng.uniform(0.0, 180.0))
        draws["motion_blur_len"] = length
        draws["motion_blur_angle"] = angle
        out = _motion_blur(out, length, angle)

    if cfg.cutout is not None:
        out, spec = border_cutout(out, rng, cfg.cutout)
        draws["cutout"] = spec.as_dict()

    return out, draws
