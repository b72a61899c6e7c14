"""From-scratch Canny edge detection.

Produces the binary texture map that conditions the palm renderer. The
stage breakdown (smooth -> Sobel -> non-max suppression -> hysteresis) is
classic; thresholds follow the intensity-scale convention below.

Threshold convention: the configured thresholds are compared against the
Sobel magnitude divided by 4, so a full 0->255 step registers as ~255 and
the defaults (high=30, low=5) behave like intensity deltas.
"""

import math
from collections import deque
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError

SOBEL_SCALE = 4.0  # max |response| of the 3x3 Sobel kernel per unit step

_TAN_22_5 = math.tan(math.radians(22.5))


@dataclass(frozen=True)
class CannyConfig:
    high_threshold: float = 30.0
    low_threshold: float = 5.0
    gaussian_sigma: float = 1.4

    def __post_init__(self):
        if not (0 < self.low_threshold <= self.high_threshold):
            raise ConfigError(
                f"need 0 < low <= high, got low={self.low_threshold} "
                f"high={self.high_threshold}"
            )
        if self.gaussian_sigma <= 0:
            raise ConfigError(f"sigma must be positive, got {self.gaussian_sigma}")


def gaussian_kernel(sigma: float) -> np.ndarray:
    """Normalized 1-D Gaussian taps with radius ceil(3*sigma)."""
    radius = math.ceil(3.0 * sigma)
    xs = np.arange(-radius, radius + 1, dtype=np.float64)
    k = np.exp(-(xs * xs) / (2.0 * sigma * sigma))
    return k / k.sum()


def gaussian_smooth(img: np.ndarray, sigma: float) -> np.ndarray:
    """Separable Gaussian blur; borders handled by clamping coordinates."""
    if sigma <= 0:
        raise ConfigError(f"sigma must be positive, got {sigma}")
    k = gaussian_kernel(sigma)
    radius = len(k) // 2
    out = np.asarray(img, dtype=np.float64)
    padded = np.pad(out, ((radius, radius), (0, 0)), mode="edge")
    out = sum(k[i] * padded[i : i + img.shape[0], :] for i in range(len(k)))
    padded = np.pad(out, ((0, 0), (radius, radius)), mode="edge")
    out = sum(k[i] * padded[:, i : i + img.shape[1]] for i in range(len(k)))
    return out


def sobel_gradients(img: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """3x3 Sobel gradient magnitude and quantized orientation.

    Magnitude is unnormalized (a 0->255 step peaks at 1020). Orientation is
    the gradient direction snapped to {0, 45, 90, 135} degrees in image
    coordinates (y down); the 1-px border is zeroed to avoid clamped-kernel
    artifacts.
    """
    a = np.asarray(img, dtype=np.float64)
    gx = np.zeros_like(a)
    gy = np.zeros_like(a)
    # [-1 0 1; -2 0 2; -1 0 1] and its transpose, via shifted slices
    c = a[1:-1, :]
    u = a[:-2, :]
    d = a[2:, :]
    gx[1:-1, 1:-1] = (
        (u[:, 2:] - u[:, :-2]) + 2.0 * (c[:, 2:] - c[:, :-2]) + (d[:, 2:] - d[:, :-2])
    )
    gy[1:-1, 1:-1] = (
        (d[:, :-2] - u[:, :-2]) + 2.0 * (d[:, 1:-1] - u[:, 1:-1]) + (d[:, 2:] - u[:, 2:])
    )

    mag = np.sqrt(gx * gx + gy * gy)

    ax = np.abs(gx)
    ay = np.abs(gy)
    orient = np.full(a.shape, 45, dtype=np.uint8)
    orient[ay <= ax * _TAN_22_5] = 0
    orient[ax <= ay * _TAN_22_5] = 90
    diag = (orient == 45)
    orient[diag & (gx * gy < 0)] = 135
    return mag, orient


# (forward, backward) neighbor offsets per quantized direction; the
# backward side is compared strictly so an exactly-tied plateau keeps
# exactly one pixel (the backward-most), keeping ridges 1 px thin
_NEIGHBOR_OFFSETS = {
    0: ((0, 1), (0, -1)),      # horizontal gradient: compare left/right
    45: ((1, 1), (-1, -1)),    # down-right / up-left (y down)
    90: ((1, 0), (-1, 0)),     # vertical gradient: compare up/down
    135: ((1, -1), (-1, 1)),
}


def _shifted(mag: np.ndarray, dy: int, dx: int) -> np.ndarray:
    """mag sampled at (y+dy, x+dx), zero outside the frame."""
    out = np.zeros_like(mag)
    h, w = mag.shape
    ys = slice(max(0, -dy), min(h, h - dy))
    xs = slice(max(0, -dx), min(w, w - dx))
    out[ys, xs] = mag[slice(ys.start + dy, ys.stop + dy), slice(xs.start + dx, xs.stop + dx)]
    return out


def non_max_suppress(mag: np.ndarray, orient: np.ndarray) -> np.ndarray:
    """Zero every pixel that is not the local maximum along its quantized
    gradient direction.

    A pixel survives iff it is >= the forward neighbor and strictly > the
    backward neighbor, so strict crests always survive and exact ties keep
    only one pixel of the run.
    """
    if mag.shape != orient.shape:
        raise ConfigError(f"shape mismatch: {mag.shape} vs {orient.shape}")
    keep = np.zeros(mag.shape, dtype=bool)
    for angle, ((fy, fx), (by, bx)) in _NEIGHBOR_OFFSETS.items():
        sel = orient == angle
        ok = (mag >= _shifted(mag, fy, fx)) & (mag > _shifted(mag, by, bx))
        keep |= sel & ok
    return np.where(keep, mag, 0.0)


def hysteresis(thinned: np.ndarray, low: float, high: float) -> np.ndarray:
    """Two-threshold edge retention, 8-connected.

    Pixels >= high are kept; pixels in [low, high) survive only when an
    8-connected chain of pixels >= low links them to a kept strong pixel.
    Returns a {0,1} uint8 edge map.
    """
    if low > high:
        raise ConfigError(f"need low <= high, got low={low} high={high}")
    mask = thinned >= low
    kept = thinned >= high
    h, w = thinned.shape

    queue = deque(zip(*np.nonzero(kept)))
    while queue:
        y, x = queue.popleft()
        for dy in (-1, 0, 1):
            ny = y + dy
            if ny < 0 or ny >= h:
                continue
            for dx in (-1, 0, 1):
                nx = x + dx
                if nx < 0 or nx >= w:
                    continue
                if mask[ny, nx] and not kept[ny, nx]:
                    kept[ny, nx] = True
                    queue.append((ny, nx))
    return kept.astype(np.uint8)


def canny(img: np.ndarray, cfg: CannyConfig = CannyConfig()) -> np.ndarray:
    """Full detector: returns a {0,1} uint8 edge map of the input's shape."""
    smoothed = gaussian_smooth(img, cfg.gaussian_sigma)
    mag, orient = sobel_gradients(smoothed)
    thinned = non_max_suppress(mag, orient)
    return hysteresis(thinned / SOBEL_SCALE, cfg.low_threshold, cfg.high_threshold)
