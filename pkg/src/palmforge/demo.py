"""Synthetic demo corpus: seeded hand images plus keypoint sidecar.

Generates identity-consistent fake hands so the full pipeline can run
without real data: each identity owns a fixed palm-line texture defined in
the canonical frame; each gesture re-poses it through a random similarity
transform, jitters the fingers, and relights the scene.
"""

import math
from pathlib import Path

import numpy as np

from .fileio import save_gray, write_keypoint_sidecar
from .geometry import AffineTransform

SOURCE_SIZE = 400

# Canonical 21-landmark template (x, y), MCPs of index/middle/ring/pinky at
# rows 5, 9, 13, 17: placed exactly on the normalization targets.
HAND_TEMPLATE = np.array([
    [128.0, 235.0],                                             # wrist
    [76.0, 215.0], [52.0, 192.0], [38.0, 168.0], [30.0, 146.0],  # thumb
    [64.0, 58.0], [60.0, 36.0], [58.0, 19.0], [56.0, 5.0],       # index
    [106.0, 54.0], [105.0, 30.0], [104.0, 13.0], [103.0, 2.0],   # middle
    [150.0, 54.0], [152.0, 31.0], [153.0, 15.0], [154.0, 3.0],   # ring
    [192.0, 58.0], [198.0, 40.0], [202.0, 26.0], [205.0, 14.0],  # pinky
])

FINGER_CHAINS = [
    (0, 1, 2, 3, 4),        # thumb, anchored at the wrist
    (5, 6, 7, 8),
    (9, 10, 11, 12),
    (13, 14, 15, 16),
    (17, 18, 19, 20),
]

PALM_CENTER = (128.0, 148.0)
PALM_AXES = (74.0, 94.0)


def _identity_texture(rng: np.random.Generator) -> np.ndarray:
    """Canonical 256x256 darkening map: principal lines plus fine wrinkles."""
    tex = np.zeros((256, 256), dtype=np.float64)
    curves = [(55.0, 2.2)] * 3 + [(25.0, 1.2)] * 5
    for depth, radius in curves:
        ctrl = rng.uniform((62, 74), (194, 204), size=(3, 2))
        ts = np.linspace(0.0, 1.0, 400)[:, None]
        pts = ((1 - ts) ** 2) * ctrl[0] + 2 * ts * (1 - ts) * ctrl[1] + (ts ** 2) * ctrl[2]
        r = int(math.ceil(radius))
        for dy in range(-r, r + 1):
            for dx in range(-r, r + 1):
                falloff = 1.0 - (dx * dx + dy * dy) / (radius * radius + 1.0)
                if falloff <= 0:
                    continue
                xs = np.clip(np.rint(pts[:, 0]).astype(int) + dx, 0, 255)
                ys = np.clip(np.rint(pts[:, 1]).astype(int) + dy, 0, 255)
                np.maximum.at(tex, (ys, xs), depth * falloff)
    return tex


def _segment_distance(px, py, a, b):
    """Distance from grid points (px, py) to segment a-b."""
    ax, ay = a
    bx, by = b
    vx, vy = bx - ax, by - ay
    denom = vx * vx + vy * vy
    if denom < 1e-9:
        return np.hypot(px - ax, py - ay)
    t = np.clip(((px - ax) * vx + (py - ay) * vy) / denom, 0.0, 1.0)
    return np.hypot(px - (ax + t * vx), py - (ay + t * vy))


def _pose_keypoints(rng: np.random.Generator) -> tuple[np.ndarray, AffineTransform]:
    """Random similarity canonical->source plus per-gesture finger jitter."""
    theta = math.radians(rng.uniform(-12.0, 12.0))
    scale = rng.uniform(1.0, 1.25)
    tx, ty = rng.uniform(-15.0, 15.0, size=2)
    c, s = scale * math.cos(theta), scale * math.sin(theta)
    cx = SOURCE_SIZE / 2.0 + tx - (c * 128.0 - s * 128.0)
    cy = SOURCE_SIZE / 2.0 + ty - (s * 128.0 + c * 128.0)
    transform = AffineTransform(np.array([[c, -s, cx], [s, c, cy]]))

    posed = HAND_TEMPLATE.copy()
    for chain in FINGER_CHAINS:
        pivot = posed[chain[0]]
        ang = math.radians(rng.uniform(-8.0, 8.0))
        ca, sa = math.cos(ang), math.sin(ang)
        rot = np.array([[ca, -sa], [sa, ca]])
        for idx in chain[1:]:
            posed[idx] = pivot + rot @ (posed[idx] - pivot)
    return posed, transform


def _render_hand(posed_kp, transform, texture, rng):
    """Draw the hand in the 400x400 source frame."""
    xs, ys = np.meshgrid(np.arange(SOURCE_SIZE, dtype=np.float64),
                         np.arange(SOURCE_SIZE, dtype=np.float64))
    inv = transform.inverse().matrix
    can_x = inv[0, 0] * xs + inv[0, 1] * ys + inv[0, 2]
    can_y = inv[1, 0] * xs + inv[1, 1] * ys + inv[1, 2]

    (pcx, pcy), (pax, pay) = PALM_CENTER, PALM_AXES
    hand = ((can_x - pcx) / pax) ** 2 + ((can_y - pcy) / pay) ** 2 <= 1.0

    src_kp = transform.apply(posed_kp)
    scale = math.hypot(transform.matrix[0, 0], transform.matrix[1, 0])
    width = 11.0 * scale  # finger half-width, canonical px -> source px
    for chain in FINGER_CHAINS:
        for a, b in zip(chain[:-1], chain[1:]):
            d = _segment_distance(xs, ys, src_kp[a], src_kp[b])
            hand |= d <= width

    grad_dir = rng.uniform(0.0, 2.0 * math.pi)
    shade = 20.0 * ((xs * math.cos(grad_dir) + ys * math.sin(grad_dir)) / SOURCE_SIZE - 0.5)
    noise = rng.normal(0.0, 2.0, size=(SOURCE_SIZE, SOURCE_SIZE))

    # sample the identity texture at canonical coords (nearest neighbour)
    ix = np.clip(np.rint(can_x).astype(int), 0, 255)
    iy = np.clip(np.rint(can_y).astype(int), 0, 255)
    darkening = np.where(hand, texture[iy, ix], 0.0)

    img = np.where(hand, 185.0 + shade, 45.0 + 0.5 * shade) - darkening + noise
    return np.clip(np.rint(img), 0, 255).astype(np.uint8)


def build_demo_corpus(root, n_identities: int = 9, gestures_per_identity: int = 5,
                      seed: int = 7) -> Path:
    """Write ``{root}/id{i:02d}/g{j}.png`` images and ``keypoints.csv``.

    Returns the sidecar path. Fully deterministic for a given seed.
    """
    root = Path(root)
    sidecar: dict[str, np.ndarray] = {}
    for ident in range(n_identities):
        tex_rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(ident,)))
        texture = _identity_texture(tex_rng)
        for gesture in range(gestures_per_identity):
            g_rng = np.random.default_rng(
                np.random.SeedSequence(seed, spawn_key=(ident, gesture))
            )
            posed, transform = _pose_keypoints(g_rng)
            img = _render_hand(posed, transform, texture, g_rng)
            rel = f"id{ident:02d}/g{gesture}.png"
            save_gray(root / rel, img)
            sidecar[rel] = transform.apply(posed)
    sidecar_path = root / "keypoints.csv"
    write_keypoint_sidecar(sidecar_path, sidecar)
    return sidecar_path
