"""Raster and sidecar file I/O.

Grayscale rasters travel as 8-bit ``L`` PNGs; edge maps as 1-bit PNGs
(0/255 on disk, {0,1} uint8 in memory).
"""

from pathlib import Path

import numpy as np
from PIL import Image

from .errors import StageError


def load_gray(path) -> np.ndarray:
    """Load an 8-bit grayscale PNG as a (H, W) uint8 array."""
    with Image.open(path) as im:
        if im.mode != "L":
            im = im.convert("L")
        return np.asarray(im, dtype=np.uint8)


def save_gray(path, img: np.ndarray) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    arr = np.asarray(img)
    if arr.dtype != np.uint8:
        arr = np.clip(np.rint(arr), 0, 255).astype(np.uint8)
    Image.fromarray(arr, mode="L").save(path, format="PNG")


def load_edge(path) -> np.ndarray:
    """Load an edge-map PNG into a {0,1} uint8 array."""
    with Image.open(path) as im:
        if im.mode == "1":
            return np.asarray(im, dtype=bool).astype(np.uint8)
        if im.mode != "L":
            im = im.convert("L")
        arr = np.asarray(im, dtype=np.uint8)
    values = np.unique(arr)
    if not np.isin(values, (0, 255)).all():
        raise StageError("io", f"{path}: edge PNG carries values other than 0/255")
    return (arr > 0).astype(np.uint8)


def save_edge(path, edge: np.ndarray) -> None:
    """Write a {0,1} edge map as a 1-bit PNG."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    Image.fromarray(np.asarray(edge, dtype=bool)).save(path, format="PNG")


def read_keypoint_sidecar(path) -> dict[str, np.ndarray]:
    """Parse the keypoint sidecar: ``image_path, x0,y0, ..., x20,y20`` per line.

    Returns {image_path: (21, 2) float64 array}; blank lines are skipped.
    """
    records = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            fields = [f.strip() for f in line.split(",")]
            if len(fields) != 1 + 42:
                raise StageError(
                    "io", f"{path}:{lineno}: expected 43 fields, got {len(fields)}"
                )
            try:
                coords = np.array([float(v) for v in fields[1:]], dtype=np.float64)
            except ValueError as exc:
                raise StageError("io", f"{path}:{lineno}: {exc}") from exc
            records[fields[0]] = coords.reshape(21, 2)
    return records


def write_keypoint_sidecar(path, records: dict[str, np.ndarray]) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as fh:
        for image_path, pts in records.items():
            flat = ",".join(f"{v:.4f}" for v in np.asarray(pts).reshape(-1))
            fh.write(f"{image_path},{flat}\n")
