"""Edge-map to palm-image rendering.

Two backends share one contract (256x256 8-bit grayscale out):

- ``pseudo``: a deterministic stand-in: blurred edges darken a flat
  skin tone. Keeps the pipeline fully testable without a trained model.
- ``external``: a file-protocol client for a separately running generator
  process (typically a learned image-to-image model).

External protocol, bit-exact:
  input dir:  ``batch.json`` = [{"request_id", "edge_path"}] next to the
              referenced edge PNGs (1-channel, 0/255; edge_path relative
              to the input dir).
  output dir: per request ``{request_id}.png`` (8-bit grayscale 256x256)
              plus an empty ``{request_id}.done`` marker; failures emit
              ``{request_id}.err`` with a UTF-8 message instead.
"""

import json
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image

from .edges import gaussian_smooth
from .errors import ConfigError, RenderProtocolError
from .fileio import load_edge, save_edge

FRAME_SIZE = 256


@dataclass(frozen=True)
class PseudoRendererConfig:
    base_intensity: int = 200    # flat skin tone
    edge_gain: int = 140         # darkening applied at full edge response
    blur_sigma: float = 1.0

    def __post_init__(self):
        if not 0 <= self.base_intensity <= 255:
            raise ConfigError(f"base_intensity out of range: {self.base_intensity}")
        if self.blur_sigma <= 0:
            raise ConfigError(f"blur_sigma must be positive: {self.blur_sigma}")


def render_pseudo(edge: np.ndarray, cfg: PseudoRendererConfig = PseudoRendererConfig()) -> np.ndarray:
    """clamp(base - gain * blur(edge)): darker where edges are denser."""
    response = gaussian_smooth(np.asarray(edge, dtype=np.float64), cfg.blur_sigma)
    out = cfg.base_intensity - cfg.edge_gain * response
    return np.clip(np.rint(out), 0, 255).astype(np.uint8)


@dataclass(frozen=True)
class RenderRequest:
    edge: np.ndarray
    request_id: str


@dataclass(frozen=True)
class ExternalRendererConfig:
    input_dir: Path
    output_dir: Path
    poll_interval_ms: int = 50
    timeout_s: float = 30.0


def write_batch(requests: list[RenderRequest], input_dir) -> None:
    input_dir = Path(input_dir)
    input_dir.mkdir(parents=True, exist_ok=True)
    manifest = []
    for req in requests:
        name = f"{req.request_id}.png"
        save_edge(input_dir / name, req.edge)
        manifest.append({"request_id": req.request_id, "edge_path": name})
    with open(input_dir / "batch.json", "w", encoding="utf-8") as fh:
        json.dump(manifest, fh)


def _validate_palm(path) -> np.ndarray:
    with Image.open(path) as im:
        if im.mode != "L":
            raise ValueError(f"expected 8-bit grayscale, got mode {im.mode}")
        arr = np.asarray(im, dtype=np.uint8)
    if arr.shape != (FRAME_SIZE, FRAME_SIZE):
        raise ValueError(f"expected {FRAME_SIZE}x{FRAME_SIZE}, got {arr.shape}")
    return arr


def render_external(requests: list[RenderRequest], cfg: ExternalRendererConfig) -> list[np.ndarray]:
    """Submit a batch and collect responses in request order.

    Completion order is free; responses are matched by request_id via the
    done-markers. Raises RenderProtocolError naming every request that
    errored, returned a malformed image, or was still missing at timeout.
    """
    ids = [r.request_id for r in requests]
    if len(set(ids)) != len(ids):
        raise ConfigError("request_ids are not unique")
    write_batch(requests, cfg.input_dir)

    out_dir = Path(cfg.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    deadline = time.monotonic() + cfg.timeout_s
    results: dict[str, np.ndarray] = {}
    failures: dict[str, str] = {}
    pending = set(ids)

    while pending and time.monotonic() < deadline:
        for rid in sorted(pending):
            err_path = out_dir / f"{rid}.err"
            if err_path.exists():
                failures[rid] = err_path.read_text(encoding="utf-8").strip() or "renderer error"
                pending.discard(rid)
                continue
            if (out_dir / f"{rid}.done").exists():
                try:
                    results[rid] = _validate_palm(out_dir / f"{rid}.png")
                except (OSError, ValueError) as exc:
                    failures[rid] = f"malformed response: {exc}"
                pending.discard(rid)
        if pending:
            time.sleep(cfg.poll_interval_ms / 1000.0)

    for rid in sorted(pending):
        failures[rid] = f"no response within {cfg.timeout_s}s"
    if failures:
        raise RenderProtocolError(failures)
    return [results[rid] for rid in ids]


def serve_echo_invert(input_dir, output_dir, timeout_s: float = 30.0, poll_interval_ms: int = 20) -> int:
    """Minimal protocol server for tests: answers each request with the
    inverted edge map (255 - 255*edge). Returns the number of requests served.

    Waits for ``batch.json`` to appear, processes the batch once, and exits.
    A request whose edge PNG is unreadable gets an ``.err`` file; other
    requests are unaffected.
    """
    input_dir = Path(input_dir)
    output_dir = Path(output_dir)
    output_dir.mkdir(parents=True, exist_ok=True)
    batch_path = input_dir / "batch.json"

    deadline = time.monotonic() + timeout_s
    while not batch_path.exists():
        if time.monotonic() >= deadline:
            return 0
        time.sleep(poll_interval_ms / 1000.0)

    with open(batch_path, encoding="utf-8") as fh:
        batch = json.load(fh)

    served = 0
    for entry in batch:
        rid = entry["request_id"]
        try:
            edge = load_edge(input_dir / entry["edge_path"])
            palm = (255 - 255 * edge.astype(np.int32)).astype(np.uint8)
            Image.fromarray(palm, mode="L").save(output_dir / f"{rid}.png", format="PNG")
            (output_dir / f"{rid}.done").touch()
            served += 1
        except Exception as exc:  # per-request fault isolation
            (output_dir / f"{rid}.err").write_text(str(exc), encoding="utf-8")
    return served
