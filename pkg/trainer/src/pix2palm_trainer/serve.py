"""File-protocol render worker.

Protocol (shared with the synthesis pipeline, bit-exact):
  input dir:  ``batch.json`` = [{"request_id", "edge_path"}] with edge PNGs
              (1-channel, 0/255) referenced relative to the input dir.
  output dir: ``{request_id}.png`` (8-bit grayscale, image_size square)
              plus an empty ``{request_id}.done`` marker per request;
              failures produce ``{request_id}.err`` with a UTF-8 message.

The worker is a single consumer: it polls for batch.json, answers every
request it has not answered yet, and keeps watching for new requests until
the idle timeout expires (or exits after one batch with ``once=True``).
Inference runs in eval mode with no stochastic layers, so a fixed artifact
always produces identical bytes for identical edges.
"""

import json
import time
from pathlib import Path

import numpy as np
import torch
from PIL import Image

from .training import load_artifact


def _load_edge(path, size) -> np.ndarray:
    with Image.open(path) as im:
        if im.mode == "1":
            arr = np.asarray(im, dtype=bool).astype(np.float32)
        else:
            if im.mode != "L":
                im = im.convert("L")
            arr = (np.asarray(im, dtype=np.float32) > 0).astype(np.float32)
    if arr.shape != (size, size):
        raise ValueError(f"{path}: expected {size}x{size} edge map, got {arr.shape}")
    return arr


def render_one(generator, edge: np.ndarray) -> np.ndarray:
    condition = torch.from_numpy(edge * 2.0 - 1.0)[None, None]
    with torch.no_grad():
        out = generator(condition)[0, 0].numpy()
    return np.clip(np.rint((out + 1.0) * 127.5), 0, 255).astype(np.uint8)


def serve(model_path, input_dir, output_dir, poll_interval_ms: int = 50,
          idle_timeout_s: float = 30.0, once: bool = False) -> int:
    """Answer protocol requests until idle timeout; returns requests served."""
    generator, cfg = load_artifact(model_path)
    input_dir = Path(input_dir)
    output_dir = Path(output_dir)
    output_dir.mkdir(parents=True, exist_ok=True)
    batch_path = input_dir / "batch.json"

    served = 0
    deadline = time.monotonic() + idle_timeout_s
    while time.monotonic() < deadline:
        did_work = False
        if batch_path.exists():
            try:
                entries = json.loads(batch_path.read_text(encoding="utf-8"))
            except (OSError, json.JSONDecodeError):
                entries = []  # mid-write; retry next poll
            for entry in entries:
                rid = entry.get("request_id")
                if not rid:
                    continue
                if (output_dir / f"{rid}.done").exists() or (output_dir / f"{rid}.err").exists():
                    continue
                did_work = True
                served += _answer_request(generator, cfg, input_dir, output_dir, entry)
            if entries and once:
                return served
        if did_work:
            deadline = time.monotonic() + idle_timeout_s
        else:
            time.sleep(poll_interval_ms / 1000.0)
    return served


def _answer_request(generator, cfg, input_dir, output_dir, entry) -> int:
    rid = entry["request_id"]
    try:
        edge = _load_edge(input_dir / entry["edge_path"], cfg.image_size)
        palm = render_one(generator, edge)
        Image.fromarray(palm, mode="L").save(output_dir / f"{rid}.png", format="PNG")
        (output_dir / f"{rid}.done").touch()
        return 1
    except Exception as exc:  # fault isolation: one bad request never stops the batch
        (output_dir / f"{rid}.err").write_text(str(exc), encoding="utf-8")
        return 0
