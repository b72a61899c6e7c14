"""Adversarial training of the edge-to-palm generator.

Objective: least-squares adversarial terms (discriminator scores real and
generated (condition, image) pairs) plus a reconstruction term,
``g_total = g_adv + lambda_l1 * l1``. The balance factor defaults to 100,
the optimizer to Adam(lr=2e-4, beta1=0.5).
"""

import dataclasses
import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import torch
import torch.nn as nn
from torch.utils.data import DataLoader

from .data import PairDataset
from .models import PatchDiscriminator, UNetGenerator


class TrainingDiverged(RuntimeError):
    pass


@dataclass(frozen=True)
class TrainerConfig:
    lambda_l1: float = 100.0
    lr: float = 2e-4
    beta1: float = 0.5
    batch_size: int = 1
    epochs: int = 1
    max_steps: Optional[int] = None      # cap across epochs; None = run all epochs
    image_size: int = 256
    base_channels: int = 64
    num_downs: int = 8
    dropout: float = 0.5
    seed: int = 0

    def __post_init__(self):
        if self.lambda_l1 < 0:
            raise ValueError(f"lambda_l1 must be >= 0, got {self.lambda_l1}")
        if self.lr <= 0:
            raise ValueError(f"lr must be positive, got {self.lr}")
        if self.image_size != 2 ** self.num_downs:
            raise ValueError(
                f"num_downs={self.num_downs} must take image_size={self.image_size} "
                f"down to a 1x1 bottleneck (image_size must equal 2**num_downs)"
            )


def build_generator(cfg: TrainerConfig) -> UNetGenerator:
    return UNetGenerator(base_channels=cfg.base_channels, num_downs=cfg.num_downs,
                         dropout=cfg.dropout)


def train(data_dir, cfg: TrainerConfig, out_path, palms_root=None) -> dict:
    """Train on paired PNGs under ``data_dir``; save the generator artifact.

    ``palms_root`` selects the split-root layout (edges under data_dir,
    palms under palms_root at matching relative paths).
    Returns {"curves": [per-step loss dicts], "steps": n, "artifact": path}.
    Aborts with TrainingDiverged on the first non-finite loss.
    """
    torch.manual_seed(cfg.seed)
    dataset = PairDataset(data_dir, image_size=cfg.image_size, palms_root=palms_root)
    loader = DataLoader(dataset, batch_size=cfg.batch_size, shuffle=True, drop_last=False,
                        generator=torch.Generator().manual_seed(cfg.seed))

    generator = build_generator(cfg)
    discriminator = PatchDiscriminator(in_channels=2,
                                       base_channels=min(cfg.base_channels, 64))
    opt_g = torch.optim.Adam(generator.parameters(), lr=cfg.lr, betas=(cfg.beta1, 0.999))
    opt_d = torch.optim.Adam(discriminator.parameters(), lr=cfg.lr, betas=(cfg.beta1, 0.999))
    mse = nn.MSELoss()
    l1 = nn.L1Loss()

    curves = []
    step = 0
    done = False
    for _ in range(cfg.epochs):
        if done:
            break
        for condition, target in loader:
            # discriminator: real pairs toward 1, generated pairs toward 0
            fake = generator(condition)
            pred_real = discriminator(condition, target)
            pred_fake = discriminator(condition, fake.detach())
            d_loss = 0.5 * (mse(pred_real, torch.ones_like(pred_real))
                            + mse(pred_fake, torch.zeros_like(pred_fake)))
            opt_d.zero_grad()
            d_loss.backward()
            opt_d.step()

            # generator: fool the discriminator, reconstruct the target
            pred_fake = discriminator(condition, fake)
            g_adv = mse(pred_fake, torch.ones_like(pred_fake))
            g_l1 = l1(fake, target)
            g_total = g_adv + cfg.lambda_l1 * g_l1
            opt_g.zero_grad()
            g_total.backward()
            opt_g.step()

            record = {
                "step": step,
                "d_loss": float(d_loss.item()),
                "g_adv": float(g_adv.item()),
                "g_l1": float(g_l1.item()),
                "g_total": float(g_total.item()),
            }
            for key in ("d_loss", "g_total"):
                if not math.isfinite(record[key]):
                    raise TrainingDiverged(f"non-finite {key} at step {step}: {record}")
            curves.append(record)
            step += 1
            if cfg.max_steps is not None and step >= cfg.max_steps:
                done = True
                break

    save_artifact(generator, cfg, out_path)
    return {"curves": curves, "steps": step, "artifact": str(out_path)}


def save_artifact(generator: UNetGenerator, cfg: TrainerConfig, path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    torch.save({
        "format": "pix2palm-generator-v1",
        "config": dataclasses.asdict(cfg),
        "state_dict": generator.state_dict(),
    }, path)


def load_artifact(path) -> tuple[UNetGenerator, TrainerConfig]:
    payload = torch.load(path, map_location="cpu", weights_only=False)
    if payload.get("format") != "pix2palm-generator-v1":
        raise ValueError(f"{path}: not a generator artifact")
    cfg = TrainerConfig(**payload["config"])
    generator = build_generator(cfg)
    generator.load_state_dict(payload["state_dict"])
    generator.eval()
    return generator, cfg


def write_curves(curves, path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as fh:
        for row in curves:
            fh.write(json.dumps(row) + "\n")
