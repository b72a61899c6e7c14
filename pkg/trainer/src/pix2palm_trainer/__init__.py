"""pix2palm_trainer: train and serve the conditional edge-to-palm generator."""

from .data import PairDataset, discover_pairs
from .models import PatchDiscriminator, UNetGenerator
from .serve import render_one, serve
from .training import (TrainerConfig, TrainingDiverged, load_artifact,
                    save_artifact, train, write_curves)

__version__ = "0.1.0"
