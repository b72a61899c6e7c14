"""Edge-map reassembly: splice ROI blocks from source identities onto a
donor background, with an optional handedness flip.

The ROI recipe (which identity fills which block, from which gesture) is
fixed per synthetic identity; intra-class diversity comes from swapping the
background donor gesture outside the ROI.
"""

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ConfigError, LibraryLookupError
from .fileio import load_edge
from .geometry import RoiGrid
from .planner import GRID_POSITIONS, Combination


class EdgeLibrary:
    """Edge maps keyed by identity index, one list entry per gesture image."""

    def __init__(self, maps: dict[int, list[np.ndarray]], names: dict[int, str] | None = None):
        if not maps:
            raise ConfigError("edge library is empty")
        for ident, gestures in maps.items():
            if not gestures:
                raise ConfigError(f"identity {ident} has no gesture images")
        self._maps = maps
        self.names = names or {}

    @classmethod
    def from_dir(cls, root) -> "EdgeLibrary":
        """Load ``root/{identity_dir}/*.png``; identities and gestures are
        indexed in sorted-name order."""
        root = Path(root)
        ident_dirs = sorted(p for p in root.iterdir() if p.is_dir())
        if not ident_dirs:
            raise ConfigError(f"no identity directories under {root}")
        maps = {}
        names = {}
        for idx, d in enumerate(ident_dirs):
            files = sorted(d.glob("*.png"))
            maps[idx] = [load_edge(f) for f in files]
            names[idx] = d.name
        return cls(maps, names)

    @property
    def identities(self) -> list[int]:
        return sorted(self._maps)

    def gesture_count(self, identity: int) -> int:
        try:
            return len(self._maps[identity])
        except KeyError:
            raise LibraryLookupError(f"unknown identity {identity}") from None

    def get(self, identity: int, gesture: int) -> np.ndarray:
        try:
            gestures = self._maps[identity]
        except KeyError:
            raise LibraryLookupError(f"unknown identity {identity}") from None
        if not 0 <= gesture < len(gestures):
            raise LibraryLookupError(
                f"identity {identity} has {len(gestures)} gestures, "
                f"gesture {gesture} requested"
            )
        return gestures[gesture]


@dataclass(frozen=True)
class AssemblySpec:
    """Everything needed to assemble one edge-map sample."""

    combination: Combination
    block_gestures: tuple[int, ...]        # per grid position
    background: tuple[int, int]            # (identity, gesture) donor
    flip: bool

    def __post_init__(self):
        if len(self.block_gestures) != GRID_POSITIONS:
            raise ConfigError(f"need {GRID_POSITIONS} block gesture indices")


def assemble_edge(spec: AssemblySpec, lib: EdgeLibrary, grid: RoiGrid) -> np.ndarray:
    """Donor background with each ROI block overwritten in place from its
    assigned source identity; the flip mirrors the finished map."""
    out = lib.get(*spec.background).copy()
    for pos, rect in enumerate(grid.blocks):
        src = lib.get(spec.combination.identities[pos], spec.block_gestures[pos])
        out[rect.sl] = src[rect.sl]
    if spec.flip:
        out = out[:, ::-1].copy()
    return out


def sample_variants(
    combination: Combination,
    lib: EdgeLibrary,
    count: int,
    rng: np.random.Generator,
    block_gesture: int = 0,
    background_position: int = 0,
) -> list[AssemblySpec]:
    """``count`` specs for one synthetic identity.

    All specs share the ROI recipe (same combination, same per-position
    block gesture); backgrounds cycle through the donor identity's gestures.
    The donor defaults to the identity at grid position 1; the handedness
    flip is drawn once per synthetic identity.
    """
    if count < 1:
        raise ConfigError(f"count must be >= 1, got {count}")
    donor = combination.identities[background_position]
    n_gestures = lib.gesture_count(donor)

    flip = bool(rng.integers(0, 2))
    block_gestures = tuple([block_gesture] * GRID_POSITIONS)
    return [
        AssemblySpec(
            combination=combination,
            block_gestures=block_gestures,
            background=(donor, k % n_gestures),
            flip=flip,
        )
        for k in range(count)
    ]
