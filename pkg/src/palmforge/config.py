"""Pipeline configuration: a JSON document mirroring PipelineConfig.

Loading is strict: unknown keys anywhere in the document are rejected,
naming the offending key path. The config hash covers the fully resolved
document (defaults included) so manifests can pin what actually ran.
"""

import dataclasses
import hashlib
import json
import typing
from dataclasses import dataclass
from typing import Optional

from .augment import AugmentConfig, CutoutConfig
from .edges import CannyConfig
from .errors import ConfigError
from .geometry import DEFAULT_ROI, DEFAULT_TARGETS, REFERENCE_JOINTS
from .render import PseudoRendererConfig


@dataclass(frozen=True)
class NormalizeOptions:
    reference_joints: tuple[int, int, int, int] = REFERENCE_JOINTS
    targets: tuple[tuple[float, float], ...] = tuple(map(tuple, DEFAULT_TARGETS.tolist()))

    def __post_init__(self):
        if len(self.targets) != len(self.reference_joints):
            raise ConfigError("one target point per reference joint required")


@dataclass(frozen=True)
class PlanOptions:
    max_shared: int = 5

    def __post_init__(self):
        if not 0 <= self.max_shared < 9:
            raise ConfigError(f"need 0 <= max_shared < 9, got {self.max_shared}")


@dataclass(frozen=True)
class AssembleOptions:
    block_gesture: int = 0
    background_position: int = 0

    def __post_init__(self):
        if not 0 <= self.background_position < 9:
            raise ConfigError(f"background_position out of [0,9): {self.background_position}")


@dataclass(frozen=True)
class ExternalProtocolOptions:
    input_dir: str = "render_in"
    output_dir: str = "render_out"
    poll_interval_ms: int = 50
    timeout_s: float = 30.0


@dataclass(frozen=True)
class RendererOptions:
    backend: str = "pseudo"
    pseudo: PseudoRendererConfig = PseudoRendererConfig()
    external: ExternalProtocolOptions = ExternalProtocolOptions()

    def __post_init__(self):
        if self.backend not in ("pseudo", "external"):
            raise ConfigError(f"unknown renderer backend: {self.backend!r}")


@dataclass(frozen=True)
class PipelineConfig:
    corpus_dir: str
    keypoints_file: str
    output_dir: str
    ids_to_generate: int
    samples_per_id: int
    master_seed: int = 0
    workers: int = 1
    roi: tuple[int, int, int, int] = DEFAULT_ROI
    normalize: NormalizeOptions = NormalizeOptions()
    canny: CannyConfig = CannyConfig()
    planner: PlanOptions = PlanOptions()
    assemble: AssembleOptions = AssembleOptions()
    renderer: RendererOptions = RendererOptions()
    augment: AugmentConfig = AugmentConfig()

    def __post_init__(self):
        if self.ids_to_generate < 1:
            raise ConfigError(f"ids_to_generate must be >= 1, got {self.ids_to_generate}")
        if self.samples_per_id < 1:
            raise ConfigError(f"samples_per_id must be >= 1, got {self.samples_per_id}")
        if self.workers < 1:
            raise ConfigError(f"workers must be >= 1, got {self.workers}")


def _build(cls, data, path):
    """Recursively build a dataclass from a plain dict, rejecting unknown keys."""
    if not isinstance(data, dict):
        raise ConfigError(f"{path or 'config'}: expected an object, got {type(data).__name__}")
    hints = typing.get_type_hints(cls)
    known = {f.name: f for f in dataclasses.fields(cls)}
    unknown = set(data) - set(known)
    if unknown:
        key = sorted(unknown)[0]
        raise ConfigError(f"unknown config key: {path + '.' if path else ''}{key}")
    kwargs = {}
    for name, value in data.items():
        kwargs[name] = _coerce(hints[name], value, f"{path + '.' if path else ''}{name}")
    try:
        return cls(**kwargs)
    except TypeError as exc:
        raise ConfigError(f"{path or 'config'}: {exc}") from exc


def _coerce(hint, value, path):
    origin = typing.get_origin(hint)
    args = typing.get_args(hint)

    if origin is typing.Union:  # Optional[X]
        if value is None:
            if type(None) in args:
                return None
            raise ConfigError(f"{path}: null not allowed")
        inner = [a for a in args if a is not type(None)]
        return _coerce(inner[0], value, path)

    if dataclasses.is_dataclass(hint):
        return _build(hint, value, path)

    if origin is tuple:
        if not isinstance(value, (list, tuple)):
            raise ConfigError(f"{path}: expected an array")
        if len(args) == 2 and args[1] is Ellipsis:
            return tuple(_coerce(args[0], v, f"{path}[{i}]") for i, v in enumerate(value))
        if len(value) != len(args):
            raise ConfigError(f"{path}: expected {len(args)} entries, got {len(value)}")
        return tuple(_coerce(a, v, f"{path}[{i}]") for i, (a, v) in enumerate(zip(args, value)))

    if hint is bool:
        if not isinstance(value, bool):
            raise ConfigError(f"{path}: expected a boolean")
        return value
    if hint is int:
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(f"{path}: expected an integer")
        return value
    if hint is float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"{path}: expected a number")
        return float(value)
    if hint is str:
        if not isinstance(value, str):
            raise ConfigError(f"{path}: expected a string")
        return value
    raise ConfigError(f"{path}: unsupported config field type {hint!r}")


def load_config(path) -> PipelineConfig:
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
    return _build(PipelineConfig, data, "")


def config_dict(cfg: PipelineConfig) -> dict:
    return dataclasses.asdict(cfg)


def config_hash(cfg: PipelineConfig) -> str:
    canonical = json.dumps(config_dict(cfg), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()
