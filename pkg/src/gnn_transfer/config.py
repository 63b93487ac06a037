"""
    Experiment and generation configuration files
"""

import logging
from dataclasses import MISSING, asdict, dataclass, field, fields, replace
from pathlib import Path
from typing import Any, Optional, TypeVar, Union, get_args, get_origin, get_type_hints

from .exceptions import InvalidConfigException
from .layers import GnnLayerKind
from .utils import load_yaml

log = logging.getLogger(__name__)

PROTOCOLS = ("none", "fine_tune_reinit", "fine_tune_old_layer", "frozen")
TASKS = ("node", "graph")
SPLIT_NAMES = ("train", "valid", "test")
PROFILES: dict[str, dict[str, Any]] = {
    "desk": {"epochs": 200, "runs": 5, "eval_every": 1},
    "paper": {"epochs": 2000, "runs": 10},
}

Config = TypeVar("Config", "ExperimentConfig", "GenerateConfig")


def _coerce(key: str, value: Any, expected: Any) -> Any:
    """
    Check a scalar config value against a field annotation; ints are accepted
    for floats and strings for paths
    """
    if get_origin(expected) is Union:
        options = [x for x in get_args(expected) if x is not type(None)]
        if value is None:
            return None
        return _coerce(key, value, options[0])
    if expected is Any:
        return value
    if expected is float and isinstance(value, int) and not isinstance(value, bool):
        return float(value)
    if expected is Path and isinstance(value, (str, Path)):
        return Path(value)
    if get_origin(expected) is dict and isinstance(value, dict):
        return dict(value)
    if isinstance(expected, type) and isinstance(value, expected):
        if expected is int and isinstance(value, bool):
            raise InvalidConfigException(f"{key}: expected an integer, got {value!r}")
        return value
    name = getattr(expected, "__name__", str(expected))
    raise InvalidConfigException(f"{key}: expected {name}, got {value!r}")


def _build(cls: Any, content: Any, prefix: str = "") -> Any:
    if not isinstance(content, dict):
        raise InvalidConfigException(f"{prefix or 'config'}: expected a mapping")
    hints = get_type_hints(cls)
    known = {x.name for x in fields(cls)}
    unknown = sorted(set(content) - known)
    if unknown:
        raise InvalidConfigException(
            f"Unknown configuration keys: {', '.join(prefix + x for x in unknown)}"
        )
    values = {}
    for item in fields(cls):
        if item.name in content:
            values[item.name] = _coerce(
                prefix + item.name, content[item.name], hints[item.name]
            )
        elif item.default is MISSING and item.default_factory is MISSING:
            raise InvalidConfigException(
                f"Missing configuration key {prefix + item.name}"
            )
    return cls(**values)


def _resolve(path: Optional[Path], base: Path) -> Optional[Path]:
    if path is None or path.is_absolute():
        return path
    return base / path


@dataclass(frozen=True)
class ExperimentConfig:
    """
    A transfer experiment: a target task trained from scratch (base arm) and
    from a pretrained source (transfer arm) over several paired runs
    """

    target: Path
    name: str = "experiment"
    task: str = "graph"
    model: str = "gcn"
    hidden_dim: int = 256
    num_layers: int = 3
    epochs: int = 2000
    lr: Optional[float] = None
    dropout: float = 0.5
    batch_norm: bool = True
    batch_size: int = 32
    runs: int = 10
    seed: int = 0
    source: Optional[Path] = None
    source_checkpoint: Optional[Path] = None
    protocol: str = "none"
    damage_source: bool = False
    permute_source_labels: bool = False
    eval_every: int = 1
    output: Optional[Path] = None
    control: Optional[Path] = None
    alpha: float = 0.1
    tail: int = 10
    profile: Optional[str] = None
    synthetic: bool = True
    workers: int = 1
    curve_split: str = "test"

    def __post_init__(self) -> None:
        if self.task not in TASKS:
            raise InvalidConfigException(
                f"task: expected one of {TASKS}, got {self.task!r}"
            )
        if self.model not in [x.value for x in GnnLayerKind]:
            raise InvalidConfigException(f"model: unknown layer kind {self.model!r}")
        if self.protocol not in PROTOCOLS:
            raise InvalidConfigException(
                f"protocol: expected one of {PROTOCOLS}, got {self.protocol!r}"
            )
        if self.curve_split not in SPLIT_NAMES:
            raise InvalidConfigException(
                f"curve_split: unknown split {self.curve_split!r}"
            )
        positive = (
            "runs",
            "epochs",
            "eval_every",
            "batch_size",
            "hidden_dim",
            "num_layers",
            "tail",
            "workers",
        )
        for key in positive:
            if getattr(self, key) < 1:
                raise InvalidConfigException(f"{key}: must be at least 1")
        if not 0.0 <= self.dropout < 1.0:
            raise InvalidConfigException("dropout: must be in [0, 1)")
        if not 0.0 < self.alpha < 1.0:
            raise InvalidConfigException("alpha: must be in (0, 1)")
        if self.lr is not None and self.lr <= 0:
            raise InvalidConfigException("lr: must be positive")
        if (
            self.protocol != "none"
            and self.source is None
            and self.source_checkpoint is None
        ):
            raise InvalidConfigException(
                f"protocol {self.protocol} needs a source dataset or a source checkpoint"
            )

    @property
    def learning_rate(self) -> float:
        """
        :return: The configured learning rate, or the default for the model
            and task: 0.01 for GCN and SAGE on synthetic node tasks, 0.001
            otherwise
        """
        if self.lr is not None:
            return self.lr
        if self.synthetic and self.task == "node" and self.model in ("gcn", "sage"):
            return 0.01
        return 0.001

    @property
    def output_dir(self) -> Path:
        return self.output if self.output is not None else Path("runs") / self.name

    @classmethod
    def from_dict(cls, content: Any, base: Optional[Path] = None) -> "ExperimentConfig":
        """
        Build a config from a parsed mapping. A `profile` key fills in the
        profile values for the keys not given explicitly. Relative paths are
        resolved against base.
        """
        if not isinstance(content, dict):
            raise InvalidConfigException("config: expected a mapping")
        profile = content.get("profile")
        if profile is not None:
            if profile not in PROFILES:
                raise InvalidConfigException(
                    f"profile: expected one of {sorted(PROFILES)}, got {profile!r}"
                )
            content = {**PROFILES[profile], **content}
        config = _build(cls, content)
        if base is not None:
            config = replace(
                config,
                target=_resolve(config.target, base),
                source=_resolve(config.source, base),
                source_checkpoint=_resolve(config.source_checkpoint, base),
                output=_resolve(config.output_dir, base),
                control=_resolve(config.control, base),
            )
        return config  # type: ignore[no-any-return]

    def to_dict(self) -> dict[str, Any]:
        return {
            key: str(value) if isinstance(value, Path) else value
            for key, value in asdict(self).items()
        }


@dataclass(frozen=True)
class GenerateConfig:
    """
    A dataset to generate: a preset or an explicit kind, with parameter
    overrides
    """

    output: Path
    preset: Optional[int] = None
    kind: Optional[str] = None
    params: dict[str, Any] = field(default_factory=dict)
    seed: Optional[int] = None
    calibrate: bool = True
    split_halves: bool = False

    def __post_init__(self) -> None:
        if self.preset is None and self.kind is None:
            raise InvalidConfigException("Either preset or kind must be given")
        if self.kind is not None and self.kind not in TASKS:
            raise InvalidConfigException(
                f"kind: expected one of {TASKS}, got {self.kind!r}"
            )

    @classmethod
    def from_dict(cls, content: Any, base: Optional[Path] = None) -> "GenerateConfig":
        config = _build(cls, content)
        if base is not None:
            config = replace(config, output=_resolve(config.output, base))
        return config  # type: ignore[no-any-return]


def load_config(path: Path, cls: type[Config]) -> Config:
    """
    Load a yaml config file; relative paths in it are relative to the file

    Raises:
        InvalidConfigException: if the file is missing, malformed or does not
            match the schema
    """
    try:
        content = load_yaml(path)
    except FileNotFoundError as exc:
        raise InvalidConfigException(str(exc)) from exc
    log.debug("Loaded %s config from %s", cls.__name__, path)
    return cls.from_dict(content, base=path.parent)  # type: ignore[return-value]
