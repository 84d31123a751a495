import copy
import dataclasses
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, cast

import yaml
from .base import ConfigError
from .codec import config_from_dict, config_to_dict
from .continual import ContinualConfig
from .enums import (
    Activation,
    AlignMethod,
    ContinualMethod,
    DatasetKind,
    ExperimentKind,
    InitKind,
    InitRegime,
)
from .optim import OptimConfig
from .rebasin import RebasinConfig

MNIST_INPUTS = 28 * 28
MNIST_CLASSES = 10

POLY_DIMS = [1, 10, 10, 1]
MNIST_DIMS = [MNIST_INPUTS, 128, 128, MNIST_CLASSES]


@dataclass(frozen=True, kw_only=True)
class ModelConfig:
    # None picks the default for the experiment and dataset
    dims: list[int] | None = None
    activation: Activation | None = None
    init: InitKind = InitKind.GLOROT

    def __post_init__(self) -> None:
        if self.dims is None:
            return
        if len(self.dims) < 3:
            raise ConfigError(f"Model dims need input, hidden and output widths (got {self.dims})")
        if any(width < 1 for width in self.dims):
            raise ConfigError(f"Model widths must be >= 1 (got {self.dims})")


@dataclass(frozen=True, kw_only=True)
class Architecture:
    dims: list[int]
    activation: Activation
    init: InitKind


def resolve_architecture(
    model: ModelConfig, experiment: ExperimentKind, dataset: DatasetKind
) -> Architecture:
    """Fill unset model fields: tanh polynomial nets, relu MNIST nets."""
    mnist = dataset == DatasetKind.MNIST and experiment != ExperimentKind.FIND_OT
    dims = model.dims if model.dims is not None else list(MNIST_DIMS if mnist else POLY_DIMS)
    activation = model.activation
    if activation is None:
        activation = Activation.RELU if mnist else Activation.TANH
    return Architecture(dims=dims, activation=activation, init=model.init)


@dataclass(frozen=True, kw_only=True)
class DataConfig:
    # None is mnist for the continual experiment and pol1 otherwise
    dataset: DatasetKind | None = None
    # Directory holding the four MNIST IDX files (plain or .gz)
    mnist_dir: str | None = None
    train_size: int = 100
    test_size: int = 100
    noise_sd: float = 0.05

    def __post_init__(self) -> None:
        if self.train_size < 1 or self.test_size < 1:
            raise ConfigError(
                f"Dataset sizes must be >= 1 (got {self.train_size} train, {self.test_size} test)"
            )
        if self.noise_sd < 0.0:
            raise ConfigError(f"noise_sd must be >= 0 (got {self.noise_sd})")


@dataclass(frozen=True, kw_only=True)
class TrainConfig:
    optim: OptimConfig = field(default_factory=OptimConfig)
    epochs: int = 100
    batch_size: int = 10

    def __post_init__(self) -> None:
        if self.epochs < 0:
            raise ConfigError(f"Epoch count must be >= 0 (got {self.epochs})")
        if self.batch_size < 1:
            raise ConfigError(f"Batch size must be >= 1 (got {self.batch_size})")


@dataclass(frozen=True, kw_only=True)
class StreamConfig:
    episodes: int = 5
    train_per_episode: int = 2000
    test_per_episode: int = 500
    # theta_0 is trained on episode 0 with Adam at this rate
    pretrain_lr: float = 0.001
    pretrain_epochs: int = 5

    def __post_init__(self) -> None:
        if self.episodes < 1:
            raise ConfigError(f"Episode count must be >= 1 (got {self.episodes})")
        if self.train_per_episode < 1 or self.test_per_episode < 1:
            raise ConfigError("Episode sizes must be >= 1")
        if self.pretrain_lr <= 0.0:
            raise ConfigError(f"pretrain_lr must be > 0 (got {self.pretrain_lr})")


@dataclass(frozen=True, kw_only=True)
class ExperimentConfig:
    experiment: ExperimentKind
    model: ModelConfig = field(default_factory=ModelConfig)
    data: DataConfig = field(default_factory=DataConfig)
    train: TrainConfig = field(default_factory=TrainConfig)
    # None selects the per-dataset learning-rate table
    rebasin: RebasinConfig | None = None
    continual: ContinualConfig = field(default_factory=ContinualConfig)
    stream: StreamConfig = field(default_factory=StreamConfig)
    method: AlignMethod = AlignMethod.SINKHORN_L2
    continual_method: ContinualMethod = ContinualMethod.REBASIN_REPLAY
    init_regime: InitRegime = InitRegime.RANDOM
    wm_max_sweeps: int = 100
    grid_points: int = 25
    runs: int = 1
    seed: int = 0
    out_dir: str = "results"
    workers: int = 1

    def __post_init__(self) -> None:
        if self.runs < 1:
            raise ConfigError(f"runs must be >= 1 (got {self.runs})")
        if self.workers < 1:
            raise ConfigError(f"workers must be >= 1 (got {self.workers})")
        if self.grid_points < 2:
            raise ConfigError(f"grid_points must be >= 2 (got {self.grid_points})")
        if self.wm_max_sweeps < 1:
            raise ConfigError(f"wm_max_sweeps must be >= 1 (got {self.wm_max_sweeps})")

        dataset = self.dataset
        arch = self.architecture
        # Echo the resolved defaults in to_dict and reports
        object.__setattr__(self, "data", dataclasses.replace(self.data, dataset=dataset))
        object.__setattr__(
            self, "model", ModelConfig(dims=arch.dims, activation=arch.activation, init=arch.init)
        )

        if dataset == DatasetKind.MNIST and self.data.mnist_dir is None:
            raise ConfigError("The mnist dataset requires data.mnist_dir")
        if self.experiment == ExperimentKind.CONTINUAL and dataset != DatasetKind.MNIST:
            raise ConfigError("The continual experiment runs on the mnist dataset only")
        if self.experiment == ExperimentKind.FIND_OT and self.method not in (
            AlignMethod.SINKHORN_L2,
            AlignMethod.WM,
        ):
            raise ConfigError(
                f"find_ot supports methods sinkhorn_l2 and wm (got {self.method.value})"
            )
        if self.experiment == ExperimentKind.FIND_OT:
            polynomial = self.init_regime != InitRegime.RANDOM
        else:
            polynomial = dataset != DatasetKind.MNIST
        if polynomial and (arch.dims[0] != 1 or arch.dims[-1] != 1):
            raise ConfigError(
                f"Polynomial tasks need 1 input and 1 output (got dims {arch.dims})"
            )
        if not polynomial and dataset == DatasetKind.MNIST and self.experiment != ExperimentKind.FIND_OT:
            if arch.dims[0] != MNIST_INPUTS or arch.dims[-1] != MNIST_CLASSES:
                raise ConfigError(
                    f"MNIST models need {MNIST_INPUTS} inputs and {MNIST_CLASSES} outputs (got dims {arch.dims})"
                )

    @property
    def dataset(self) -> DatasetKind:
        if self.data.dataset is not None:
            return self.data.dataset
        if self.experiment == ExperimentKind.CONTINUAL:
            return DatasetKind.MNIST
        return DatasetKind.POL1

    @property
    def architecture(self) -> Architecture:
        return resolve_architecture(self.model, self.experiment, self.dataset)

    def to_dict(self) -> dict[str, Any]:
        return config_to_dict(self)

    @staticmethod
    def from_dict(data: dict[str, Any]) -> "ExperimentConfig":
        return config_from_dict(ExperimentConfig, data)


def load_config(path: Path) -> dict[str, Any]:
    """Raw config mapping from a YAML or JSON file."""
    try:
        with path.open("r") as f:
            raw = yaml.safe_load(f)
    except OSError as e:
        raise ConfigError(f"Cannot read config file {path} ({e.strerror})")
    except yaml.YAMLError as e:
        raise ConfigError(f"Invalid config file {path} ({e})")
    if raw is None:
        return {}
    if not isinstance(raw, dict):
        raise ConfigError(f"Config file {path} must hold a mapping")
    return cast(dict[str, Any], raw)


def _coerce_scalar(text: str) -> Any:
    if text.lower() in ("true", "false"):
        return text.lower() == "true"
    if text.lower() in ("null", "none"):
        return None
    try:
        return int(text)
    except ValueError:
        pass
    try:
        return float(text)
    except ValueError:
        pass
    if text.startswith("["):
        try:
            return json.loads(text)
        except ValueError:
            raise ConfigError(f"Invalid list literal {text!r}")
    if len(text) >= 2 and text[0] == text[-1] and text[0] in "\"'":
        return text[1:-1]
    return text


def apply_overrides(raw: dict[str, Any], overrides: list[str]) -> dict[str, Any]:
    """Apply dotted `key=value` overrides to a copy of a raw config mapping."""
    result = copy.deepcopy(raw)
    for override in overrides:
        if "=" not in override:
            raise ConfigError(f"Invalid override {override!r} (expected key=value)")
        key, value = override.split("=", 1)
        parts = key.strip().split(".")
        node = result
        for part in parts[:-1]:
            child = node.get(part)
            if not isinstance(child, dict):
                child = {}
                node[part] = child
            node = cast(dict[str, Any], child)
        node[parts[-1]] = _coerce_scalar(value.strip())
    return result
