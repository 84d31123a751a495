from dataclasses import dataclass, field
from .base import ConfigError
from .sinkhorn import SinkhornConfig


@dataclass(frozen=True, kw_only=True)
class ContinualConfig:
    alpha: float = 0.8
    delta_weight_decay: float = 0.1
    plan_lr: float = 0.1
    delta_lr: float = 0.05
    epochs_per_episode: int = 5
    batch_size: int = 500
    replay_per_class: int = 5
    sinkhorn: SinkhornConfig = field(default_factory=SinkhornConfig)
    seed: int = 0

    def __post_init__(self) -> None:
        if not 0.0 <= self.alpha <= 1.0:
            raise ConfigError(f"Fusion alpha must lie in [0, 1] (got {self.alpha})")
        if self.plan_lr <= 0.0 or self.delta_lr <= 0.0:
            raise ConfigError(
                f"Continual learning rates must be > 0 (got plan {self.plan_lr}, delta {self.delta_lr})"
            )
        if self.delta_weight_decay < 0.0:
            raise ConfigError(
                f"Residual weight decay must be >= 0 (got {self.delta_weight_decay})"
            )
        if self.epochs_per_episode < 0:
            raise ConfigError(
                f"epochs_per_episode must be >= 0 (got {self.epochs_per_episode})"
            )
        if self.batch_size < 1:
            raise ConfigError(f"Batch size must be >= 1 (got {self.batch_size})")
        if self.replay_per_class < 0:
            raise ConfigError(f"replay_per_class must be >= 0 (got {self.replay_per_class})")
