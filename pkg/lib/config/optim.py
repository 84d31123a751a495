from dataclasses import dataclass, field
from .base import ConfigError
from .enums import OptimKind


@dataclass(frozen=True, kw_only=True)
class EarlyStop:
    patience: int = 10
    min_improvement: float = 1e-10

    def __post_init__(self) -> None:
        if self.patience < 1:
            raise ConfigError(f"Early stop patience must be >= 1 (got {self.patience})")
        if self.min_improvement < 0.0:
            raise ConfigError(
                f"Early stop min_improvement must be >= 0 (got {self.min_improvement})"
            )


@dataclass(frozen=True, kw_only=True)
class OptimConfig:
    kind: OptimKind = OptimKind.ADAM
    learning_rate: float = 0.01
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8
    weight_decay: float = 0.0
    max_iters: int = 1000
    early_stop: EarlyStop | None = field(default_factory=EarlyStop)

    def __post_init__(self) -> None:
        if self.learning_rate <= 0.0:
            raise ConfigError(f"Learning rate must be > 0 (got {self.learning_rate})")
        if self.weight_decay < 0.0:
            raise ConfigError(f"Weight decay must be >= 0 (got {self.weight_decay})")
        if self.weight_decay != 0.0 and self.kind != OptimKind.SGD:
            raise ConfigError("Weight decay is only supported by the sgd optimizer")
        if self.max_iters < 0:
            raise ConfigError(f"max_iters must be >= 0 (got {self.max_iters})")
        if not (0.0 <= self.beta1 < 1.0 and 0.0 <= self.beta2 < 1.0):
            raise ConfigError(f"Adam betas must lie in [0, 1) (got {self.beta1}, {self.beta2})")
        if self.epsilon <= 0.0:
            raise ConfigError(f"Adam epsilon must be > 0 (got {self.epsilon})")
