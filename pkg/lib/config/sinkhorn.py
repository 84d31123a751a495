from dataclasses import dataclass
from .base import ConfigError
from .enums import GradMode

# Marginal residual below which the implicit gradient is valid
IMPLICIT_RESIDUAL_THRESHOLD = 1e-8


@dataclass(frozen=True, kw_only=True)
class SinkhornConfig:
    tau: float = 1.0
    iters: int = 20
    grad_mode: GradMode = GradMode.UNROLLED
    log_domain: bool = True

    def __post_init__(self) -> None:
        if self.tau <= 0.0:
            raise ConfigError(f"Sinkhorn tau must be > 0 (got {self.tau})")
        if self.iters < 1:
            raise ConfigError(f"Sinkhorn iters must be >= 1 (got {self.iters})")
