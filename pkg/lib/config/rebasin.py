from dataclasses import dataclass, field
from .base import ConfigError
from .enums import CostKind
from .optim import OptimConfig
from .sinkhorn import SinkhornConfig


@dataclass(frozen=True, kw_only=True)
class RebasinConfig:
    sinkhorn: SinkhornConfig = field(default_factory=SinkhornConfig)
    optim: OptimConfig = field(
        default_factory=lambda: OptimConfig(learning_rate=0.1, max_iters=100)
    )
    batch_size: int = 100
    seed: int = 0

    def __post_init__(self) -> None:
        if self.batch_size < 1:
            raise ConfigError(f"Re-basin batch size must be >= 1 (got {self.batch_size})")


# Initial Adam learning rate per (task family, cost)
LEARNING_RATES: dict[tuple[bool, CostKind], float] = {
    (False, CostKind.L2): 0.1,
    (False, CostKind.MID): 0.1,
    (False, CostKind.RND): 0.01,
    (True, CostKind.L2): 0.01,
    (True, CostKind.MID): 0.1,
    (True, CostKind.RND): 0.1,
}

LMC_MAX_ITERS = 1000


def lmc_rebasin_config(classification: bool, cost: CostKind, seed: int = 0) -> RebasinConfig:
    """Settings used to align independently trained models before an LMC evaluation."""
    return RebasinConfig(
        optim=OptimConfig(learning_rate=LEARNING_RATES[(classification, cost)], max_iters=LMC_MAX_ITERS),
        batch_size=1000 if classification else 100,
        seed=seed,
    )
