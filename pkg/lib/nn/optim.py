from collections.abc import Sequence
from typing import override

import numpy as np
from ..config.base import DimensionError
from ..config.enums import OptimKind
from ..config.optim import EarlyStop, OptimConfig
from .matrix import Matrix


class Optimizer:
    """Functional first-order optimizer: `step` returns updated copies."""

    _config: OptimConfig

    def __init__(self, config: OptimConfig) -> None:
        super().__init__()
        self._config = config

    @property
    def config(self) -> OptimConfig:
        return self._config

    def step(self, params: Sequence[Matrix], grads: Sequence[Matrix]) -> list[Matrix]:
        if len(params) != len(grads):
            raise DimensionError(
                f"Parameter/gradient count mismatch ({len(params)} vs {len(grads)})"
            )
        for p, g in zip(params, grads):
            if p.shape != g.shape:
                raise DimensionError(f"Gradient shape {g.shape} does not match parameter {p.shape}")
        return self._step(params, grads)

    def _step(self, params: Sequence[Matrix], grads: Sequence[Matrix]) -> list[Matrix]:
        raise NotImplementedError("_step must be implemented in subclass")


class SGD(Optimizer):
    @override
    def _step(self, params: Sequence[Matrix], grads: Sequence[Matrix]) -> list[Matrix]:
        lr = self._config.learning_rate
        decay = self._config.weight_decay
        return [p - lr * (g + decay * p) for p, g in zip(params, grads)]


class Adam(Optimizer):
    _moments: list[Matrix] | None
    _velocities: list[Matrix] | None
    _steps: int

    def __init__(self, config: OptimConfig) -> None:
        super().__init__(config)
        self._moments = None
        self._velocities = None
        self._steps = 0

    @override
    def _step(self, params: Sequence[Matrix], grads: Sequence[Matrix]) -> list[Matrix]:
        cfg = self._config
        if self._moments is None or self._velocities is None:
            self._moments = [np.zeros_like(p) for p in params]
            self._velocities = [np.zeros_like(p) for p in params]
        self._steps += 1

        correction1 = 1.0 - cfg.beta1**self._steps
        correction2 = 1.0 - cfg.beta2**self._steps
        updated: list[Matrix] = []
        for i, (p, g) in enumerate(zip(params, grads)):
            self._moments[i] = cfg.beta1 * self._moments[i] + (1.0 - cfg.beta1) * g
            self._velocities[i] = cfg.beta2 * self._velocities[i] + (1.0 - cfg.beta2) * g * g
            m_hat = self._moments[i] / correction1
            v_hat = self._velocities[i] / correction2
            updated.append(p - cfg.learning_rate * m_hat / (np.sqrt(v_hat) + cfg.epsilon))
        return updated


def make_optimizer(config: OptimConfig) -> Optimizer:
    if config.kind == OptimKind.ADAM:
        return Adam(config)
    return SGD(config)


class EarlyStopping:
    """Fires after `patience` consecutive updates without beating the best cost."""

    _rule: EarlyStop | None
    _best: float
    _stale: int

    def __init__(self, rule: EarlyStop | None) -> None:
        super().__init__()
        self._rule = rule
        self._best = float("inf")
        self._stale = 0

    @property
    def best(self) -> float:
        return self._best

    def update(self, value: float) -> bool:
        if self._rule is None:
            return False
        if value < self._best - self._rule.min_improvement:
            self._best = value
            self._stale = 0
            return False
        self._best = min(self._best, value)
        self._stale += 1
        return self._stale >= self._rule.patience
