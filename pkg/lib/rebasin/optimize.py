import logging
from dataclasses import dataclass

import numpy as np
from ..config.base import ConfigError
from ..config.enums import CostKind, LossKind, PlanMode
from ..config.rebasin import RebasinConfig
from ..nn.dataset import Dataset
from ..nn.mlp import Mlp, require_same_architecture
from ..nn.optim import EarlyStopping, make_optimizer
from .costs import MID_LAMBDA, cost_and_gradients, hard_cost
from .plan import TransportPlan, harden, identity_plan

logger = logging.getLogger(__name__)


@dataclass(frozen=True, kw_only=True, eq=False)
class RebasinResult:
    soft: TransportPlan
    hard: TransportPlan
    # Soft cost at every iteration, before the parameter update
    history: list[float]
    stopped_early: bool


def optimize_plan(
    a: Mlp,
    b: Mlp,
    kind: CostKind,
    data: Dataset | None,
    cfg: RebasinConfig,
    loss: LossKind | None = None,
) -> RebasinResult:
    """Learn a plan re-basing b onto a by descending the selected cost.

    The plan parameters start at the identity; mid and rnd costs draw a fresh
    mini-batch per iteration and rnd additionally draws lambda ~ U(0, 1).
    """
    require_same_architecture(a, b)
    if kind.needs_data() and data is None:
        raise ConfigError(f"Cost {kind.value} requires a dataset")
    if data is not None:
        loss = loss or LossKind.for_task(data.task)

    if a.equals(b):
        history = [hard_cost(kind, identity_plan(b), a, b, data, loss)]
        logger.debug("models already aligned; returning the identity plan")
        return RebasinResult(
            soft=identity_plan(b, PlanMode.SOFT_PARAMS),
            hard=identity_plan(b),
            history=history,
            stopped_early=True,
        )

    rng = np.random.default_rng(cfg.seed)
    optimizer = make_optimizer(cfg.optim)
    stopper = EarlyStopping(cfg.optim.early_stop)
    params = [np.eye(width) for width in b.hidden_widths]
    history: list[float] = []
    stopped_early = False

    for it in range(cfg.optim.max_iters):
        batch = data.sample(cfg.batch_size, rng) if kind.needs_data() and data is not None else None
        lam = float(rng.uniform()) if kind == CostKind.RND else MID_LAMBDA
        soft = TransportPlan(mats=tuple(params), mode=PlanMode.SOFT_PARAMS)
        value, grads = cost_and_gradients(kind, soft, a, b, cfg.sinkhorn, batch, loss, lam)
        history.append(value)
        params = optimizer.step(params, grads)
        if stopper.update(value):
            logger.debug("early stop at iteration %d (best cost %.6g)", it, stopper.best)
            stopped_early = True
            break

    soft = TransportPlan(mats=tuple(params), mode=PlanMode.SOFT_PARAMS)
    logger.debug("%s re-basin finished after %d iterations", kind.value, len(history))
    return RebasinResult(soft=soft, hard=harden(soft, cfg.sinkhorn), history=history, stopped_early=stopped_early)
