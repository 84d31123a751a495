import logging
from dataclasses import dataclass

import numpy as np
from ..config.base import DimensionError, InvalidInputError
from ..config.continual import ContinualConfig
from ..config.enums import LossKind, OptimKind, PlanMode
from ..config.optim import OptimConfig
from ..config.sinkhorn import SinkhornConfig
from ..data.stream import Episode
from ..nn.dataset import Dataset
from ..nn.losses import check_compatible, cost, record_loss
from ..nn.matrix import Matrix
from ..nn.mlp import Mlp, add_flat, constant_params, flatten_params, param_shapes, record_forward, unflatten_params
from ..nn.optim import Adam, SGD
from ..nn.tape import Tape, Var
from ..rebasin.costs import interpolate
from ..rebasin.plan import TransportPlan, apply_plan, record_apply_plan, record_soft_plan
from .replay import ReplayBuffer

logger = logging.getLogger(__name__)

# delta starts at U(0, DELTA_INIT_SCALE) entrywise
DELTA_INIT_SCALE = 1e-6


def _check_delta(delta: Matrix, theta: Mlp) -> None:
    if delta.size != theta.param_count:
        raise DimensionError(
            f"Residual length does not match the model (expected {theta.param_count}, got {delta.size})"
        )


def c_cl(
    delta: Matrix,
    plan: TransportPlan,
    theta: Mlp,
    batch: Dataset,
    loss: LossKind,
    sinkhorn_cfg: SinkhornConfig | None = None,
) -> float:
    """Task cost of the midpoint between theta and its re-basing, shifted by delta.

    The squared-norm penalty on delta is applied as optimizer weight decay and
    is not part of the returned value.
    """
    _check_delta(delta, theta)
    check_compatible(theta, batch, loss)
    midpoint = interpolate(theta, apply_plan(theta, plan, sinkhorn_cfg), 0.5)
    return cost(add_flat(midpoint, delta), batch, loss)


def record_c_cl(
    tape: Tape, delta: Var, perms: list[Var], theta: Mlp, batch: Dataset, loss: LossKind
) -> Var:
    if delta.shape != (theta.param_count, 1):
        raise DimensionError(
            f"Residual shape does not match the model (expected ({theta.param_count}, 1), got {delta.shape})"
        )
    check_compatible(theta, batch, loss)
    anchor = constant_params(tape, theta)
    rebased = record_apply_plan(tape, constant_params(tape, theta), perms)

    shapes = param_shapes(theta)
    offset = 0
    shifted: list[tuple[Var, Var]] = []
    for i, ((wa, ba), (wb, bb)) in enumerate(zip(anchor, rebased)):
        w_shape, b_shape = shapes[2 * i], shapes[2 * i + 1]
        w_shift = tape.slice(delta, offset, w_shape)
        offset += w_shape[0] * w_shape[1]
        b_shift = tape.slice(delta, offset, b_shape)
        offset += b_shape[0] * b_shape[1]
        shifted.append(((wa + wb) * 0.5 + w_shift, (ba + bb) * 0.5 + b_shift))

    outputs = record_forward(tape, shifted, theta.activation, tape.constant(batch.inputs))
    return record_loss(tape, outputs, batch.targets, loss)


def c_cl_gradients(
    delta: Matrix,
    plan: TransportPlan,
    theta: Mlp,
    batches: list[Dataset],
    loss: LossKind,
    sinkhorn_cfg: SinkhornConfig,
) -> tuple[float, list[Matrix], Matrix]:
    """Mean C_CL over `batches` with its gradients for the plan parameters and delta."""
    if not batches:
        raise InvalidInputError("At least one batch is required")
    _check_delta(delta, theta)
    tape = Tape()
    leaves, perms = record_soft_plan(tape, plan, sinkhorn_cfg)
    delta_leaf = tape.leaf(np.asarray(delta).reshape(-1, 1))
    terms = [record_c_cl(tape, delta_leaf, perms, theta, batch, loss) for batch in batches]
    total = terms[0]
    for term in terms[1:]:
        total = total + term
    objective = total * (1.0 / len(terms))
    grads = tape.gradients(objective, leaves + [delta_leaf])
    return objective.item(), grads[:-1], grads[-1]


@dataclass(frozen=True, kw_only=True, eq=False)
class EpisodeResult:
    plan: TransportPlan
    delta: Matrix
    history: list[float]


def learn_episode(
    theta: Mlp,
    episode: Episode,
    replay: ReplayBuffer,
    cfg: ContinualConfig,
    loss: LossKind | None = None,
) -> EpisodeResult:
    """Jointly fit a soft self re-basing plan and a residual delta on one episode.

    Each step averages C_CL over a current-episode mini-batch and an equally
    sized batch from the replay buffer (when it holds anything).
    """
    loss = loss or LossKind.for_task(episode.train.task)
    rng = np.random.default_rng(cfg.seed + episode.id)
    delta = rng.uniform(0.0, DELTA_INIT_SCALE, size=(theta.param_count, 1))
    params = [np.eye(width) for width in theta.hidden_widths]

    plan_opt = Adam(OptimConfig(learning_rate=cfg.plan_lr))
    delta_opt = SGD(
        OptimConfig(
            kind=OptimKind.SGD,
            learning_rate=cfg.delta_lr,
            weight_decay=cfg.delta_weight_decay,
        )
    )
    batch_size = min(cfg.batch_size, episode.train.size)
    history: list[float] = []

    for epoch in range(cfg.epochs_per_episode):
        for batch in episode.train.batches(batch_size, rng):
            batches = [batch]
            replayed = replay.sample(batch.size, rng)
            if replayed is not None:
                batches.append(replayed)
            soft = TransportPlan(mats=tuple(params), mode=PlanMode.SOFT_PARAMS)
            value, plan_grads, delta_grad = c_cl_gradients(
                delta, soft, theta, batches, loss, cfg.sinkhorn
            )
            params = plan_opt.step(params, plan_grads)
            delta = delta_opt.step([delta], [delta_grad])[0]
            history.append(value)
        logger.debug("episode %d epoch %d: C_CL %.6g", episode.id, epoch, history[-1])

    return EpisodeResult(
        plan=TransportPlan(mats=tuple(params), mode=PlanMode.SOFT_PARAMS),
        delta=delta,
        history=history,
    )


def fuse(theta: Mlp, plan: TransportPlan, delta: Matrix, alpha: float) -> Mlp:
    """(1 - alpha) theta + alpha pi(theta) + delta."""
    if plan.mode != PlanMode.HARD:
        raise InvalidInputError("Fusion requires a hard plan")
    if not 0.0 <= alpha <= 1.0:
        raise InvalidInputError(f"Fusion alpha must lie in [0, 1] (got {alpha})")
    _check_delta(delta, theta)
    flat = (1.0 - alpha) * flatten_params(theta) + alpha * flatten_params(apply_plan(theta, plan))
    return unflatten_params(flat + np.asarray(delta).reshape(-1, 1), theta)
