from collections.abc import Sequence

import numpy as np
from ..config.base import ConfigError, InvalidInputError
from ..config.enums import CostKind, LossKind, PlanMode
from ..config.sinkhorn import SinkhornConfig
from ..nn.dataset import Dataset
from ..nn.losses import check_compatible, cost, record_loss
from ..nn.matrix import Matrix
from ..nn.mlp import Mlp, constant_params, record_forward, require_same_architecture
from ..nn.tape import Tape, Var
from .plan import TransportPlan, apply_plan, record_apply_plan, record_soft_plan


def interpolate(a: Mlp, b: Mlp, lam: float) -> Mlp:
    """(1 - lam) a + lam b, entrywise over every weight and bias."""
    require_same_architecture(a, b)
    if lam == 0.0:
        return a
    if lam == 1.0:
        return b
    arrays = [(1.0 - lam) * x + lam * y for x, y in zip(a.arrays(), b.arrays())]
    return Mlp.from_arrays(arrays, a.activation)


def squared_distance(a: Mlp, b: Mlp) -> float:
    require_same_architecture(a, b)
    return float(sum(np.sum((x - y) ** 2) for x, y in zip(a.arrays(), b.arrays())))


# Interpolation weight of the mid cost
MID_LAMBDA = 0.5


def _check_lambda(lam: float) -> None:
    if not 0.0 <= lam <= 1.0:
        raise InvalidInputError(f"Interpolation weight must lie in [0, 1] (got {lam})")


def _require_data(kind: CostKind, batch: Dataset | None) -> Dataset:
    if batch is None:
        raise ConfigError(f"Cost {kind.value} requires a dataset")
    return batch


def c_l2(plan: TransportPlan, a: Mlp, b: Mlp, sinkhorn_cfg: SinkhornConfig | None = None) -> float:
    """||theta_A - pi(theta_B)||^2 over all weights and biases."""
    return squared_distance(a, apply_plan(b, plan, sinkhorn_cfg))


def c_rnd(
    plan: TransportPlan,
    a: Mlp,
    b: Mlp,
    batch: Dataset,
    loss: LossKind,
    lam: float,
    sinkhorn_cfg: SinkhornConfig | None = None,
) -> float:
    """Task cost of the lam-interpolation between a and the re-based b."""
    _check_lambda(lam)
    check_compatible(a, batch, loss)
    return cost(interpolate(a, apply_plan(b, plan, sinkhorn_cfg), lam), batch, loss)


def c_mid(
    plan: TransportPlan,
    a: Mlp,
    b: Mlp,
    batch: Dataset,
    loss: LossKind,
    sinkhorn_cfg: SinkhornConfig | None = None,
) -> float:
    return c_rnd(plan, a, b, batch, loss, MID_LAMBDA, sinkhorn_cfg)


def evaluate_cost(
    kind: CostKind,
    plan: TransportPlan,
    a: Mlp,
    b: Mlp,
    batch: Dataset | None = None,
    loss: LossKind | None = None,
    lam: float = 0.5,
    sinkhorn_cfg: SinkhornConfig | None = None,
) -> float:
    if kind == CostKind.L2:
        return c_l2(plan, a, b, sinkhorn_cfg)
    data = _require_data(kind, batch)
    loss = loss or LossKind.for_task(data.task)
    if kind == CostKind.MID:
        return c_mid(plan, a, b, data, loss, sinkhorn_cfg)
    return c_rnd(plan, a, b, data, loss, lam, sinkhorn_cfg)


def hard_cost(
    kind: CostKind,
    plan: TransportPlan,
    a: Mlp,
    b: Mlp,
    batch: Dataset | None = None,
    loss: LossKind | None = None,
    lam: float = 0.5,
) -> float:
    """Evaluate a cost on the permuted (not relaxed) re-basing of b."""
    if plan.mode != PlanMode.HARD:
        raise InvalidInputError("hard_cost requires a hard plan")
    return evaluate_cost(kind, plan, a, b, batch, loss, lam)


def record_cost(
    tape: Tape,
    kind: CostKind,
    perms: Sequence[Var],
    a: Mlp,
    b: Mlp,
    batch: Dataset | None,
    loss: LossKind | None,
    lam: float,
) -> Var:
    """Record a re-basin cost as a function of the (already relaxed) plan matrices."""
    rebased = record_apply_plan(tape, constant_params(tape, b), perms)
    anchor = constant_params(tape, a)

    if kind == CostKind.L2:
        terms = [
            (wa - wb).square_sum() + (ba - bb).square_sum()
            for (wa, ba), (wb, bb) in zip(anchor, rebased)
        ]
        total = terms[0]
        for term in terms[1:]:
            total = total + term
        return total

    data = _require_data(kind, batch)
    loss = loss or LossKind.for_task(data.task)
    check_compatible(a, data, loss)
    if kind == CostKind.MID:
        lam = MID_LAMBDA
    _check_lambda(lam)
    mixed = [
        (wa * (1.0 - lam) + wb * lam, ba * (1.0 - lam) + bb * lam)
        for (wa, ba), (wb, bb) in zip(anchor, rebased)
    ]
    outputs = record_forward(tape, mixed, a.activation, tape.constant(data.inputs))
    return record_loss(tape, outputs, data.targets, loss)


def cost_and_gradients(
    kind: CostKind,
    plan: TransportPlan,
    a: Mlp,
    b: Mlp,
    sinkhorn_cfg: SinkhornConfig,
    batch: Dataset | None = None,
    loss: LossKind | None = None,
    lam: float = 0.5,
) -> tuple[float, list[Matrix]]:
    """Soft cost of a plan and its gradient with respect to the plan parameters."""
    require_same_architecture(a, b)
    plan.check_model(b)
    tape = Tape()
    leaves, perms = record_soft_plan(tape, plan, sinkhorn_cfg)
    objective = record_cost(tape, kind, perms, a, b, batch, loss, lam)
    return objective.item(), tape.gradients(objective, leaves)
