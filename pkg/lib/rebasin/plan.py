from collections.abc import Sequence
from dataclasses import dataclass
from typing import Any, cast

import numpy as np
from ..config.base import DimensionError, FormatError, InvalidInputError
from ..config.codec import config_from_dict, config_to_dict
from ..config.enums import PlanMode
from ..config.sinkhorn import SinkhornConfig
from ..nn.checkpoint import Checkpoint
from ..nn.matrix import Matrix, as_matrix, frozen, require_square
from ..nn.mlp import Layer, Mlp
from ..nn.tape import Tape, Var
from ..sinkhorn.hungarian import round_plan
from ..sinkhorn.operator import record_sinkhorn, sinkhorn


def _is_permutation(mat: Matrix) -> bool:
    binary = np.all((mat == 0.0) | (mat == 1.0))
    return bool(binary and np.all(mat.sum(axis=0) == 1.0) and np.all(mat.sum(axis=1) == 1.0))


@dataclass(frozen=True, kw_only=True, eq=False)
class TransportPlan:
    """One square matrix per hidden layer; P_0 and P_h are implicitly the identity.

    In soft_params mode the matrices are free parameters that go through the
    Sinkhorn operator before use; in hard mode they are permutation matrices.
    """

    mats: tuple[Matrix, ...]
    mode: PlanMode

    def __post_init__(self) -> None:
        mats: list[Matrix] = []
        for i, mat in enumerate(self.mats):
            mat = frozen(as_matrix(mat, name=f"plan matrix {i}"))
            require_square(mat, name=f"plan matrix {i}")
            if self.mode == PlanMode.HARD and not _is_permutation(mat):
                raise InvalidInputError(f"Hard plan matrix {i} is not a permutation matrix")
            mats.append(mat)
        object.__setattr__(self, "mats", tuple(mats))

    @property
    def sides(self) -> list[int]:
        return [mat.shape[0] for mat in self.mats]

    def check_model(self, model: Mlp) -> None:
        if self.sides != model.hidden_widths:
            raise DimensionError(
                f"Plan sides do not match hidden widths (expected {model.hidden_widths}, got {self.sides})"
            )

    def permutations(self, sinkhorn_cfg: SinkhornConfig | None = None) -> list[Matrix]:
        """The matrices applied to a model: S_tau(X_i) in soft mode, P_i in hard mode."""
        if self.mode == PlanMode.HARD:
            return list(self.mats)
        cfg = sinkhorn_cfg or SinkhornConfig()
        return [sinkhorn(mat, cfg) for mat in self.mats]


def identity_plan(model: Mlp, mode: PlanMode = PlanMode.HARD) -> TransportPlan:
    return TransportPlan(mats=tuple(np.eye(width) for width in model.hidden_widths), mode=mode)


def inverse_plan(plan: TransportPlan) -> TransportPlan:
    if plan.mode != PlanMode.HARD:
        raise InvalidInputError("Only hard plans can be inverted")
    return TransportPlan(mats=tuple(mat.T for mat in plan.mats), mode=PlanMode.HARD)


def permute_arrays(arrays: Sequence[tuple[Matrix, Matrix]], perms: Sequence[Matrix]) -> list[Layer]:
    """W'_i = P_i W_i P_{i-1}^T and b'_i = P_i b_i with identity boundaries."""
    layers: list[Layer] = []
    last = len(arrays) - 1
    for i, (weight, bias) in enumerate(arrays):
        if i != last:
            weight = perms[i] @ weight
            bias = perms[i] @ bias
        if i != 0:
            weight = weight @ perms[i - 1].T
        layers.append(Layer(weight=weight, bias=bias))
    return layers


def apply_plan(model: Mlp, plan: TransportPlan, sinkhorn_cfg: SinkhornConfig | None = None) -> Mlp:
    plan.check_model(model)
    arrays = [(layer.weight, layer.bias) for layer in model.layers]
    return Mlp(
        layers=tuple(permute_arrays(arrays, plan.permutations(sinkhorn_cfg))),
        activation=model.activation,
    )


def record_soft_plan(tape: Tape, plan: TransportPlan, sinkhorn_cfg: SinkhornConfig) -> tuple[list[Var], list[Var]]:
    """Plan parameters as tape leaves and their Sinkhorn images."""
    if plan.mode != PlanMode.SOFT_PARAMS:
        raise InvalidInputError("Only soft plans carry differentiable parameters")
    leaves = [tape.leaf(mat) for mat in plan.mats]
    return leaves, [record_sinkhorn(tape, leaf, sinkhorn_cfg) for leaf in leaves]


def record_apply_plan(
    tape: Tape, params: Sequence[tuple[Var, Var]], perms: Sequence[Var]
) -> list[tuple[Var, Var]]:
    """Taped counterpart of `permute_arrays`."""
    result: list[tuple[Var, Var]] = []
    last = len(params) - 1
    for i, (weight, bias) in enumerate(params):
        if i != last:
            weight = perms[i] @ weight
            bias = perms[i] @ bias
        if i != 0:
            weight = weight @ perms[i - 1].T
        result.append((weight, bias))
    return result


def plan_checkpoint(
    plan: TransportPlan, sinkhorn_cfg: SinkhornConfig, model: Mlp | None = None
) -> Checkpoint:
    return Checkpoint(
        model=model,
        plan_mode=plan.mode.value,
        plan=plan.mats,
        meta={"sinkhorn": config_to_dict(sinkhorn_cfg)},
    )


def plan_from_checkpoint(ckpt: Checkpoint) -> tuple[TransportPlan, SinkhornConfig]:
    if ckpt.plan_mode is None:
        raise FormatError("Checkpoint holds no transportation plan", "plan")
    try:
        mode = PlanMode(ckpt.plan_mode)
    except ValueError:
        raise FormatError(f"Unknown plan mode {ckpt.plan_mode!r}", "plan")
    raw = cast(dict[str, Any], ckpt.meta.get("sinkhorn", {}))
    return TransportPlan(mats=ckpt.plan, mode=mode), config_from_dict(SinkhornConfig, raw)


def harden(soft: TransportPlan, sinkhorn_cfg: SinkhornConfig) -> TransportPlan:
    """Round each relaxed matrix S_tau(X_i) to its best permutation matrix."""
    if soft.mode == PlanMode.HARD:
        return soft
    return TransportPlan(
        mats=tuple(round_plan(mat) for mat in soft.permutations(sinkhorn_cfg)),
        mode=PlanMode.HARD,
    )
