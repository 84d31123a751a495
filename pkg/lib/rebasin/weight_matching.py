import logging

import numpy as np
from ..config.enums import Objective, PlanMode
from ..nn.matrix import Matrix
from ..nn.mlp import Mlp, require_same_architecture
from ..sinkhorn.hungarian import assignment_matrix, hungarian
from .plan import TransportPlan

logger = logging.getLogger(__name__)


def _layer_objective(a: Mlp, b: Mlp, perms: list[Matrix], i: int) -> Matrix:
    """Linear coefficient M_i of <P_i, M_i> in the alignment of hidden layer i."""
    prev = perms[i - 1] if i > 0 else np.eye(a.input_dim)
    nxt = perms[i + 1] if i + 1 < len(perms) else np.eye(a.output_dim)
    here_a, here_b = a.layers[i], b.layers[i]
    next_a, next_b = a.layers[i + 1], b.layers[i + 1]
    return (
        here_a.weight @ prev @ here_b.weight.T
        + next_a.weight.T @ nxt @ next_b.weight
        + here_a.bias @ here_b.bias.T
    )


def weight_matching(a: Mlp, b: Mlp, max_sweeps: int = 100, seed: int = 0) -> TransportPlan:
    """Coordinate descent on the squared distance, one exact LAP per hidden layer.

    Layers are visited in a seeded random order each sweep; an update is kept
    only when it strictly increases the alignment, so the distance never grows.
    """
    require_same_architecture(a, b)
    rng = np.random.default_rng(seed)
    perms = [np.eye(width) for width in b.hidden_widths]

    for sweep in range(max_sweeps):
        changed = False
        for i in rng.permutation(len(perms)):
            i = int(i)
            weights = _layer_objective(a, b, perms, i)
            candidate = assignment_matrix(hungarian(weights, Objective.MAXIMIZE))
            gain = float(np.sum(candidate * weights) - np.sum(perms[i] * weights))
            if gain > 1e-12 * (1.0 + float(np.abs(weights).sum())):
                perms[i] = candidate
                changed = True
        logger.debug("weight matching sweep %d: %s", sweep, "updated" if changed else "stable")
        if not changed:
            break

    return TransportPlan(mats=tuple(perms), mode=PlanMode.HARD)
