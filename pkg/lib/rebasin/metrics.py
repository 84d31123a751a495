import numpy as np
from ..nn.mlp import Mlp, require_same_architecture
from .plan import TransportPlan


def l1_distance(a: Mlp, b: Mlp) -> float:
    """Sum of absolute entrywise differences over all parameters (unscaled)."""
    require_same_architecture(a, b)
    return float(sum(np.sum(np.abs(x - y)) for x, y in zip(a.arrays(), b.arrays())))


def recovered(plan: TransportPlan, truth: TransportPlan) -> bool:
    """True when every matrix of `plan` equals the corresponding one of `truth`."""
    return plan.sides == truth.sides and all(
        np.array_equal(p, q) for p, q in zip(plan.mats, truth.mats)
    )
