from collections.abc import Sequence

import numpy as np
from ..config.base import ConfigError, InvalidInputError
from ..config.enums import PlanMode, TaskKind
from ..nn.dataset import Dataset
from ..rebasin.plan import TransportPlan


def sample_plan(hidden_widths: Sequence[int], seed: int) -> TransportPlan:
    """Uniformly random permutation matrix per hidden layer."""
    if any(width < 1 for width in hidden_widths):
        raise InvalidInputError(f"Plan widths must be >= 1 (got {list(hidden_widths)})")
    rng = np.random.default_rng(seed)
    mats = tuple(np.eye(width)[rng.permutation(width)] for width in hidden_widths)
    return TransportPlan(mats=mats, mode=PlanMode.HARD)


def subsample_per_class(data: Dataset, k: int, seed: int) -> Dataset:
    """min(k, available) rows per class, drawn without replacement, in shuffled order."""
    if data.task != TaskKind.CLASSIFICATION:
        raise ConfigError("Per-class subsampling requires a classification dataset")
    if k < 1:
        raise ConfigError(f"Examples per class must be >= 1 (got {k})")

    rng = np.random.default_rng(seed)
    labels = data.labels()
    chosen: list[int] = []
    for label in np.unique(labels):
        rows = np.flatnonzero(labels == label)
        count = min(k, rows.size)
        chosen += [int(row) for row in rng.choice(rows, size=count, replace=False)]
    return data.take(rng.permutation(np.asarray(chosen, dtype=np.int64)))
