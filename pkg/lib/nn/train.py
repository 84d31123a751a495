import logging

import numpy as np
from ..config.base import ConfigError
from ..config.enums import LossKind
from ..config.optim import OptimConfig
from .dataset import Dataset
from .losses import check_compatible, record_loss
from .mlp import Mlp, record_forward
from .optim import EarlyStopping, make_optimizer
from .tape import Tape

logger = logging.getLogger(__name__)


def train(
    model: Mlp,
    data: Dataset,
    loss: LossKind,
    optim: OptimConfig,
    epochs: int,
    batch_size: int,
    seed: int,
) -> tuple[Mlp, list[float]]:
    """Mini-batch training; returns the model and the per-epoch mean loss."""
    check_compatible(model, data, loss)
    if batch_size < 1 or batch_size > data.size:
        raise ConfigError(f"Batch size must lie in [1, {data.size}] (got {batch_size})")
    if epochs < 0:
        raise ConfigError(f"Epoch count must be >= 0 (got {epochs})")

    rng = np.random.default_rng(seed)
    optimizer = make_optimizer(optim)
    stopper = EarlyStopping(optim.early_stop)
    arrays = model.arrays()
    history: list[float] = []

    for epoch in range(epochs):
        total = 0.0
        for batch in data.batches(batch_size, rng):
            tape = Tape()
            leaves = [tape.leaf(array) for array in arrays]
            params = list(zip(leaves[0::2], leaves[1::2]))
            outputs = record_forward(tape, params, model.activation, tape.constant(batch.inputs))
            objective = record_loss(tape, outputs, batch.targets, loss)
            grads = tape.gradients(objective, leaves)
            arrays = optimizer.step(arrays, grads)
            total += objective.item() * batch.size

        history.append(total / data.size)
        logger.debug("epoch %d: loss %.6g", epoch, history[-1])
        if stopper.update(history[-1]):
            logger.debug("early stop after epoch %d", epoch)
            break

    return Mlp.from_arrays(arrays, model.activation), history


