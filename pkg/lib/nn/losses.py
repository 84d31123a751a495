import numpy as np
from ..config.base import ConfigError, DimensionError
from ..config.enums import LossKind, TaskKind
from .dataset import Dataset
from .matrix import Matrix
from .mlp import Mlp, forward
from .tape import Tape, Var, logsumexp


def check_compatible(model: Mlp, data: Dataset, loss: LossKind) -> None:
    if loss.task() != data.task:
        raise ConfigError(
            f"Loss {loss.value} cannot be used with a {data.task.value} dataset"
        )
    if model.input_dim != data.in_dim or model.output_dim != data.out_dim:
        raise DimensionError(
            f"Model widths {model.input_dim}->{model.output_dim} do not match data {data.in_dim}->{data.out_dim}"
        )


def loss_value(outputs: Matrix, targets: Matrix, loss: LossKind) -> float:
    """Mean per-example loss of precomputed network outputs."""
    if loss == LossKind.MSE:
        return float(np.mean((outputs - targets) ** 2))
    log_probs = outputs - logsumexp(outputs, axis=1)
    return float(-np.sum(targets * log_probs) / outputs.shape[0])


def cost(model: Mlp, data: Dataset, loss: LossKind) -> float:
    check_compatible(model, data, loss)
    return loss_value(forward(model, data.inputs), data.targets, loss)


def record_loss(tape: Tape, outputs: Var, targets: Matrix, loss: LossKind) -> Var:
    target = tape.constant(targets)
    if loss == LossKind.MSE:
        return (outputs - target).square_sum() * (1.0 / targets.size)
    log_probs = tape.log_normalize_rows(outputs)
    return (log_probs * target).sum() * (-1.0 / targets.shape[0])


def accuracy(model: Mlp, data: Dataset) -> float:
    if data.task != TaskKind.CLASSIFICATION:
        raise ConfigError("Accuracy is only defined for classification datasets")
    predicted = np.argmax(forward(model, data.inputs), axis=1)
    return float(np.mean(predicted == data.labels()))
