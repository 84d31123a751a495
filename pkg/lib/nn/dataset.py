from collections.abc import Iterator, Sequence
from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray
from ..config.base import ConfigError, DimensionError, InvalidInputError
from ..config.enums import TaskKind
from .matrix import Matrix, as_matrix, frozen


@dataclass(frozen=True, kw_only=True, eq=False)
class Dataset:
    inputs: Matrix
    targets: Matrix
    task: TaskKind

    def __post_init__(self) -> None:
        inputs = frozen(as_matrix(self.inputs, name="inputs"))
        targets = frozen(as_matrix(self.targets, name="targets"))
        if inputs.shape[0] != targets.shape[0]:
            raise DimensionError(
                f"Inputs and targets row counts differ ({inputs.shape[0]} vs {targets.shape[0]})"
            )
        if self.task == TaskKind.CLASSIFICATION:
            ones = (targets == 1.0).sum(axis=1)
            zeros = (targets == 0.0).sum(axis=1)
            if np.any(ones != 1) or np.any(ones + zeros != targets.shape[1]):
                raise InvalidInputError("Classification targets must be one-hot rows")
        object.__setattr__(self, "inputs", inputs)
        object.__setattr__(self, "targets", targets)

    @property
    def size(self) -> int:
        return self.inputs.shape[0]

    @property
    def in_dim(self) -> int:
        return self.inputs.shape[1]

    @property
    def out_dim(self) -> int:
        return self.targets.shape[1]

    def labels(self) -> NDArray[np.int64]:
        if self.task != TaskKind.CLASSIFICATION:
            raise ConfigError("Labels are only defined for classification datasets")
        return np.argmax(self.targets, axis=1).astype(np.int64)

    def take(self, indices: Sequence[int] | NDArray[np.int64]) -> "Dataset":
        idx = np.asarray(indices, dtype=np.int64)
        if idx.size == 0:
            raise InvalidInputError("Cannot take an empty subset of a dataset")
        return Dataset(inputs=self.inputs[idx], targets=self.targets[idx], task=self.task)

    def batches(self, batch_size: int, rng: np.random.Generator) -> Iterator["Dataset"]:
        """Mini-batches of a fresh seeded permutation; the last one may be short."""
        if batch_size < 1:
            raise ConfigError(f"Batch size must be >= 1 (got {batch_size})")
        order = rng.permutation(self.size)
        for start in range(0, self.size, batch_size):
            yield self.take(order[start : start + batch_size])

    def sample(self, batch_size: int, rng: np.random.Generator) -> "Dataset":
        count = min(batch_size, self.size)
        return self.take(rng.choice(self.size, size=count, replace=False))


def one_hot(labels: Sequence[int] | NDArray[np.int64], classes: int) -> Matrix:
    idx = np.asarray(labels, dtype=np.int64)
    if np.any(idx < 0) or np.any(idx >= classes):
        raise InvalidInputError(f"Labels must lie in [0, {classes})")
    result = np.zeros((idx.size, classes))
    result[np.arange(idx.size), idx] = 1.0
    return result


def concat_datasets(parts: Sequence[Dataset]) -> Dataset:
    if not parts:
        raise InvalidInputError("Cannot concatenate an empty list of datasets")
    task = parts[0].task
    for part in parts:
        if part.task != task or part.in_dim != parts[0].in_dim or part.out_dim != parts[0].out_dim:
            raise DimensionError("Datasets to concatenate must share task and dimensions")
    return Dataset(
        inputs=np.concatenate([part.inputs for part in parts]),
        targets=np.concatenate([part.targets for part in parts]),
        task=task,
    )
