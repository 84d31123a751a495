import csv
from pathlib import Path

import numpy as np
from ..config.base import ConfigError, InvalidInputError
from ..config.enums import PolyKind, TaskKind
from ..nn.dataset import Dataset
from ..nn.matrix import Matrix

# Sampling interval of x for each task
INTERVALS: dict[PolyKind, tuple[float, float]] = {
    PolyKind.POL1: (-4.0, -2.0),
    PolyKind.POL3: (2.0, 4.0),
}

DEFAULT_NOISE_SD = 0.05


def poly_target(kind: PolyKind, x: Matrix) -> Matrix:
    if kind == PolyKind.POL1:
        return x + 3.0
    return (x - 3.0) ** 3


def gen_poly(kind: PolyKind, n: int, noise_sd: float = DEFAULT_NOISE_SD, seed: int = 0) -> Dataset:
    """Noisy samples of y = x + 3 on (-4, -2) or y = (x - 3)^3 on (2, 4)."""
    if n < 1:
        raise ConfigError(f"Sample count must be >= 1 (got {n})")
    if noise_sd < 0.0:
        raise ConfigError(f"Noise standard deviation must be >= 0 (got {noise_sd})")

    rng = np.random.default_rng(seed)
    low, high = INTERVALS[kind]
    x = rng.uniform(low, high, size=(n, 1))
    y = poly_target(kind, x)
    if noise_sd > 0.0:
        y = y + rng.normal(0.0, noise_sd, size=(n, 1))
    return Dataset(inputs=x, targets=y, task=TaskKind.REGRESSION)


def write_poly_csv(path: Path, data: Dataset) -> None:
    if data.in_dim != 1 or data.out_dim != 1:
        raise InvalidInputError(
            f"Polynomial CSV export needs 1-d inputs and targets (got {data.in_dim} and {data.out_dim})"
        )
    with path.open("w", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(["x", "y"])
        for x, y in zip(data.inputs[:, 0], data.targets[:, 0]):
            writer.writerow([repr(float(x)), repr(float(y))])
