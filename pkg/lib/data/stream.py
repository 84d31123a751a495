from dataclasses import dataclass

import numpy as np
from ..config.base import ConfigError, DimensionError, InvalidInputError
from ..nn.dataset import Dataset
from .images import ImageSet, rotate


@dataclass(frozen=True, kw_only=True, eq=False)
class Episode:
    id: int
    train: Dataset
    test: Dataset

    def __post_init__(self) -> None:
        if self.train.task != self.test.task:
            raise DimensionError(f"Episode {self.id} mixes task kinds")
        if self.train.in_dim != self.test.in_dim or self.train.out_dim != self.test.out_dim:
            raise DimensionError(f"Episode {self.id} train and test dimensions differ")


def episode_angles(episodes: int) -> list[float]:
    """Evenly spaced rotations from 0 to 180 degrees."""
    if episodes < 1:
        raise ConfigError(f"Episode count must be >= 1 (got {episodes})")
    if episodes == 1:
        return [0.0]
    step = 180.0 / (episodes - 1)
    return [e * step for e in range(episodes)]


def make_rotated_stream(
    base: ImageSet,
    episodes: int,
    train_per_episode: int,
    test_per_episode: int,
    seed: int,
) -> list[Episode]:
    """Domain-incremental stream: each episode is a rotated, disjoint subsample of `base`."""
    angles = episode_angles(episodes)
    if train_per_episode < 1 or test_per_episode < 1:
        raise ConfigError(
            f"Episode sizes must be >= 1 (got {train_per_episode} train, {test_per_episode} test)"
        )
    if train_per_episode + test_per_episode > base.size:
        raise InvalidInputError(
            f"Episode needs {train_per_episode + test_per_episode} images but the base set has {base.size}"
        )

    rng = np.random.default_rng(seed)
    stream: list[Episode] = []
    for e, angle in enumerate(angles):
        order = rng.permutation(base.size)
        train = rotate(base.take(order[:train_per_episode]), angle)
        test = rotate(base.take(order[train_per_episode : train_per_episode + test_per_episode]), angle)
        stream.append(Episode(id=e, train=train.to_dataset(), test=test.to_dataset()))
    return stream
