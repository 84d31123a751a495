import numpy as np
from ..config.base import ConfigError
from ..data.sampling import subsample_per_class
from ..nn.dataset import Dataset, concat_datasets


class ReplayBuffer:
    """Fixed per-class samples of every closed episode."""

    _per_class: int
    _parts: list[Dataset]
    _stored: Dataset | None

    def __init__(self, per_class: int) -> None:
        super().__init__()
        if per_class < 0:
            raise ConfigError(f"Replay examples per class must be >= 0 (got {per_class})")
        self._per_class = per_class
        self._parts = []
        self._stored = None

    @property
    def per_class(self) -> int:
        return self._per_class

    @property
    def episodes(self) -> int:
        return len(self._parts)

    @property
    def size(self) -> int:
        return 0 if self._stored is None else self._stored.size

    def close_episode(self, data: Dataset, seed: int) -> None:
        """Store min(k, available) examples per class of a finished episode."""
        if self._per_class == 0:
            return
        self._parts.append(subsample_per_class(data, self._per_class, seed))
        # Rebuilt once per episode, read by every batch
        self._stored = concat_datasets(self._parts)

    def dataset(self) -> Dataset | None:
        return self._stored

    def sample(self, batch_size: int, rng: np.random.Generator) -> Dataset | None:
        """Uniform draw without replacement from the whole buffer, capped at its size."""
        if self._stored is None:
            return None
        return self._stored.sample(batch_size, rng)
