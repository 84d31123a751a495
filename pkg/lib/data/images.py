from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray
from scipy import ndimage
from ..config.base import DimensionError, InvalidInputError
from ..config.enums import TaskKind
from ..nn.dataset import Dataset, one_hot

CLASSES = 10


@dataclass(frozen=True, kw_only=True, eq=False)
class ImageSet:
    """Gray images (N x rows x cols, values in [0, 1]) with class labels."""

    images: NDArray[np.float64]
    labels: NDArray[np.int64]

    def __post_init__(self) -> None:
        images = np.array(self.images, dtype=np.float64, copy=True)
        labels = np.array(self.labels, dtype=np.int64, copy=True).reshape(-1)
        if images.ndim != 3:
            raise DimensionError(f"Images must be N x rows x cols (got shape {images.shape})")
        if images.shape[0] != labels.size:
            raise DimensionError(
                f"Image and label counts differ ({images.shape[0]} vs {labels.size})"
            )
        if images.size and (images.min() < 0.0 or images.max() > 1.0):
            raise InvalidInputError("Pixel values must lie in [0, 1]")
        if labels.size and (labels.min() < 0 or labels.max() >= CLASSES):
            raise InvalidInputError(f"Labels must lie in [0, {CLASSES})")
        images.flags.writeable = False
        labels.flags.writeable = False
        object.__setattr__(self, "images", images)
        object.__setattr__(self, "labels", labels)

    @property
    def size(self) -> int:
        return self.images.shape[0]

    @property
    def rows(self) -> int:
        return self.images.shape[1]

    @property
    def cols(self) -> int:
        return self.images.shape[2]

    def take(self, indices: Sequence[int] | NDArray[np.int64]) -> "ImageSet":
        idx = np.asarray(indices, dtype=np.int64)
        return ImageSet(images=self.images[idx], labels=self.labels[idx])

    def to_dataset(self) -> Dataset:
        """Flattened pixels as inputs, one-hot labels as targets."""
        return Dataset(
            inputs=self.images.reshape(self.size, -1),
            targets=one_hot(self.labels, CLASSES),
            task=TaskKind.CLASSIFICATION,
        )


def rotate(images: ImageSet, degrees: float) -> ImageSet:
    """Rotate every image clockwise about its center; bilinear, zero outside the frame.

    Samples that land a rounding error outside the grid still blend with the
    edge pixel, so whole turns reproduce the input.
    """
    if degrees == 0.0:
        return ImageSet(images=images.images, labels=images.labels)

    theta = np.deg2rad(degrees)
    cos, sin = np.cos(theta), np.sin(theta)
    # Output pixel (r, c) samples the input at center + R @ ((r, c) - center),
    # which turns the picture clockwise with rows pointing down.
    rotation = np.array([[cos, -sin], [sin, cos]])
    center = np.array([(images.rows - 1) / 2.0, (images.cols - 1) / 2.0])
    matrix = np.eye(3)
    matrix[1:, 1:] = rotation
    offset = np.concatenate([[0.0], center - rotation @ center])

    rotated = ndimage.affine_transform(
        images.images, matrix, offset=offset, order=1, mode="grid-constant", cval=0.0
    )
    return ImageSet(images=np.clip(rotated, 0.0, 1.0), labels=images.labels)
