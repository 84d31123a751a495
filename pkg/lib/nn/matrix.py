from typing import Any

import numpy as np
from numpy.typing import NDArray
from ..config.base import DimensionError, InvalidInputError

type Matrix = NDArray[np.float64]


def as_matrix(values: Any, *, name: str = "matrix") -> Matrix:
    """Coerce to a 2-D float64 array with at least one row and column."""
    arr = np.asarray(values, dtype=np.float64)
    if arr.ndim == 1:
        arr = arr.reshape(-1, 1)
    if arr.ndim != 2:
        raise DimensionError(f"{name} must be 2-dimensional (got {arr.ndim} dimensions)")
    if arr.shape[0] < 1 or arr.shape[1] < 1:
        raise DimensionError(f"{name} must have at least one row and column (got {arr.shape})")
    return arr


def frozen(values: Matrix) -> Matrix:
    arr = np.array(values, dtype=np.float64, copy=True)
    arr.flags.writeable = False
    return arr


def require_finite(values: Matrix, *, name: str = "matrix") -> None:
    if not np.all(np.isfinite(values)):
        raise InvalidInputError(f"{name} contains NaN or Inf entries")


def require_square(values: Matrix, *, name: str = "matrix") -> None:
    if values.ndim != 2 or values.shape[0] != values.shape[1]:
        raise DimensionError(f"{name} must be square (got shape {values.shape})")


def require_shape(values: Matrix, shape: tuple[int, int], *, name: str = "matrix") -> None:
    if values.shape != shape:
        raise DimensionError(f"Invalid shape for {name} (expected {shape}, got {values.shape})")
