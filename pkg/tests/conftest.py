import numpy as np
import pytest

from lib.config.enums import Activation, InitKind, TaskKind
from lib.nn.dataset import Dataset, one_hot
from lib.nn.mlp import Mlp, init_mlp


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(42)


@pytest.fixture
def tanh_model() -> Mlp:
    """2 -> 4 -> 3 -> 3 network with smooth activations, for gradient checks."""
    return init_mlp([2, 4, 3, 3], Activation.TANH, InitKind.STANDARD_NORMAL, 7)


@pytest.fixture
def regression_data() -> Dataset:
    rng = np.random.default_rng(3)
    x = rng.uniform(-1.0, 1.0, size=(16, 1))
    return Dataset(inputs=x, targets=2.0 * x - 0.5, task=TaskKind.REGRESSION)


@pytest.fixture
def classification_data() -> Dataset:
    """Three separable blobs in the plane."""
    rng = np.random.default_rng(5)
    centers = np.array([[2.0, 0.0], [-1.0, 1.7], [-1.0, -1.7]])
    labels = np.repeat(np.arange(3), 12)
    inputs = centers[labels] + 0.3 * rng.standard_normal((labels.size, 2))
    return Dataset(inputs=inputs, targets=one_hot(labels, 3), task=TaskKind.CLASSIFICATION)
