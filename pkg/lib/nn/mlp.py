from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np
from ..config.base import DimensionError, InvalidArchitectureError
from ..config.enums import Activation, InitKind
from .matrix import Matrix, as_matrix, frozen
from .tape import Tape, Var


@dataclass(frozen=True, kw_only=True, eq=False)
class Layer:
    weight: Matrix
    bias: Matrix

    def __post_init__(self) -> None:
        weight = frozen(as_matrix(self.weight, name="weight"))
        bias = frozen(as_matrix(self.bias, name="bias"))
        if bias.shape != (weight.shape[0], 1):
            raise DimensionError(
                f"Invalid bias shape (expected ({weight.shape[0]}, 1), got {bias.shape})"
            )
        object.__setattr__(self, "weight", weight)
        object.__setattr__(self, "bias", bias)

    @property
    def fan_in(self) -> int:
        return self.weight.shape[1]

    @property
    def fan_out(self) -> int:
        return self.weight.shape[0]


@dataclass(frozen=True, kw_only=True, eq=False)
class Mlp:
    """Feedforward network with `activation` on hidden layers and an affine output."""

    layers: tuple[Layer, ...]
    activation: Activation

    def __post_init__(self) -> None:
        if len(self.layers) < 2:
            raise InvalidArchitectureError(
                f"An Mlp needs at least one hidden and one output layer (got {len(self.layers)} layers)"
            )
        for i in range(1, len(self.layers)):
            if self.layers[i].fan_in != self.layers[i - 1].fan_out:
                raise DimensionError(
                    f"Layer {i} expects {self.layers[i].fan_in} inputs but layer {i - 1} has {self.layers[i - 1].fan_out} outputs"
                )

    @property
    def dims(self) -> list[int]:
        return [self.layers[0].fan_in] + [layer.fan_out for layer in self.layers]

    @property
    def hidden_widths(self) -> list[int]:
        return [layer.fan_out for layer in self.layers[:-1]]

    @property
    def input_dim(self) -> int:
        return self.layers[0].fan_in

    @property
    def output_dim(self) -> int:
        return self.layers[-1].fan_out

    @property
    def param_count(self) -> int:
        return sum(layer.weight.size + layer.bias.size for layer in self.layers)

    def arrays(self) -> list[Matrix]:
        """Parameters in canonical order W_1, b_1, ..., W_h, b_h."""
        result: list[Matrix] = []
        for layer in self.layers:
            result += [layer.weight, layer.bias]
        return result

    def equals(self, other: "Mlp") -> bool:
        """Bitwise equality of architecture and parameters."""
        if self.activation != other.activation or self.dims != other.dims:
            return False
        return all(np.array_equal(a, b) for a, b in zip(self.arrays(), other.arrays()))

    @staticmethod
    def from_arrays(arrays: Sequence[Matrix], activation: Activation) -> "Mlp":
        if len(arrays) % 2 != 0:
            raise DimensionError(f"Expected weight/bias pairs (got {len(arrays)} arrays)")
        return Mlp(
            layers=tuple(
                Layer(weight=arrays[i], bias=arrays[i + 1]) for i in range(0, len(arrays), 2)
            ),
            activation=activation,
        )


def init_mlp(dims: Sequence[int], activation: Activation, init: InitKind, seed: int) -> Mlp:
    if len(dims) < 3:
        raise InvalidArchitectureError(
            f"An Mlp needs input, hidden and output widths (got dims {list(dims)})"
        )
    if any(width < 1 for width in dims):
        raise InvalidArchitectureError(f"Layer widths must be >= 1 (got dims {list(dims)})")

    rng = np.random.default_rng(seed)
    layers: list[Layer] = []
    for fan_in, fan_out in zip(dims[:-1], dims[1:]):
        if init == InitKind.STANDARD_NORMAL:
            weight = rng.standard_normal((fan_out, fan_in))
            bias = rng.standard_normal((fan_out, 1))
        else:
            weight = rng.normal(0.0, np.sqrt(2.0 / (fan_in + fan_out)), (fan_out, fan_in))
            bias = np.zeros((fan_out, 1))
        layers.append(Layer(weight=weight, bias=bias))
    return Mlp(layers=tuple(layers), activation=activation)


def _activate(values: Matrix, activation: Activation) -> Matrix:
    if activation == Activation.TANH:
        return np.tanh(values)
    return np.maximum(values, 0.0)


def forward(model: Mlp, batch: Matrix) -> Matrix:
    batch = as_matrix(batch, name="batch")
    if batch.shape[1] != model.input_dim:
        raise DimensionError(
            f"Batch width does not match model input (expected {model.input_dim}, got {batch.shape[1]})"
        )
    out = batch
    last = len(model.layers) - 1
    for i, layer in enumerate(model.layers):
        out = out @ layer.weight.T + layer.bias.T
        if i != last:
            out = _activate(out, model.activation)
    return out


def record_forward(
    tape: Tape, params: Sequence[tuple[Var, Var]], activation: Activation, batch: Var
) -> Var:
    """Record the forward pass of (weight, bias) pairs on a tape."""
    out = batch
    last = len(params) - 1
    for i, (weight, bias) in enumerate(params):
        out = tape.add_bias(out @ weight.T, bias)
        if i != last:
            out = tape.tanh(out) if activation == Activation.TANH else tape.relu(out)
    return out


def constant_params(tape: Tape, model: Mlp) -> list[tuple[Var, Var]]:
    return [(tape.constant(layer.weight), tape.constant(layer.bias)) for layer in model.layers]


def flatten_params(model: Mlp) -> Matrix:
    """The parameter vector theta in R^d as a (d x 1) column."""
    return np.concatenate([array.reshape(-1) for array in model.arrays()]).reshape(-1, 1)


def param_shapes(model: Mlp) -> list[tuple[int, int]]:
    return [(array.shape[0], array.shape[1]) for array in model.arrays()]


def unflatten_params(flat: Matrix, like: Mlp) -> Mlp:
    flat = np.asarray(flat, dtype=np.float64).reshape(-1)
    if flat.size != like.param_count:
        raise DimensionError(
            f"Parameter vector length mismatch (expected {like.param_count}, got {flat.size})"
        )
    arrays: list[Matrix] = []
    offset = 0
    for rows, cols in param_shapes(like):
        arrays.append(flat[offset : offset + rows * cols].reshape(rows, cols))
        offset += rows * cols
    return Mlp.from_arrays(arrays, like.activation)


def add_flat(model: Mlp, delta: Matrix) -> Mlp:
    return unflatten_params(flatten_params(model) + np.asarray(delta).reshape(-1, 1), model)


def require_same_architecture(a: Mlp, b: Mlp) -> None:
    if a.dims != b.dims or a.activation != b.activation:
        raise DimensionError(
            f"Architecture mismatch (got {a.dims}/{a.activation.value} and {b.dims}/{b.activation.value})"
        )
