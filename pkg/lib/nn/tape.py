from collections.abc import Callable, Sequence
from dataclasses import dataclass
from enum import Enum
from typing import Any, cast, override

import numpy as np
from scipy import special
from ..config.base import DimensionError, UsageError
from .matrix import Matrix, as_matrix

type VJP = Callable[[Matrix], Matrix]


@dataclass(frozen=True, eq=True)
class TapeOpcodeConfig:
    code: int
    arity: int


class TapeOpcode(Enum):
    LEAF = TapeOpcodeConfig(0x00, 0)
    CONSTANT = TapeOpcodeConfig(0x01, 0)
    ADD = TapeOpcodeConfig(0x02, 2)
    SUBTRACT = TapeOpcodeConfig(0x03, 2)
    MULTIPLY = TapeOpcodeConfig(0x04, 2)
    SCALE = TapeOpcodeConfig(0x05, 1)
    MATMUL = TapeOpcodeConfig(0x06, 2)
    TRANSPOSE = TapeOpcodeConfig(0x07, 1)
    ADD_BIAS = TapeOpcodeConfig(0x08, 2)
    TANH = TapeOpcodeConfig(0x09, 1)
    RELU = TapeOpcodeConfig(0x0A, 1)
    EXP = TapeOpcodeConfig(0x0B, 1)
    LOG = TapeOpcodeConfig(0x0C, 1)
    NORMALIZE_ROWS = TapeOpcodeConfig(0x0D, 1)
    NORMALIZE_COLS = TapeOpcodeConfig(0x0E, 1)
    LOG_NORMALIZE_ROWS = TapeOpcodeConfig(0x0F, 1)
    LOG_NORMALIZE_COLS = TapeOpcodeConfig(0x10, 1)
    SUM = TapeOpcodeConfig(0x11, 1)
    SLICE = TapeOpcodeConfig(0x12, 1)
    CUSTOM = TapeOpcodeConfig(0x13, 1)


@dataclass(frozen=True, kw_only=True)
class TapeNode:
    opcode: TapeOpcode
    inputs: tuple[int, ...]
    value: Matrix
    params: tuple[Any, ...] = ()
    differentiable: bool = False

    @override
    def __repr__(self) -> str:
        args = ", ".join(f"%{i}" for i in self.inputs)
        return f"{self.opcode.name} {args} -> {self.value.shape}"


class Var:
    """Handle to a node recorded on a Tape."""

    _tape: "Tape"
    _index: int

    def __init__(self, tape: "Tape", index: int) -> None:
        super().__init__()
        self._tape = tape
        self._index = index

    @property
    def tape(self) -> "Tape":
        return self._tape

    @property
    def index(self) -> int:
        return self._index

    @property
    def value(self) -> Matrix:
        return self._tape.node(self._index).value

    @property
    def shape(self) -> tuple[int, int]:
        rows, cols = self.value.shape
        return rows, cols

    def item(self) -> float:
        if self.shape != (1, 1):
            raise DimensionError(f"Only 1x1 values convert to scalars (got {self.shape})")
        return float(self.value[0, 0])

    @property
    def T(self) -> "Var":
        return self._tape.transpose(self)

    def __add__(self, other: "Var") -> "Var":
        return self._tape.add(self, other)

    def __sub__(self, other: "Var") -> "Var":
        return self._tape.subtract(self, other)

    def __mul__(self, other: "Var | float") -> "Var":
        if isinstance(other, Var):
            return self._tape.multiply(self, other)
        return self._tape.scale(self, other)

    def __rmul__(self, other: float) -> "Var":
        return self._tape.scale(self, other)

    def __neg__(self) -> "Var":
        return self._tape.scale(self, -1.0)

    def __matmul__(self, other: "Var") -> "Var":
        return self._tape.matmul(self, other)

    def sum(self) -> "Var":
        return self._tape.sum(self)

    def mean(self) -> "Var":
        rows, cols = self.shape
        return self._tape.scale(self._tape.sum(self), 1.0 / (rows * cols))

    def square_sum(self) -> "Var":
        return self._tape.sum(self._tape.multiply(self, self))

    @override
    def __repr__(self) -> str:
        return f"%{self._index} = {self._tape.node(self._index)!r}"


class Tape:
    """Single-threaded record of primitive matrix operations.

    Nodes are appended in evaluation order, so every input of a node precedes
    it. `gradients` replays the record backwards to apply the chain rule.
    """

    _nodes: list[TapeNode]

    def __init__(self) -> None:
        super().__init__()
        self._nodes = []

    def __len__(self) -> int:
        return len(self._nodes)

    def node(self, index: int) -> TapeNode:
        return self._nodes[index]

    @override
    def __repr__(self) -> str:
        lines = [f"%{i} = {node!r}" for i, node in enumerate(self._nodes)]
        return f"# Begin tape\n{'\n'.join(lines)}\n# End tape"

    def _push(
        self,
        opcode: TapeOpcode,
        inputs: Sequence[Var],
        value: Matrix,
        params: tuple[Any, ...] = (),
        *,
        differentiable: bool = False,
    ) -> Var:
        expected = opcode.value.arity
        if len(inputs) != expected:
            raise UsageError(
                f"Invalid number of inputs for opcode {opcode.name} (expected {expected}, got {len(inputs)})"
            )
        for var in inputs:
            if var.tape is not self:
                raise UsageError(f"Input of opcode {opcode.name} belongs to another tape")
            if var.index >= len(self._nodes):
                raise UsageError(f"Input %{var.index} of opcode {opcode.name} does not precede it")

        self._nodes.append(
            TapeNode(
                opcode=opcode,
                inputs=tuple(var.index for var in inputs),
                value=value,
                params=params,
                differentiable=differentiable,
            )
        )
        return Var(self, len(self._nodes) - 1)

    @staticmethod
    def _require_same_shape(opcode: TapeOpcode, a: Var, b: Var) -> None:
        if a.shape != b.shape:
            raise DimensionError(
                f"Shape mismatch for opcode {opcode.name} (got {a.shape} and {b.shape})"
            )

    def leaf(self, value: Matrix, *, differentiable: bool = True) -> Var:
        return self._push(
            TapeOpcode.LEAF, [], as_matrix(value).copy(), differentiable=differentiable
        )

    def constant(self, value: Matrix) -> Var:
        return self._push(TapeOpcode.CONSTANT, [], as_matrix(value))

    def add(self, a: Var, b: Var) -> Var:
        self._require_same_shape(TapeOpcode.ADD, a, b)
        return self._push(TapeOpcode.ADD, [a, b], a.value + b.value)

    def subtract(self, a: Var, b: Var) -> Var:
        self._require_same_shape(TapeOpcode.SUBTRACT, a, b)
        return self._push(TapeOpcode.SUBTRACT, [a, b], a.value - b.value)

    def multiply(self, a: Var, b: Var) -> Var:
        self._require_same_shape(TapeOpcode.MULTIPLY, a, b)
        return self._push(TapeOpcode.MULTIPLY, [a, b], a.value * b.value)

    def scale(self, a: Var, factor: float) -> Var:
        return self._push(TapeOpcode.SCALE, [a], a.value * factor, (float(factor),))

    def matmul(self, a: Var, b: Var) -> Var:
        if a.shape[1] != b.shape[0]:
            raise DimensionError(
                f"Shape mismatch for opcode MATMUL (got {a.shape} @ {b.shape})"
            )
        return self._push(TapeOpcode.MATMUL, [a, b], a.value @ b.value)

    def transpose(self, a: Var) -> Var:
        return self._push(TapeOpcode.TRANSPOSE, [a], a.value.T.copy())

    def add_bias(self, a: Var, bias: Var) -> Var:
        """Add a column bias (n x 1) to every row of a (B x n)."""
        if bias.shape != (a.shape[1], 1):
            raise DimensionError(
                f"Shape mismatch for opcode ADD_BIAS (expected bias ({a.shape[1]}, 1), got {bias.shape})"
            )
        return self._push(TapeOpcode.ADD_BIAS, [a, bias], a.value + bias.value.T)

    def tanh(self, a: Var) -> Var:
        return self._push(TapeOpcode.TANH, [a], np.tanh(a.value))

    def relu(self, a: Var) -> Var:
        return self._push(TapeOpcode.RELU, [a], np.maximum(a.value, 0.0))

    def exp(self, a: Var) -> Var:
        return self._push(TapeOpcode.EXP, [a], np.exp(a.value))

    def log(self, a: Var) -> Var:
        return self._push(TapeOpcode.LOG, [a], np.log(a.value))

    def normalize_rows(self, a: Var) -> Var:
        return self._push(
            TapeOpcode.NORMALIZE_ROWS, [a], a.value / a.value.sum(axis=1, keepdims=True)
        )

    def normalize_cols(self, a: Var) -> Var:
        return self._push(
            TapeOpcode.NORMALIZE_COLS, [a], a.value / a.value.sum(axis=0, keepdims=True)
        )

    def log_normalize_rows(self, a: Var) -> Var:
        """x - logsumexp(x) per row; doubles as a row-wise log-softmax."""
        return self._push(
            TapeOpcode.LOG_NORMALIZE_ROWS, [a], a.value - logsumexp(a.value, axis=1)
        )

    def log_normalize_cols(self, a: Var) -> Var:
        return self._push(
            TapeOpcode.LOG_NORMALIZE_COLS, [a], a.value - logsumexp(a.value, axis=0)
        )

    def sum(self, a: Var) -> Var:
        return self._push(TapeOpcode.SUM, [a], np.array([[a.value.sum()]]))

    def slice(self, flat: Var, offset: int, shape: tuple[int, int]) -> Var:
        """View a segment of a column vector as a matrix of the given shape."""
        size = shape[0] * shape[1]
        if flat.shape[1] != 1 or offset < 0 or offset + size > flat.shape[0]:
            raise DimensionError(
                f"Invalid slice [{offset}:{offset + size}] of vector with shape {flat.shape}"
            )
        value = flat.value[offset : offset + size, 0].reshape(shape)
        return self._push(TapeOpcode.SLICE, [flat], value, (offset, shape))

    def custom(self, a: Var, value: Matrix, vjp: VJP) -> Var:
        """Record an externally computed map of `a` with its vector-Jacobian product."""
        return self._push(TapeOpcode.CUSTOM, [a], as_matrix(value), (vjp,))

    def _backward(self, node: TapeNode, upstream: Matrix) -> list[Matrix]:
        inputs = [self._nodes[i].value for i in node.inputs]

        match node.opcode:
            case TapeOpcode.LEAF | TapeOpcode.CONSTANT:
                return []
            case TapeOpcode.ADD:
                return [upstream, upstream]
            case TapeOpcode.SUBTRACT:
                return [upstream, -upstream]
            case TapeOpcode.MULTIPLY:
                return [upstream * inputs[1], upstream * inputs[0]]
            case TapeOpcode.SCALE:
                return [upstream * cast(float, node.params[0])]
            case TapeOpcode.MATMUL:
                return [upstream @ inputs[1].T, inputs[0].T @ upstream]
            case TapeOpcode.TRANSPOSE:
                return [upstream.T]
            case TapeOpcode.ADD_BIAS:
                return [upstream, upstream.sum(axis=0).reshape(-1, 1)]
            case TapeOpcode.TANH:
                return [upstream * (1.0 - node.value**2)]
            case TapeOpcode.RELU:
                return [upstream * (inputs[0] > 0.0)]
            case TapeOpcode.EXP:
                return [upstream * node.value]
            case TapeOpcode.LOG:
                return [upstream / inputs[0]]
            case TapeOpcode.NORMALIZE_ROWS:
                totals = inputs[0].sum(axis=1, keepdims=True)
                inner = (upstream * node.value).sum(axis=1, keepdims=True)
                return [(upstream - inner) / totals]
            case TapeOpcode.NORMALIZE_COLS:
                totals = inputs[0].sum(axis=0, keepdims=True)
                inner = (upstream * node.value).sum(axis=0, keepdims=True)
                return [(upstream - inner) / totals]
            case TapeOpcode.LOG_NORMALIZE_ROWS:
                return [upstream - np.exp(node.value) * upstream.sum(axis=1, keepdims=True)]
            case TapeOpcode.LOG_NORMALIZE_COLS:
                return [upstream - np.exp(node.value) * upstream.sum(axis=0, keepdims=True)]
            case TapeOpcode.SUM:
                return [np.full(inputs[0].shape, upstream[0, 0])]
            case TapeOpcode.SLICE:
                offset = cast(int, node.params[0])
                grad = np.zeros_like(inputs[0])
                grad[offset : offset + upstream.size, 0] = upstream.reshape(-1)
                return [grad]
            case TapeOpcode.CUSTOM:
                vjp = cast(VJP, node.params[0])
                return [vjp(upstream)]

    def gradients(self, output: Var, leaves: Sequence[Var]) -> list[Matrix]:
        """Reverse-mode gradients of a scalar output with respect to leaves."""
        if output.tape is not self:
            raise UsageError("Output belongs to another tape")
        if output.shape != (1, 1):
            raise UsageError(f"Gradients require a 1x1 output (got {output.shape})")
        for var in leaves:
            node = self._nodes[var.index] if var.tape is self else None
            if node is None or node.opcode != TapeOpcode.LEAF or not node.differentiable:
                raise UsageError(f"%{var.index} is not a differentiable leaf of this tape")

        adjoints: dict[int, Matrix] = {output.index: np.ones((1, 1))}
        for index in range(output.index, -1, -1):
            upstream = adjoints.pop(index, None)
            if upstream is None:
                continue
            node = self._nodes[index]
            if node.opcode == TapeOpcode.LEAF:
                adjoints[index] = upstream
                continue
            for input_index, grad in zip(node.inputs, self._backward(node, upstream)):
                previous = adjoints.get(input_index)
                adjoints[input_index] = grad if previous is None else previous + grad

        result: list[Matrix] = []
        for var in leaves:
            grad = adjoints.get(var.index)
            result.append(np.zeros_like(var.value) if grad is None else np.array(grad, copy=True))
        return result


def logsumexp(values: Matrix, *, axis: int) -> Matrix:
    return np.asarray(special.logsumexp(values, axis=axis, keepdims=True), dtype=np.float64)
