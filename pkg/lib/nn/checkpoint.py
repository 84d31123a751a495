import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, cast

import numpy as np
from ..config.base import FormatError
from ..config.enums import Activation
from ..utils.encoding import (
    DOUBLE_LEN,
    INT_LEN,
    make_doubles,
    make_int,
    parse_doubles,
    parse_int,
)
from .matrix import Matrix
from .mlp import Mlp

MAGIC = b"RBKT"
VERSION = 1


@dataclass(frozen=True, kw_only=True, eq=False)
class Checkpoint:
    """Container for a model, a transportation plan, or both."""

    model: Mlp | None = None
    plan_mode: str | None = None
    plan: tuple[Matrix, ...] = ()
    meta: dict[str, Any] = field(default_factory=lambda: {})


def encode_checkpoint(ckpt: Checkpoint) -> bytes:
    arrays: list[Matrix] = []
    header: dict[str, Any] = {"meta": ckpt.meta}

    if ckpt.model is not None:
        header["model"] = {
            "dims": ckpt.model.dims,
            "activation": ckpt.model.activation.value,
        }
        arrays += ckpt.model.arrays()
    if ckpt.plan_mode is not None:
        header["plan"] = {
            "mode": ckpt.plan_mode,
            "sides": [mat.shape[0] for mat in ckpt.plan],
        }
        arrays += list(ckpt.plan)
    header["shapes"] = [list(array.shape) for array in arrays]

    header_bytes = json.dumps(header, sort_keys=True).encode("utf-8")
    payload = MAGIC + make_int(VERSION) + make_int(len(header_bytes)) + header_bytes
    for array in arrays:
        payload += make_doubles(array)
    return payload


def _require(header: dict[str, Any], key: str, field: str) -> Any:
    if key not in header:
        raise FormatError(f"Checkpoint header is missing \"{key}\"", field)
    return header[key]


def decode_checkpoint(data: bytes) -> Checkpoint:
    prefix_len = len(MAGIC) + 2 * INT_LEN
    if len(data) < prefix_len:
        raise FormatError("Truncated checkpoint header", "magic")
    if data[: len(MAGIC)] != MAGIC:
        raise FormatError(f"Invalid checkpoint magic {data[: len(MAGIC)]!r}", "magic")
    version = parse_int(data[len(MAGIC) :])
    if version != VERSION:
        raise FormatError(f"Unsupported checkpoint version (expected {VERSION}, got {version})", "version")
    header_len = parse_int(data[len(MAGIC) + INT_LEN :])
    if len(data) < prefix_len + header_len:
        raise FormatError("Truncated checkpoint header", "header")
    try:
        header = json.loads(data[prefix_len : prefix_len + header_len])
    except ValueError as e:
        raise FormatError(f"Invalid checkpoint header ({e})", "header")
    if not isinstance(header, dict):
        raise FormatError("Checkpoint header must be a JSON object", "header")
    header = cast(dict[str, Any], header)

    raw_shapes = cast(list[list[int]], _require(header, "shapes", "header"))
    shapes = [(int(rows), int(cols)) for rows, cols in raw_shapes]
    arrays: list[Matrix] = []
    offset = prefix_len + header_len
    for rows, cols in shapes:
        size = rows * cols * DOUBLE_LEN
        if len(data) < offset + size:
            raise FormatError("Truncated checkpoint payload", "arrays")
        arrays.append(parse_doubles(data[offset : offset + size], (rows, cols)))
        offset += size
    if offset != len(data):
        raise FormatError(f"Trailing bytes after checkpoint payload ({len(data) - offset})", "arrays")

    model: Mlp | None = None
    consumed = 0
    model_header = cast(dict[str, Any] | None, header.get("model"))
    if model_header is not None:
        consumed = 2 * (len(cast(list[int], _require(model_header, "dims", "model"))) - 1)
        raw_activation = _require(model_header, "activation", "model")
        try:
            activation = Activation(raw_activation)
        except ValueError as e:
            raise FormatError(f"Invalid model activation ({e})", "model")
        model = Mlp.from_arrays(arrays[:consumed], activation)

    plan_header = cast(dict[str, Any] | None, header.get("plan"))
    plan_mode = None if plan_header is None else str(_require(plan_header, "mode", "plan"))
    return Checkpoint(
        model=model,
        plan_mode=plan_mode,
        plan=tuple(np.array(array) for array in arrays[consumed:]),
        meta=cast(dict[str, Any], header.get("meta", {})),
    )


def save_checkpoint(path: Path, ckpt: Checkpoint) -> None:
    _ = path.write_bytes(encode_checkpoint(ckpt))


def load_checkpoint(path: Path) -> Checkpoint:
    return decode_checkpoint(path.read_bytes())
