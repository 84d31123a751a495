import numpy as np
from numpy.typing import NDArray

INT_LEN = 4
DOUBLE_LEN = 8
BIG_ENDIAN_DOUBLE = np.dtype(">f8")


def parse_int(data: bytes, *, len: int = INT_LEN) -> int:
    return int.from_bytes(data[:len], "big")


def make_int(value: int, *, len: int = INT_LEN) -> bytes:
    return int.to_bytes(value, len, "big")


def make_doubles(values: NDArray[np.float64]) -> bytes:
    # Row-major, big-endian, bit-exact
    return np.ascontiguousarray(values, dtype=np.float64).astype(BIG_ENDIAN_DOUBLE).tobytes()


def parse_doubles(data: bytes, shape: tuple[int, ...]) -> NDArray[np.float64]:
    count = 1
    for dim in shape:
        count *= dim
    raw = np.frombuffer(data[: count * DOUBLE_LEN], dtype=BIG_ENDIAN_DOUBLE)
    return raw.astype(np.float64).reshape(shape)


def parse_bytes(data: bytes) -> NDArray[np.uint8]:
    return np.frombuffer(data, dtype=np.uint8).copy()
