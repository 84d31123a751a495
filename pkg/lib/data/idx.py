import gzip
from pathlib import Path

import numpy as np
from numpy.typing import NDArray
from ..config.base import FormatError
from ..utils.encoding import INT_LEN, make_int, parse_bytes, parse_int
from .images import ImageSet

IMAGES_MAGIC = 0x00000803
LABELS_MAGIC = 0x00000801


def _read(path: Path) -> bytes:
    if path.suffix == ".gz":
        with gzip.open(path, "rb") as f:
            return f.read()
    return path.read_bytes()


def _write(path: Path, data: bytes) -> None:
    if path.suffix == ".gz":
        # mtime pinned so identical inputs give identical files
        with gzip.GzipFile(path, "wb", mtime=0) as f:
            _ = f.write(data)
        return
    _ = path.write_bytes(data)


def parse_idx(data: bytes, magic: int) -> NDArray[np.uint8]:
    """Decode an unsigned-byte IDX payload: magic, one u32 per dimension, then data."""
    if len(data) < INT_LEN:
        raise FormatError("Truncated IDX file", "magic")
    found = parse_int(data)
    if found != magic:
        raise FormatError(f"Invalid IDX magic (expected {magic:#010x}, got {found:#010x})", "magic")

    ndim = magic & 0xFF
    header_len = INT_LEN * (1 + ndim)
    if len(data) < header_len:
        raise FormatError("Truncated IDX header", "dimensions")
    shape = tuple(parse_int(data[INT_LEN * (1 + i) :]) for i in range(ndim))
    count = int(np.prod(shape))
    if len(data) - header_len < count:
        raise FormatError(
            f"Truncated IDX payload (expected {count} bytes, got {len(data) - header_len})", "data"
        )
    if len(data) - header_len > count:
        raise FormatError(f"Trailing bytes after IDX payload ({len(data) - header_len - count})", "data")
    return parse_bytes(data[header_len:]).reshape(shape)


def make_idx(values: NDArray[np.uint8], magic: int) -> bytes:
    payload = make_int(magic)
    for dim in values.shape:
        payload += make_int(dim)
    return payload + np.ascontiguousarray(values, dtype=np.uint8).tobytes()


def load_idx(images_path: Path, labels_path: Path) -> ImageSet:
    """Read an IDX image/label file pair (optionally gzip-compressed)."""
    images = parse_idx(_read(images_path), IMAGES_MAGIC)
    labels = parse_idx(_read(labels_path), LABELS_MAGIC)
    if images.shape[0] != labels.shape[0]:
        raise FormatError(
            f"Image and label counts differ ({images.shape[0]} vs {labels.shape[0]})", "count"
        )
    return ImageSet(images=images.astype(np.float64) / 255.0, labels=labels.astype(np.int64))


def save_idx(images_path: Path, labels_path: Path, images: ImageSet) -> None:
    pixels = np.rint(images.images * 255.0).astype(np.uint8)
    _write(images_path, make_idx(pixels, IMAGES_MAGIC))
    _write(labels_path, make_idx(images.labels.astype(np.uint8), LABELS_MAGIC))
