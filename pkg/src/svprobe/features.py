"""Layer-stacked frame features and the .svpf binary file format.

A feature stack holds the hidden states of every encoder layer of a frozen
frontend (plus the encoder input), shaped ``(layers, frames, dim)``.  Files
store the payload as 32-bit little-endian floats; all arithmetic elsewhere
in the package is done in float64.

File layout (little-endian throughout)::

    bytes  0-3   magic b"SVPF"
    bytes  4-7   version (u32, currently 1)
    bytes  8-9   layers  (u16)
    bytes 10-11  dim     (u16)
    bytes 12-15  frames  (u32)
    bytes 16-19  frame_rate (f32)
    bytes 20-    payload: float32 values, index order [layer][frame][dim]
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field

import numpy as np

MAGIC = b"SVPF"
VERSION = 1
HEADER_FORMAT = "<4sIHHIf"
HEADER_SIZE = struct.calcsize(HEADER_FORMAT)

DEFAULT_LAYERS = 13
DEFAULT_DIM = 768
DEFAULT_FRAME_RATE = 50.0


class FeatureFileError(ValueError):
    """Raised when a .svpf file violates the format contract."""


@dataclass
class FeatureStack:
    """Frame features from every layer of a frozen frontend.

    ``data`` is stored as float32 (the on-disk precision) with shape
    ``(layers, frames, dim)`` and is treated as immutable after
    construction, so a stack can be shared freely across threads.
    """

    data: np.ndarray
    frame_rate: float = DEFAULT_FRAME_RATE

    layers: int = field(init=False)
    frames: int = field(init=False)
    dim: int = field(init=False)

    def __post_init__(self):
        arr = np.asarray(self.data)
        if arr.ndim != 3:
            raise ValueError(f"feature data must be 3-d (layers, frames, dim), got shape {arr.shape}")
        if min(arr.shape) < 1:
            raise ValueError(f"layers, frames and dim must all be >= 1, got shape {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise ValueError("feature data contains non-finite values")
        # Canonicalize to storage precision so write -> read is bit-exact.
        arr = np.ascontiguousarray(arr, dtype=np.float32)
        arr.setflags(write=False)
        self.data = arr
        self.layers, self.frames, self.dim = arr.shape
        self.frame_rate = float(np.float32(self.frame_rate))
        if not (self.frame_rate > 0):
            raise ValueError(f"frame_rate must be positive, got {self.frame_rate}")
        if self.layers > 0xFFFF or self.dim > 0xFFFF or self.frames > 0xFFFFFFFF:
            raise ValueError("stack shape exceeds the file format's header fields")

    def __eq__(self, other):
        if not isinstance(other, FeatureStack):
            return NotImplemented
        return (
            self.frame_rate == other.frame_rate
            and self.data.shape == other.data.shape
            and np.array_equal(self.data, other.data)
        )

    @property
    def duration_s(self) -> float:
        return self.frames / self.frame_rate

    def as_float64(self) -> np.ndarray:
        """Payload widened to float64 for numerics."""
        return self.data.astype(np.float64)


def write_feature_file(stack: FeatureStack, path) -> None:
    """Serialize ``stack`` to ``path`` in the .svpf layout."""
    header = struct.pack(
        HEADER_FORMAT, MAGIC, VERSION,
        stack.layers, stack.dim, stack.frames, stack.frame_rate,
    )
    payload = np.ascontiguousarray(stack.data, dtype="<f4")
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(payload.tobytes())


def read_feature_file(path) -> FeatureStack:
    """Read a .svpf file, rejecting bad magic, versions, and sizes."""
    with open(path, "rb") as fh:
        raw = fh.read()
    if len(raw) < HEADER_SIZE:
        raise FeatureFileError(f"{path}: truncated header ({len(raw)} bytes, need {HEADER_SIZE})")
    magic, version, layers, dim, frames, frame_rate = struct.unpack_from(HEADER_FORMAT, raw)
    if magic != MAGIC:
        raise FeatureFileError(f"{path}: bad magic {magic!r}")
    if version != VERSION:
        raise FeatureFileError(f"{path}: unsupported version {version}")
    expected = layers * frames * dim * 4
    actual = len(raw) - HEADER_SIZE
    if actual < expected:
        raise FeatureFileError(f"{path}: truncated payload ({actual} bytes, header declares {expected})")
    if actual > expected:
        raise FeatureFileError(f"{path}: oversized payload ({actual} bytes, header declares {expected})")
    if layers < 1 or frames < 1 or dim < 1:
        raise FeatureFileError(f"{path}: degenerate shape ({layers}, {frames}, {dim})")
    values = np.frombuffer(raw, dtype="<f4", count=layers * frames * dim, offset=HEADER_SIZE)
    data = values.reshape(layers, frames, dim)
    if not np.all(np.isfinite(data)):
        raise FeatureFileError(f"{path}: payload contains non-finite values")
    return FeatureStack(data=data, frame_rate=frame_rate)
