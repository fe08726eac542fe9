"""The .svpf wire format, written and checked byte by byte.

Layout (little-endian): magic "SVPF", version u32 (=1), layers u16, dim u16,
frames u32, frame_rate f32, then float32 payload in [layer][frame][dim]
order.  This mirrors the probe toolkit's reader; the format is the only
contract between the two packages.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

MAGIC = b"SVPF"
VERSION = 1
HEADER_FORMAT = "<4sIHHIf"
HEADER_SIZE = struct.calcsize(HEADER_FORMAT)


class FormatViolation(ValueError):
    """A .svpf file violates the format; the message names the byte offset."""


def write_svpf(data: np.ndarray, frame_rate: float, path) -> None:
    """Write a (layers, frames, dim) float array as a .svpf file."""
    data = np.asarray(data)
    if data.ndim != 3:
        raise ValueError(f"expected (layers, frames, dim) data, got shape {data.shape}")
    layers, frames, dim = data.shape
    if min(data.shape) < 1:
        raise ValueError(f"degenerate shape {data.shape}")
    if not np.all(np.isfinite(data)):
        raise ValueError("refusing to write non-finite feature values")
    if layers > 0xFFFF or dim > 0xFFFF:
        raise ValueError(f"layers/dim exceed the u16 header fields: {data.shape}")
    header = struct.pack(HEADER_FORMAT, MAGIC, VERSION, layers, dim, frames,
                         float(np.float32(frame_rate)))
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(np.ascontiguousarray(data, dtype="<f4").tobytes())


@dataclass
class VerifyReport:
    layers: int
    frames: int
    dim: int
    frame_rate: float
    payload_bytes: int

    def summary(self) -> str:
        return (f"ok: {self.layers} layers x {self.frames} frames x {self.dim} dims, "
                f"{self.frame_rate:g} fps, {self.payload_bytes} payload bytes")


def verify_svpf(path) -> VerifyReport:
    """Check magic, version, declared shape, payload size, and finiteness."""
    with open(path, "rb") as fh:
        raw = fh.read()
    if len(raw) < HEADER_SIZE:
        raise FormatViolation(
            f"file ends at byte {len(raw)}, header needs {HEADER_SIZE} bytes")
    magic, version, layers, dim, frames, frame_rate = struct.unpack_from(HEADER_FORMAT, raw)
    if magic != MAGIC:
        raise FormatViolation(f"bad magic {magic!r} at byte offset 0")
    if version != VERSION:
        raise FormatViolation(f"unsupported version {version} at byte offset 4")
    if layers < 1 or dim < 1 or frames < 1:
        raise FormatViolation(
            f"degenerate shape ({layers}, {frames}, {dim}) declared at byte offset 8")
    if not frame_rate > 0:
        raise FormatViolation(f"non-positive frame rate {frame_rate} at byte offset 16")
    expected = layers * frames * dim * 4
    actual = len(raw) - HEADER_SIZE
    if actual != expected:
        raise FormatViolation(
            f"payload from byte offset {HEADER_SIZE}: expected {expected} bytes "
            f"({layers}x{frames}x{dim} float32), found {actual}")
    values = np.frombuffer(raw, dtype="<f4", count=layers * frames * dim, offset=HEADER_SIZE)
    finite = np.isfinite(values)
    if not finite.all():
        first_bad = int(np.flatnonzero(~finite)[0])
        raise FormatViolation(
            f"non-finite value at byte offset {HEADER_SIZE + 4 * first_bad}")
    return VerifyReport(layers=layers, frames=frames, dim=dim,
                        frame_rate=float(frame_rate), payload_bytes=actual)
