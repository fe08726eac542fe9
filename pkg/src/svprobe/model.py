"""The trainable probe: softmax layer weighting plus a single linear head.

Everything that can learn during stage-1 training lives here: one logit per
frontend layer and one affine map.  The frozen frontend itself never appears;
its output arrives as a :class:`~svprobe.features.FeatureStack`.

Model checkpoint layout (".svpm", little-endian)::

    bytes  0-3   magic b"SVPM"
    bytes  4-7   version (u32, currently 1)
    bytes  8-11  task kind (u32: 0 = clip classification, 1 = frame transcription)
    bytes 12-15  layers (u32)
    bytes 16-19  dim    (u32)
    bytes 20-23  outputs K (u32)
    bytes 24-    layer logits (layers f64), head weight row-major (dim*K f64), bias (K f64)
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .features import FeatureStack

CHECKPOINT_MAGIC = b"SVPM"
CHECKPOINT_VERSION = 1
_CKPT_HEADER = "<4sIIIII"

TRANSCRIPTION_OUTPUTS = 20  # onset + silence + 13 pitch classes + 5 octaves


class TaskKind(str, Enum):
    CLIP_CLASSIFICATION = "clip_classification"
    FRAME_TRANSCRIPTION = "frame_transcription"


class CheckpointError(ValueError):
    """Raised when a .svpm file violates the format contract."""


@dataclass
class LayerWeights:
    """Learnable per-layer logits; the aggregation uses their softmax."""

    logits: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.logits, dtype=np.float64).reshape(-1)
        if arr.size < 1 or not np.all(np.isfinite(arr)):
            raise ValueError("layer logits must be a non-empty finite vector")
        self.logits = arr

    @property
    def layers(self) -> int:
        return self.logits.size

    def normalized(self) -> np.ndarray:
        return softmax(self.logits)


@dataclass
class LinearHead:
    """Affine map from aggregated features to task outputs."""

    weight: np.ndarray  # (dim, outputs)
    bias: np.ndarray  # (outputs,)

    def __post_init__(self):
        w = np.asarray(self.weight, dtype=np.float64)
        b = np.asarray(self.bias, dtype=np.float64).reshape(-1)
        if w.ndim != 2:
            raise ValueError(f"head weight must be 2-d (dim, outputs), got shape {w.shape}")
        if w.shape[1] != b.size:
            raise ValueError(f"bias length {b.size} does not match weight columns {w.shape[1]}")
        if b.size < 1:
            raise ValueError("head must have at least one output")
        if not (np.all(np.isfinite(w)) and np.all(np.isfinite(b))):
            raise ValueError("head parameters must be finite")
        self.weight = w
        self.bias = b

    @property
    def dim(self) -> int:
        return self.weight.shape[0]

    @property
    def outputs(self) -> int:
        return self.weight.shape[1]


@dataclass
class ProbeModel:
    layer_weights: LayerWeights
    head: LinearHead
    task_kind: TaskKind = TaskKind.CLIP_CLASSIFICATION

    def __post_init__(self):
        self.task_kind = TaskKind(self.task_kind)
        if self.task_kind is TaskKind.FRAME_TRANSCRIPTION and self.head.outputs != TRANSCRIPTION_OUTPUTS:
            raise ValueError(
                f"frame transcription needs {TRANSCRIPTION_OUTPUTS} outputs, head has {self.head.outputs}"
            )

    @property
    def layers(self) -> int:
        return self.layer_weights.layers

    @property
    def dim(self) -> int:
        return self.head.dim

    @property
    def outputs(self) -> int:
        return self.head.outputs


def softmax(x: np.ndarray) -> np.ndarray:
    """Stable softmax over a 1-d array."""
    x = np.asarray(x, dtype=np.float64)
    shifted = x - np.max(x)
    e = np.exp(shifted)
    return e / np.sum(e)


def init_model(
    layers: int,
    dim: int,
    outputs: int,
    task_kind: TaskKind,
    seed: int = 0,
) -> ProbeModel:
    """Fresh probe: uniform layer weights, head ~ U[-1/sqrt(dim), 1/sqrt(dim)], zero bias."""
    rng = np.random.default_rng(seed)
    bound = 1.0 / np.sqrt(dim)
    weight = rng.uniform(-bound, bound, size=(dim, outputs))
    return ProbeModel(
        layer_weights=LayerWeights(np.zeros(layers)),
        head=LinearHead(weight=weight, bias=np.zeros(outputs)),
        task_kind=task_kind,
    )


def aggregate(stack: FeatureStack, lw: LayerWeights) -> np.ndarray:
    """Softmax-weighted sum of the layer outputs, shape (frames, dim)."""
    if lw.layers != stack.layers:
        raise ValueError(f"got {lw.layers} layer logits for a stack with {stack.layers} layers")
    w = lw.normalized()
    return np.tensordot(w, stack.as_float64(), axes=(0, 0))


def forward_clip(model: ProbeModel, stack: FeatureStack) -> np.ndarray:
    """Clip-level logits: aggregate, mean-pool over frames, apply the head."""
    if model.task_kind is not TaskKind.CLIP_CLASSIFICATION:
        raise ValueError(f"forward_clip called on a {model.task_kind.value} model")
    if stack.dim != model.dim:
        raise ValueError(f"stack dim {stack.dim} does not match head dim {model.dim}")
    pooled = aggregate(stack, model.layer_weights).mean(axis=0)
    return pooled @ model.head.weight + model.head.bias


def forward_frame(model: ProbeModel, stack: FeatureStack) -> np.ndarray:
    """Frame-level logits, shape (frames, 20): the head applied per frame."""
    if model.task_kind is not TaskKind.FRAME_TRANSCRIPTION:
        raise ValueError(f"forward_frame called on a {model.task_kind.value} model")
    if stack.dim != model.dim:
        raise ValueError(f"stack dim {stack.dim} does not match head dim {model.dim}")
    return aggregate(stack, model.layer_weights) @ model.head.weight + model.head.bias


_TASK_CODES = {TaskKind.CLIP_CLASSIFICATION: 0, TaskKind.FRAME_TRANSCRIPTION: 1}
_CODE_TASKS = {v: k for k, v in _TASK_CODES.items()}


def save_checkpoint(model: ProbeModel, path) -> None:
    header = struct.pack(
        _CKPT_HEADER, CHECKPOINT_MAGIC, CHECKPOINT_VERSION,
        _TASK_CODES[model.task_kind], model.layers, model.dim, model.outputs,
    )
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(model.layer_weights.logits.astype("<f8").tobytes())
        fh.write(np.ascontiguousarray(model.head.weight, dtype="<f8").tobytes())
        fh.write(model.head.bias.astype("<f8").tobytes())


def load_checkpoint(path) -> ProbeModel:
    with open(path, "rb") as fh:
        raw = fh.read()
    head_size = struct.calcsize(_CKPT_HEADER)
    if len(raw) < head_size:
        raise CheckpointError(f"{path}: truncated header")
    magic, version, task_code, layers, dim, outputs = struct.unpack_from(_CKPT_HEADER, raw)
    if magic != CHECKPOINT_MAGIC:
        raise CheckpointError(f"{path}: bad magic {magic!r}")
    if version != CHECKPOINT_VERSION:
        raise CheckpointError(f"{path}: unsupported version {version}")
    if task_code not in _CODE_TASKS:
        raise CheckpointError(f"{path}: unknown task code {task_code}")
    count = layers + dim * outputs + outputs
    expected = head_size + count * 8
    if len(raw) != expected:
        raise CheckpointError(f"{path}: expected {expected} bytes, found {len(raw)}")
    values = np.frombuffer(raw, dtype="<f8", count=count, offset=head_size)
    logits = values[:layers]
    weight = values[layers:layers + dim * outputs].reshape(dim, outputs)
    bias = values[layers + dim * outputs:]
    return ProbeModel(
        layer_weights=LayerWeights(logits),
        head=LinearHead(weight=weight, bias=bias),
        task_kind=_CODE_TASKS[task_code],
    )
