"""Stage-1 training: Adam over the layer logits and the linear head only.

The frontend is frozen, so the whole computation graph is shallow --
softmax over layer logits, weighted sum, optional mean-pool, affine map,
loss -- and the backward pass is written out in closed form.  A finite
difference checker validates it parameter by parameter.

A second fine-tuning stage that backpropagates into the frontend is out of
scope here; ``train_stage1`` accepts everything it would need through the
same dataset interface, so an external gradient provider can be layered on
top without touching this module.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .features import FeatureStack
from .losses import (
    DEFAULT_CLASS_ALPHA,
    DEFAULT_ONSET_WEIGHT,
    DEFAULT_SILENCE_WEIGHT,
    clf_loss,
    svt_loss,
)
from .model import LayerWeights, LinearHead, ProbeModel, TaskKind, softmax
from .notes import FrameTargets
from .optim import AdamState, adam_step

DEFAULT_STAGE1_LR = 3e-3


@dataclass
class TrainConfig:
    stage1_lr: float = DEFAULT_STAGE1_LR
    stage1_epochs: int = 6
    batch_size: int = 32
    seed: int = 0
    onset_weight: float = DEFAULT_ONSET_WEIGHT
    silence_weight: float = DEFAULT_SILENCE_WEIGHT
    class_alpha: float = DEFAULT_CLASS_ALPHA

    def __post_init__(self):
        if self.stage1_lr <= 0:
            raise ValueError("learning rate must be positive")
        if self.stage1_epochs < 0:
            raise ValueError("epoch count must be non-negative")
        if self.batch_size < 1:
            raise ValueError("batch size must be at least 1")
        if self.onset_weight < 0 or self.silence_weight < 0:
            raise ValueError("BCE weights must be non-negative")
        if not 0.0 <= self.class_alpha <= 1.0:
            raise ValueError("class_alpha must lie in [0, 1]")


def flatten_params(model: ProbeModel) -> np.ndarray:
    """All trainable parameters as one vector: [logits | weight row-major | bias]."""
    return np.concatenate([
        model.layer_weights.logits,
        model.head.weight.ravel(),
        model.head.bias,
    ])


def with_params(model: ProbeModel, params: np.ndarray) -> ProbeModel:
    """Copy of ``model`` with its parameter vector replaced."""
    layers, dim, outputs = model.layers, model.dim, model.outputs
    expected = layers + dim * outputs + outputs
    params = np.asarray(params, dtype=np.float64).reshape(-1)
    if params.size != expected:
        raise ValueError(f"parameter vector has {params.size} entries, model needs {expected}")
    logits = params[:layers]
    weight = params[layers:layers + dim * outputs].reshape(dim, outputs)
    bias = params[layers + dim * outputs:]
    return ProbeModel(
        layer_weights=LayerWeights(logits.copy()),
        head=LinearHead(weight=weight.copy(), bias=bias.copy()),
        task_kind=model.task_kind,
    )


def _check_target(task_kind: TaskKind, target) -> None:
    if task_kind is TaskKind.FRAME_TRANSCRIPTION:
        if not isinstance(target, FrameTargets):
            raise TypeError(f"frame transcription expects FrameTargets, got {type(target).__name__}")
    else:
        if isinstance(target, FrameTargets) or not isinstance(target, (int, np.integer)):
            raise TypeError(f"clip classification expects an integer label, got {type(target).__name__}")


def example_loss_and_grad(
    model: ProbeModel,
    stack: FeatureStack,
    target,
    onset_weight: float = DEFAULT_ONSET_WEIGHT,
    silence_weight: float = DEFAULT_SILENCE_WEIGHT,
    class_weights: np.ndarray | None = None,
    stack64: np.ndarray | None = None,
) -> tuple[float, np.ndarray]:
    """Loss and gradient for one example, as a flat parameter-vector gradient.

    ``stack64`` lets callers reuse a precomputed float64 view of the payload
    across steps.
    """
    _check_target(model.task_kind, target)
    if stack.layers != model.layers:
        raise ValueError(f"stack has {stack.layers} layers, model expects {model.layers}")
    if stack.dim != model.dim:
        raise ValueError(f"stack dim {stack.dim} does not match head dim {model.dim}")

    x = stack.as_float64() if stack64 is None else stack64
    weights = softmax(model.layer_weights.logits)
    aggregated = np.tensordot(weights, x, axes=(0, 0))  # (frames, dim)
    w, b = model.head.weight, model.head.bias

    if model.task_kind is TaskKind.FRAME_TRANSCRIPTION:
        frame_logits = aggregated @ w + b
        if frame_logits.shape[0] != target.frames:
            raise ValueError(f"stack has {frame_logits.shape[0]} frames, targets have {target.frames}")
        loss, g_logits = svt_loss(frame_logits, target, onset_weight, silence_weight)
        grad_bias = g_logits.sum(axis=0)
        grad_weight = aggregated.T @ g_logits
        d_aggregated = g_logits @ w.T
        d_layer = np.tensordot(x, d_aggregated, axes=([1, 2], [0, 1]))
    else:
        pooled = aggregated.mean(axis=0)
        clip_logits = pooled @ w + b
        loss, g_logits = clf_loss(clip_logits, int(target), class_weights)
        grad_bias = g_logits
        grad_weight = np.outer(pooled, g_logits)
        d_pooled = w @ g_logits
        # mean-pool backward: each frame receives d_pooled / frames
        d_layer = np.tensordot(x.mean(axis=1), d_pooled, axes=(1, 0))

    # softmax backward: d logits_i = s_i * (d s_i - sum_j s_j d s_j)
    grad_logits = weights * (d_layer - np.dot(weights, d_layer))
    return loss, np.concatenate([grad_logits, grad_weight.ravel(), grad_bias])


def feature_gradient(
    model: ProbeModel,
    stack: FeatureStack,
    target,
    onset_weight: float = DEFAULT_ONSET_WEIGHT,
    silence_weight: float = DEFAULT_SILENCE_WEIGHT,
    class_weights: np.ndarray | None = None,
) -> np.ndarray:
    """d(example loss) / d(stack data), shaped (layers, frames, dim).

    This is the extension point for a second fine-tuning stage: an external
    trainer can take this gradient and backpropagate it through the frontend
    that produced the stack.  Stage-1 training itself never uses it.
    """
    _check_target(model.task_kind, target)
    if stack.layers != model.layers or stack.dim != model.dim:
        raise ValueError("stack shape does not match the model")

    x = stack.as_float64()
    weights = softmax(model.layer_weights.logits)
    aggregated = np.tensordot(weights, x, axes=(0, 0))
    w, b = model.head.weight, model.head.bias

    if model.task_kind is TaskKind.FRAME_TRANSCRIPTION:
        frame_logits = aggregated @ w + b
        _, g_logits = svt_loss(frame_logits, target, onset_weight, silence_weight)
        d_aggregated = g_logits @ w.T  # (frames, dim)
    else:
        pooled = aggregated.mean(axis=0)
        _, g_logits = clf_loss(pooled @ w + b, int(target), class_weights)
        d_aggregated = np.tile(w @ g_logits / stack.frames, (stack.frames, 1))

    # d aggregated / d x[l] is just the layer's softmax weight
    return weights[:, None, None] * d_aggregated[None, :, :]


def batch_loss_and_grad(
    model: ProbeModel,
    batch,
    onset_weight: float = DEFAULT_ONSET_WEIGHT,
    silence_weight: float = DEFAULT_SILENCE_WEIGHT,
    class_weights: np.ndarray | None = None,
) -> tuple[float, np.ndarray]:
    """Mean of per-example losses and gradients over (stack, target) pairs."""
    if len(batch) == 0:
        raise ValueError("empty batch")
    total_loss = 0.0
    total_grad = np.zeros(flatten_params(model).size)
    for stack, target in batch:
        loss, grad = example_loss_and_grad(
            model, stack, target, onset_weight, silence_weight, class_weights)
        total_loss += loss
        total_grad += grad
    return total_loss / len(batch), total_grad / len(batch)


def batch_loss(
    model: ProbeModel,
    batch,
    onset_weight: float = DEFAULT_ONSET_WEIGHT,
    silence_weight: float = DEFAULT_SILENCE_WEIGHT,
    class_weights: np.ndarray | None = None,
) -> float:
    return batch_loss_and_grad(model, batch, onset_weight, silence_weight, class_weights)[0]


def finite_difference_grad(
    model: ProbeModel,
    batch,
    eps: float = 1e-5,
    onset_weight: float = DEFAULT_ONSET_WEIGHT,
    silence_weight: float = DEFAULT_SILENCE_WEIGHT,
    class_weights: np.ndarray | None = None,
) -> np.ndarray:
    """Central finite differences of the batch loss over every parameter."""
    if eps <= 0:
        raise ValueError("eps must be positive")
    base = flatten_params(model)
    grad = np.zeros_like(base)
    for i in range(base.size):
        bumped = base.copy()
        bumped[i] = base[i] + eps
        hi = batch_loss(with_params(model, bumped), batch, onset_weight, silence_weight, class_weights)
        bumped[i] = base[i] - eps
        lo = batch_loss(with_params(model, bumped), batch, onset_weight, silence_weight, class_weights)
        grad[i] = (hi - lo) / (2.0 * eps)
    return grad


def max_relative_error(a: np.ndarray, b: np.ndarray) -> float:
    """max_i |a_i - b_i| / max(1, |a_i|, |b_i|)."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    denom = np.maximum(1.0, np.maximum(np.abs(a), np.abs(b)))
    return float(np.max(np.abs(a - b) / denom))


def grad_check(
    model: ProbeModel,
    batch,
    eps: float = 1e-5,
    onset_weight: float = DEFAULT_ONSET_WEIGHT,
    silence_weight: float = DEFAULT_SILENCE_WEIGHT,
    class_weights: np.ndarray | None = None,
) -> float:
    """Worst relative disagreement between analytic and finite-difference gradients."""
    if len(batch) == 0:
        raise ValueError("empty batch")
    _, analytic = batch_loss_and_grad(model, batch, onset_weight, silence_weight, class_weights)
    numeric = finite_difference_grad(model, batch, eps, onset_weight, silence_weight, class_weights)
    return max_relative_error(analytic, numeric)


def _batches(n: int, batch_size: int, rng: np.random.Generator):
    order = rng.permutation(n)
    for start in range(0, n, batch_size):
        yield order[start:start + batch_size]


def train_stage1(
    dataset,
    model: ProbeModel,
    config: TrainConfig,
    class_weights: np.ndarray | None = None,
) -> tuple[ProbeModel, list[float]]:
    """Mini-batch Adam on the probe parameters; returns (model, per-epoch mean loss).

    Batches are drawn in a freshly shuffled order each epoch, seeded from the
    config, so identical inputs and seed reproduce bit-identical parameters.
    """
    dataset = list(dataset)
    if not dataset:
        raise ValueError("empty dataset")
    for stack, target in dataset:
        _check_target(model.task_kind, target)
        if stack.layers != model.layers or stack.dim != model.dim:
            raise ValueError("dataset stack shape does not match the model")

    # Reuse float64 payloads across epochs; conversion dominates small-stack steps.
    stacks64 = [stack.as_float64() for stack, _ in dataset]

    rng = np.random.default_rng(config.seed)
    params = flatten_params(model)
    state = AdamState.fresh(params.size)
    history: list[float] = []

    current = model
    for _ in range(config.stage1_epochs):
        epoch_loss = 0.0
        for batch_idx in _batches(len(dataset), config.batch_size, rng):
            grad = np.zeros_like(params)
            for i in batch_idx:
                stack, target = dataset[i]
                loss, g = example_loss_and_grad(
                    current, stack, target,
                    config.onset_weight, config.silence_weight, class_weights,
                    stack64=stacks64[i],
                )
                epoch_loss += loss
                grad += g
            grad /= len(batch_idx)
            state, params = adam_step(state, params, grad, config.stage1_lr)
            current = with_params(current, params)
        history.append(epoch_loss / len(dataset))

    return current, history
