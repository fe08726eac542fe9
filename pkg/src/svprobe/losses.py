"""Training losses with exact analytic gradients.

Transcription frames combine weighted binary cross-entropy on the onset and
silence channels with categorical cross-entropy over the pitch-class and
octave groups, averaged over frames:

    loss = 1/T * sum_t [ wBCE(sigmoid(O_t), o_t; w_o) + wBCE(sigmoid(S_t), s_t; w_s)
                         + CE(P_t, p_t) + CE(V_t, v_t) ]

with wBCE(p, y; w) = -(w * y * log p + (1 - y) * log(1 - p)).  The positive
weight compensates for the scarcity of onset frames.  Classification uses
weighted cross-entropy with per-class inverse-frequency weights
w_c = n_c ** -alpha, alpha in [0, 1].

Everything returns (loss, d loss / d logits); gradients are closed-form, no
autodiff involved.
"""

from __future__ import annotations

import numpy as np

from .notes import (
    FrameTargets,
    N_CHANNELS,
    ONSET_CHANNEL,
    SILENCE_CHANNEL,
    PITCH_SLICE,
    OCTAVE_SLICE,
)

DEFAULT_ONSET_WEIGHT = 15.0
DEFAULT_SILENCE_WEIGHT = 1.0
DEFAULT_CLASS_ALPHA = 0.2


def _sigmoid(z):
    return np.where(z >= 0, 1.0 / (1.0 + np.exp(-z)), np.exp(z) / (1.0 + np.exp(z)))


def _log_sigmoid(z):
    # log sigmoid(z) = -log(1 + exp(-z)), stable on both tails
    return -np.logaddexp(0.0, -z)


def _weighted_bce(logits, targets, weight):
    """Elementwise -(w*y*log p + (1-y)*log(1-p)) with p = sigmoid(logits).

    Returns (values, d/d logits).  Gradient: -w*y*(1-p) + (1-y)*p.
    """
    y = targets.astype(np.float64)
    p = _sigmoid(logits)
    values = -(weight * y * _log_sigmoid(logits) + (1.0 - y) * _log_sigmoid(-logits))
    grads = -weight * y * (1.0 - p) + (1.0 - y) * p
    return values, grads


def _cross_entropy(logits, labels):
    """Row-wise categorical CE over the last axis.

    Returns (values, d/d logits); gradient is softmax(logits) - onehot(labels).
    """
    shifted = logits - logits.max(axis=-1, keepdims=True)
    log_z = np.log(np.exp(shifted).sum(axis=-1))
    rows = np.arange(logits.shape[0])
    values = log_z - shifted[rows, labels]
    grads = np.exp(shifted) / np.exp(log_z)[:, None]
    grads[rows, labels] -= 1.0
    return values, grads


def svt_loss(
    logits: np.ndarray,
    targets: FrameTargets,
    onset_weight: float = DEFAULT_ONSET_WEIGHT,
    silence_weight: float = DEFAULT_SILENCE_WEIGHT,
) -> tuple[float, np.ndarray]:
    """Frame-averaged transcription loss and its gradient, both over (T, 20) logits."""
    logits = np.asarray(logits, dtype=np.float64)
    if logits.ndim != 2 or logits.shape[1] != N_CHANNELS:
        raise ValueError(f"expected (frames, {N_CHANNELS}) logits, got shape {logits.shape}")
    if logits.shape[0] != targets.frames:
        raise ValueError(f"{logits.shape[0]} logit frames vs {targets.frames} target frames")
    if not np.all(np.isfinite(logits)):
        raise ValueError("logits contain non-finite values")
    if onset_weight < 0 or silence_weight < 0:
        raise ValueError("BCE weights must be non-negative")

    frames = logits.shape[0]
    grad = np.zeros_like(logits)

    onset_vals, grad[:, ONSET_CHANNEL] = _weighted_bce(
        logits[:, ONSET_CHANNEL], targets.onset, onset_weight)
    silence_vals, grad[:, SILENCE_CHANNEL] = _weighted_bce(
        logits[:, SILENCE_CHANNEL], targets.silence, silence_weight)
    pitch_vals, grad[:, PITCH_SLICE] = _cross_entropy(logits[:, PITCH_SLICE], targets.pitch_class)
    octave_vals, grad[:, OCTAVE_SLICE] = _cross_entropy(logits[:, OCTAVE_SLICE], targets.octave)

    loss = float((onset_vals + silence_vals + pitch_vals + octave_vals).sum() / frames)
    grad /= frames
    return loss, grad


def clf_loss(
    logits: np.ndarray,
    label: int,
    class_weights: np.ndarray | None = None,
) -> tuple[float, np.ndarray]:
    """Class-weighted cross-entropy for one clip and its gradient over (K,) logits."""
    logits = np.asarray(logits, dtype=np.float64).reshape(-1)
    k = logits.size
    if not 0 <= label < k:
        raise ValueError(f"label {label} out of range for {k} classes")
    if not np.all(np.isfinite(logits)):
        raise ValueError("logits contain non-finite values")
    if class_weights is None:
        weight = 1.0
    else:
        class_weights = np.asarray(class_weights, dtype=np.float64).reshape(-1)
        if class_weights.size != k:
            raise ValueError(f"{class_weights.size} class weights for {k} classes")
        if np.any(class_weights <= 0):
            raise ValueError("class weights must be positive")
        weight = float(class_weights[label])

    values, grads = _cross_entropy(logits[None, :], np.array([label]))
    return weight * float(values[0]), weight * grads[0]


def inverse_frequency_weights(counts, alpha: float = DEFAULT_CLASS_ALPHA) -> np.ndarray:
    """Per-class loss weights w_c = n_c ** -alpha.

    alpha = 0 disables weighting (all ones); alpha = 1 weights by the inverse
    class frequency.
    """
    counts = np.asarray(counts, dtype=np.float64).reshape(-1)
    if counts.size < 1:
        raise ValueError("need at least one class count")
    if np.any(counts < 1):
        raise ValueError("class counts must all be >= 1")
    if not 0.0 <= alpha <= 1.0:
        raise ValueError(f"alpha must lie in [0, 1], got {alpha}")
    return counts ** -alpha
