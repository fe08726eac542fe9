import math

import numpy as np
import pytest

from svprobe import FrameTargets, NoteEvent, clf_loss, inverse_frequency_weights, rasterize_notes, svt_loss
from svprobe.synth import random_note_sequence, saturated_logits


def _single_frame_targets(pitch=60):
    return rasterize_notes([NoteEvent(0.0, 0.02, pitch)], 1, 50.0)


def _random_targets(rng, frames):
    notes = random_note_sequence(rng, frames)
    return rasterize_notes(notes, frames, 50.0)


def _fd_logit_grad(loss_fn, logits, eps=1e-6):
    grad = np.zeros_like(logits, dtype=np.float64)
    it = np.nditer(logits, flags=["multi_index"])
    for _ in it:
        idx = it.multi_index
        bumped = logits.astype(np.float64).copy()
        bumped[idx] += eps
        hi = loss_fn(bumped)
        bumped[idx] -= 2 * eps
        lo = loss_fn(bumped)
        grad[idx] = (hi - lo) / (2 * eps)
    return grad


def test_svt_loss_closed_form_zero_logits():
    targets = _single_frame_targets()
    loss, _ = svt_loss(np.zeros((1, 20)), targets)
    expected = 15.0 * math.log(2) + math.log(2) + math.log(13) + math.log(5)
    assert abs(loss - expected) < 1e-9


def test_svt_loss_saturated_is_tiny(rng):
    targets = _random_targets(rng, 30)
    loss, _ = svt_loss(saturated_logits(targets, scale=30.0), targets)
    assert 0.0 <= loss < 1e-8


def test_svt_gradient_matches_finite_differences(rng):
    for _ in range(10):
        targets = _random_targets(rng, 4)
        logits = rng.normal(0, 2, size=(4, 20))
        w_o = float(rng.uniform(0.5, 20))
        w_s = float(rng.uniform(0.5, 3))
        _, analytic = svt_loss(logits, targets, w_o, w_s)
        numeric = _fd_logit_grad(lambda z: svt_loss(z, targets, w_o, w_s)[0], logits)
        denom = np.maximum(1.0, np.maximum(np.abs(analytic), np.abs(numeric)))
        assert np.max(np.abs(analytic - numeric) / denom) < 1e-6


def test_svt_loss_nonnegative(rng):
    for _ in range(100):
        frames = int(rng.integers(1, 12))
        targets = _random_targets(rng, max(frames, 4))
        logits = rng.normal(0, 5, size=(targets.frames, 20))
        loss, _ = svt_loss(logits, targets)
        assert loss >= 0.0


def test_svt_loss_frame_permutation_invariant_uniform_targets(rng):
    frames = 12
    targets = FrameTargets(
        onset=np.zeros(frames), silence=np.zeros(frames),
        pitch_class=np.full(frames, 5), octave=np.full(frames, 2))
    logits = rng.normal(size=(frames, 20))
    perm = rng.permutation(frames)
    base, _ = svt_loss(logits, targets, 1.0, 1.0)
    permuted, _ = svt_loss(logits[perm], targets, 1.0, 1.0)
    assert base == pytest.approx(permuted, abs=1e-12)


def test_svt_loss_input_validation(rng):
    targets = _single_frame_targets()
    with pytest.raises(ValueError, match="non-finite"):
        svt_loss(np.full((1, 20), np.nan), targets)
    with pytest.raises(ValueError, match="20"):
        svt_loss(np.zeros((1, 19)), targets)
    with pytest.raises(ValueError, match="frames"):
        svt_loss(np.zeros((2, 20)), targets)


def test_clf_loss_uniform_logits():
    loss, _ = clf_loss(np.zeros(10), 3)
    assert abs(loss - math.log(10)) < 1e-12


def test_clf_loss_weight_scales_exactly(rng):
    logits = rng.normal(size=6)
    base_loss, base_grad = clf_loss(logits, 2)
    weights = np.ones(6)
    weights[2] = 3.5
    loss, grad = clf_loss(logits, 2, weights)
    assert loss == pytest.approx(3.5 * base_loss, rel=1e-15)
    assert np.allclose(grad, 3.5 * base_grad, atol=1e-15)


def test_clf_loss_saturated_goes_to_zero():
    logits = np.full(5, -30.0)
    logits[1] = 30.0
    loss, _ = clf_loss(logits, 1)
    assert 0.0 <= loss < 1e-8


def test_clf_gradient_sums_to_zero(rng):
    for _ in range(50):
        k = int(rng.integers(2, 12))
        logits = rng.normal(0, 4, size=k)
        loss, grad = clf_loss(logits, int(rng.integers(0, k)))
        assert loss >= 0.0
        assert abs(grad.sum()) < 1e-12


def test_clf_gradient_matches_finite_differences(rng):
    for _ in range(20):
        k = int(rng.integers(2, 10))
        logits = rng.normal(0, 3, size=k)
        label = int(rng.integers(0, k))
        weights = rng.uniform(0.2, 5.0, size=k)
        _, analytic = clf_loss(logits, label, weights)
        numeric = _fd_logit_grad(lambda z: clf_loss(z, label, weights)[0], logits)
        denom = np.maximum(1.0, np.maximum(np.abs(analytic), np.abs(numeric)))
        assert np.max(np.abs(analytic - numeric) / denom) < 1e-6


def test_clf_loss_label_out_of_range():
    with pytest.raises(ValueError, match="label"):
        clf_loss(np.zeros(4), 4)
    with pytest.raises(ValueError, match="label"):
        clf_loss(np.zeros(4), -1)


def test_inverse_frequency_weights_alpha_zero_is_unweighted():
    assert np.array_equal(inverse_frequency_weights([5, 100, 7], alpha=0.0), np.ones(3))


def test_inverse_frequency_weights_alpha_one_is_reciprocal():
    assert inverse_frequency_weights([4], alpha=1.0)[0] == pytest.approx(0.25, abs=1e-15)


def test_inverse_frequency_weights_smoothed():
    w = inverse_frequency_weights([1241], alpha=0.2)[0]
    assert abs(w - 1241.0 ** -0.2) < 1e-9


def test_inverse_frequency_weights_validation():
    with pytest.raises(ValueError, match="counts"):
        inverse_frequency_weights([3, 0, 2], alpha=0.5)
    with pytest.raises(ValueError, match="alpha"):
        inverse_frequency_weights([3, 2], alpha=1.5)
