"""Synthetic fixtures: separable probe datasets and frame-grid note material.

The classification generator plants a linearly separable class signal in one
chosen layer and fills every other layer with noise, so a correctly working
probe must both learn the head and push that layer's weight up.  The
transcription generator embeds the 20 target channels into one layer the same
way.  Used by the test suite and by the ``make-synthetic`` CLI command.
"""

from __future__ import annotations

import os

import numpy as np

from .features import FeatureStack, write_feature_file
from .manifest import ManifestEntry, write_manifest
from .notes import (
    FrameTargets,
    MIDI_MAX,
    MIDI_MIN,
    N_CHANNELS,
    NoteEvent,
    OCTAVE_SLICE,
    ONSET_CHANNEL,
    PITCH_SLICE,
    SILENCE_CHANNEL,
    rasterize_notes,
)

DEFAULT_PLANTED_LAYER = 3


def planted_layer_dataset(
    n_stacks: int,
    layers: int = 13,
    frames: int = 8,
    dim: int = 16,
    n_classes: int = 4,
    planted_layer: int = DEFAULT_PLANTED_LAYER,
    signal_scale: float = 4.0,
    noise_scale: float = 1.0,
    frame_rate: float = 50.0,
    seed: int = 0,
    class_counts=None,
) -> list[tuple[FeatureStack, int]]:
    """Classification stacks whose class signal lives in exactly one layer.

    Class c's frames in the planted layer are ``signal_scale * e_c`` plus
    noise; every other layer is pure noise.  ``class_counts`` fixes the label
    distribution (defaults to round-robin).
    """
    if n_classes > dim:
        raise ValueError("need dim >= n_classes for orthogonal class means")
    if not 0 <= planted_layer < layers:
        raise ValueError(f"planted layer {planted_layer} out of range for {layers} layers")
    if class_counts is None:
        labels = [i % n_classes for i in range(n_stacks)]
    else:
        if len(class_counts) != n_classes or sum(class_counts) != n_stacks:
            raise ValueError("class_counts must have one entry per class and sum to n_stacks")
        labels = [c for c, count in enumerate(class_counts) for _ in range(count)]

    rng = np.random.default_rng(seed)
    dataset = []
    for label in labels:
        data = rng.normal(0.0, noise_scale, size=(layers, frames, dim))
        data[planted_layer, :, label] += signal_scale
        dataset.append((FeatureStack(data=data, frame_rate=frame_rate), label))
    return dataset


def random_note_sequence(
    rng: np.random.Generator,
    frames: int,
    frame_rate: float = 50.0,
    min_note_frames: int = 3,
    max_note_frames: int = 10,
    min_gap_frames: int = 1,
    max_gap_frames: int = 4,
) -> list[NoteEvent]:
    """Monophonic notes on the frame grid, separated by at least one silent frame."""
    notes = []
    t = int(rng.integers(0, max_gap_frames + 1))
    while True:
        length = int(rng.integers(min_note_frames, max_note_frames + 1))
        if t + length > frames:
            break
        pitch = int(rng.integers(MIDI_MIN, MIDI_MAX + 1))
        notes.append(NoteEvent(onset_s=t / frame_rate, offset_s=(t + length) / frame_rate, pitch=float(pitch)))
        t += length + int(rng.integers(min_gap_frames, max_gap_frames + 1))
    return notes


def targets_to_channels(targets: FrameTargets) -> np.ndarray:
    """FrameTargets as a (frames, 20) 0/1 matrix in channel packing order."""
    out = np.zeros((targets.frames, N_CHANNELS))
    out[:, ONSET_CHANNEL] = targets.onset
    out[:, SILENCE_CHANNEL] = targets.silence
    rows = np.arange(targets.frames)
    out[rows, PITCH_SLICE.start + targets.pitch_class] = 1.0
    out[rows, OCTAVE_SLICE.start + targets.octave] = 1.0
    return out


def saturated_logits(targets: FrameTargets, scale: float = 30.0) -> np.ndarray:
    """Logits a perfect predictor would emit: +scale on target channels, -scale off them."""
    return scale * (2.0 * targets_to_channels(targets) - 1.0)


def planted_svt_dataset(
    n_stacks: int,
    layers: int = 13,
    frames: int = 120,
    dim: int = 24,
    planted_layer: int = DEFAULT_PLANTED_LAYER,
    target_scale: float = 13.0,
    noise_scale: float = 0.3,
    frame_rate: float = 50.0,
    seed: int = 0,
) -> list[tuple[FeatureStack, FrameTargets, list[NoteEvent]]]:
    """Transcription stacks carrying their own frame targets in one layer."""
    if dim < N_CHANNELS:
        raise ValueError(f"need dim >= {N_CHANNELS} to embed the target channels")
    rng = np.random.default_rng(seed)
    dataset = []
    for _ in range(n_stacks):
        notes = random_note_sequence(rng, frames, frame_rate)
        targets = rasterize_notes(notes, frames, frame_rate)
        data = rng.normal(0.0, noise_scale, size=(layers, frames, dim))
        data[planted_layer, :, :N_CHANNELS] += target_scale * targets_to_channels(targets)
        dataset.append((FeatureStack(data=data, frame_rate=frame_rate), targets, notes))
    return dataset


def _assign_splits(n: int, test_fraction: float, validation_fraction: float) -> list[str]:
    # interleave deciles so every split samples the whole label cycle
    test_buckets = int(round(10 * test_fraction))
    val_buckets = int(round(10 * validation_fraction))
    splits = []
    for i in range(n):
        bucket = i % 10
        if bucket < test_buckets:
            splits.append("test")
        elif bucket < test_buckets + val_buckets:
            splits.append("validation")
        else:
            splits.append("train")
    return splits


def write_fixture_dataset(
    out_dir,
    task: str,
    n_stacks: int = 60,
    seed: int = 0,
    layers: int = 13,
    dim: int = 16,
    n_classes: int = 4,
    frames: int = 8,
    test_fraction: float = 0.2,
    validation_fraction: float = 0.1,
) -> str:
    """Materialize a synthetic benchmark on disk; returns the manifest path.

    Feature files land in ``out_dir/features``; the manifest is
    ``out_dir/manifest.jsonl``.
    """
    feature_dir = os.path.join(out_dir, "features")
    os.makedirs(feature_dir, exist_ok=True)
    splits = _assign_splits(n_stacks, test_fraction, validation_fraction)

    entries = []
    if task in ("singer_id", "technique"):
        dataset = planted_layer_dataset(
            n_stacks, layers=layers, frames=frames, dim=dim,
            n_classes=n_classes, seed=seed)
        for i, ((stack, label), split) in enumerate(zip(dataset, splits)):
            path = os.path.join(feature_dir, f"clip{i:04d}.svpf")
            write_feature_file(stack, path)
            entries.append(ManifestEntry(
                clip_id=f"clip{i:04d}", feature_path=path, split=split,
                label=f"label{label:02d}"))
    elif task == "svt":
        dataset = planted_svt_dataset(
            n_stacks, layers=layers, frames=max(frames, 60),
            dim=max(dim, N_CHANNELS + 4), seed=seed)
        for i, ((stack, _, notes), split) in enumerate(zip(dataset, splits)):
            path = os.path.join(feature_dir, f"clip{i:04d}.svpf")
            write_feature_file(stack, path)
            entries.append(ManifestEntry(
                clip_id=f"clip{i:04d}", feature_path=path, split=split, notes=notes))
    else:
        raise ValueError(f"unknown task {task!r}")

    manifest_path = os.path.join(out_dir, "manifest.jsonl")
    write_manifest(entries, manifest_path)
    return manifest_path
