"""Frame logits -> note events.

Decoding rules, applied in order:

1. Onsets: a frame is an onset candidate when its onset probability exceeds
   the threshold and is a local maximum (>= both neighbors, one-sided at the
   clip edges).  Runs of adjacent candidates collapse to their earliest frame.
2. Offsets: the first frame after the onset whose silence probability exceeds
   the silence threshold, clipped to the next onset or the clip end.
3. Pitch: the modal (pitch class, octave) argmax pair over the note's frames,
   counting only frames where both attributes are active; ties break toward
   the lowest MIDI number.  Notes with no valid frame, or spanning fewer than
   ``min_note_frames`` frames, are dropped.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .notes import (
    N_CHANNELS,
    NoteEvent,
    OCTAVE_INACTIVE,
    OCTAVE_SLICE,
    ONSET_CHANNEL,
    PITCH_INACTIVE,
    PITCH_SLICE,
    SILENCE_CHANNEL,
    parts_to_midi,
)

DEFAULT_ONSET_THRESHOLD = 0.4
DEFAULT_SILENCE_THRESHOLD = 0.5


@dataclass
class DecoderConfig:
    onset_threshold: float = DEFAULT_ONSET_THRESHOLD
    silence_threshold: float = DEFAULT_SILENCE_THRESHOLD
    min_note_frames: int = 1

    def __post_init__(self):
        for name, value in (("onset_threshold", self.onset_threshold),
                            ("silence_threshold", self.silence_threshold)):
            if not 0.0 < value < 1.0:
                raise ValueError(f"{name} must lie in (0, 1), got {value}")
        if self.min_note_frames < 1:
            raise ValueError("min_note_frames must be at least 1")


def _sigmoid(z):
    return np.where(z >= 0, 1.0 / (1.0 + np.exp(-z)), np.exp(z) / (1.0 + np.exp(z)))


def onset_frames(onset_probs: np.ndarray, threshold: float) -> list[int]:
    """Thresholded local maxima, with adjacent candidates merged to the earliest."""
    t_count = onset_probs.size
    candidates = []
    for t in range(t_count):
        p = onset_probs[t]
        if p <= threshold:
            continue
        if t > 0 and p < onset_probs[t - 1]:
            continue
        if t < t_count - 1 and p < onset_probs[t + 1]:
            continue
        candidates.append(t)
    merged = []
    for t in candidates:
        if merged and t == merged[-1][-1] + 1:
            merged[-1].append(t)
        else:
            merged.append([t])
    return [run[0] for run in merged]


def decode_notes(
    frame_logits: np.ndarray,
    config: DecoderConfig | None = None,
    frame_rate: float = 50.0,
) -> list[NoteEvent]:
    """Decode (frames, 20) logits into a sorted, non-overlapping note list."""
    if config is None:
        config = DecoderConfig()
    logits = np.asarray(frame_logits, dtype=np.float64)
    if logits.ndim != 2 or logits.shape[1] != N_CHANNELS:
        raise ValueError(f"expected (frames, {N_CHANNELS}) logits, got shape {logits.shape}")
    if not np.all(np.isfinite(logits)):
        raise ValueError("logits contain non-finite values")
    if frame_rate <= 0:
        raise ValueError("frame rate must be positive")

    t_count = logits.shape[0]
    onset_probs = _sigmoid(logits[:, ONSET_CHANNEL])
    silence_probs = _sigmoid(logits[:, SILENCE_CHANNEL])
    pitch_argmax = np.argmax(logits[:, PITCH_SLICE], axis=1)
    octave_argmax = np.argmax(logits[:, OCTAVE_SLICE], axis=1)

    onsets = onset_frames(onset_probs, config.onset_threshold)

    events = []
    for idx, start in enumerate(onsets):
        next_onset = onsets[idx + 1] if idx + 1 < len(onsets) else t_count
        stop = next_onset
        for t in range(start + 1, next_onset):
            if silence_probs[t] > config.silence_threshold:
                stop = t
                break
        if stop - start < config.min_note_frames:
            continue

        votes: dict[int, int] = {}
        for t in range(start, stop):
            pc, oc = pitch_argmax[t], octave_argmax[t]
            if pc == PITCH_INACTIVE or oc == OCTAVE_INACTIVE:
                continue
            midi = parts_to_midi(int(pc), int(oc))
            votes[midi] = votes.get(midi, 0) + 1
        if not votes:
            continue
        best = max(votes.values())
        pitch = min(m for m, count in votes.items() if count == best)
        events.append(NoteEvent(onset_s=start / frame_rate, offset_s=stop / frame_rate, pitch=float(pitch)))

    return events
