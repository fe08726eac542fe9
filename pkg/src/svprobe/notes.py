"""Note events, the 20-channel frame target encoding, and note <-> frame rasterization.

Each frame is supervised with four attributes packed into 20 channels:
``[onset, silence, pitch_class x13, octave x5]``.  Pitch class carries the 12
chroma plus an inactive class (index 12); octave carries registers 2-5 plus an
inactive class (index 4).  The supported pitch range is MIDI 36 (C2) through
83 (B5).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

MIDI_MIN = 36
MIDI_MAX = 83

N_PITCH_CLASSES = 13  # 12 chroma + inactive
N_OCTAVES = 5  # octaves 2-5 + inactive
PITCH_INACTIVE = 12
OCTAVE_INACTIVE = 4

# Channel packing inside the 20-vector.
ONSET_CHANNEL = 0
SILENCE_CHANNEL = 1
PITCH_SLICE = slice(2, 2 + N_PITCH_CLASSES)
OCTAVE_SLICE = slice(2 + N_PITCH_CLASSES, 2 + N_PITCH_CLASSES + N_OCTAVES)
N_CHANNELS = 2 + N_PITCH_CLASSES + N_OCTAVES


@dataclass(frozen=True)
class NoteEvent:
    """A single sung note: onset/offset in seconds, pitch as a MIDI number.

    Pitch is real-valued so that evaluation can measure cent deviations;
    decoder output and rasterizer input are integral.
    """

    onset_s: float
    offset_s: float
    pitch: float

    def __post_init__(self):
        if not (self.offset_s > self.onset_s):
            raise ValueError(f"note offset {self.offset_s} must be after onset {self.onset_s}")

    @property
    def duration_s(self) -> float:
        return self.offset_s - self.onset_s


@dataclass
class FrameTargets:
    """Per-frame transcription supervision.

    Invariants: a frame is silent exactly when both class attributes are
    inactive, and an onset frame is never silent.
    """

    onset: np.ndarray  # (frames,) in {0, 1}
    silence: np.ndarray  # (frames,) in {0, 1}
    pitch_class: np.ndarray  # (frames,) indices in [0, 12]
    octave: np.ndarray  # (frames,) indices in [0, 4]

    def __post_init__(self):
        self.onset = np.asarray(self.onset, dtype=np.int64).reshape(-1)
        self.silence = np.asarray(self.silence, dtype=np.int64).reshape(-1)
        self.pitch_class = np.asarray(self.pitch_class, dtype=np.int64).reshape(-1)
        self.octave = np.asarray(self.octave, dtype=np.int64).reshape(-1)
        n = self.onset.size
        if not (self.silence.size == self.pitch_class.size == self.octave.size == n):
            raise ValueError("target attribute arrays must all have the same length")
        if n < 1:
            raise ValueError("targets need at least one frame")
        for name, arr, hi in (
            ("onset", self.onset, 1),
            ("silence", self.silence, 1),
            ("pitch_class", self.pitch_class, N_PITCH_CLASSES - 1),
            ("octave", self.octave, N_OCTAVES - 1),
        ):
            if arr.min() < 0 or arr.max() > hi:
                raise ValueError(f"{name} values must lie in [0, {hi}]")
        silent = self.silence == 1
        if not np.array_equal(silent, self.pitch_class == PITCH_INACTIVE):
            raise ValueError("silence and inactive pitch class must coincide")
        if not np.array_equal(silent, self.octave == OCTAVE_INACTIVE):
            raise ValueError("silence and inactive octave must coincide")
        if np.any((self.onset == 1) & silent):
            raise ValueError("onset frames cannot be silent")

    @property
    def frames(self) -> int:
        return self.onset.size


def midi_to_parts(pitch: int) -> tuple[int, int]:
    """Split an integral MIDI number into (pitch class, octave index)."""
    pitch = int(pitch)
    if pitch < MIDI_MIN or pitch > MIDI_MAX:
        raise ValueError(f"pitch {pitch} outside the supported range [{MIDI_MIN}, {MIDI_MAX}]")
    return pitch % 12, pitch // 12 - 3


def parts_to_midi(pitch_class: int, octave: int) -> int:
    """Inverse of :func:`midi_to_parts` for the active classes."""
    if not 0 <= pitch_class < 12:
        raise ValueError(f"pitch class {pitch_class} must be an active chroma in [0, 11]")
    if not 0 <= octave < 4:
        raise ValueError(f"octave index {octave} must be an active register in [0, 3]")
    return 12 * (octave + 3) + pitch_class


def rasterize_notes(notes, frames: int, frame_rate: float) -> FrameTargets:
    """Render a monophonic note sequence onto a frame grid.

    A note occupies frames ``[round(onset_s * fps), round(offset_s * fps))``
    with its onset flag on the first of them; everything else is silence with
    inactive classes.  Frames beyond the clip end are dropped.
    """
    if frames < 1:
        raise ValueError("need at least one frame")
    if frame_rate <= 0:
        raise ValueError("frame rate must be positive")
    notes = sorted(notes, key=lambda n: n.onset_s)
    for prev, nxt in zip(notes, notes[1:]):
        if nxt.onset_s < prev.offset_s:
            raise ValueError(
                f"overlapping notes: ({prev.onset_s}, {prev.offset_s}) and ({nxt.onset_s}, {nxt.offset_s})"
            )

    onset = np.zeros(frames, dtype=np.int64)
    silence = np.ones(frames, dtype=np.int64)
    pitch_class = np.full(frames, PITCH_INACTIVE, dtype=np.int64)
    octave = np.full(frames, OCTAVE_INACTIVE, dtype=np.int64)

    for note in notes:
        if abs(note.pitch - round(note.pitch)) > 1e-9:
            raise ValueError(f"rasterization requires integral pitches, got {note.pitch}")
        pc, oc = midi_to_parts(round(note.pitch))
        start = int(np.round(note.onset_s * frame_rate))
        stop = int(np.round(note.offset_s * frame_rate))
        if start >= frames:
            raise ValueError(f"note onset at frame {start} is beyond the clip ({frames} frames)")
        if stop <= start:
            raise ValueError(f"note ({note.onset_s}, {note.offset_s}) spans no frames at {frame_rate} fps")
        stop = min(stop, frames)
        onset[start] = 1
        silence[start:stop] = 0
        pitch_class[start:stop] = pc
        octave[start:stop] = oc

    return FrameTargets(onset=onset, silence=silence, pitch_class=pitch_class, octave=octave)


def write_note_file(notes, path) -> None:
    """One tab-separated record per note: onset_s, offset_s, pitch."""
    with open(path, "w", encoding="utf-8") as fh:
        for note in notes:
            fh.write(f"{note.onset_s:.6f}\t{note.offset_s:.6f}\t{note.pitch:.6f}\n")


def read_note_file(path) -> list[NoteEvent]:
    notes = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            if len(parts) != 3:
                raise ValueError(f"{path}:{lineno}: expected 'onset offset pitch', got {line!r}")
            onset_s, offset_s, pitch = (float(p) for p in parts)
            notes.append(NoteEvent(onset_s=onset_s, offset_s=offset_s, pitch=pitch))
    return notes
