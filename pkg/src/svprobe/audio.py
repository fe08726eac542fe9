"""Audio preparation: chunking, RMS gating, and silence trimming.

These operate on already-separated vocal audio (vocal separation is an
external preprocessing step); samples are float arrays normalized to
full scale.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

DEFAULT_SAMPLE_RATE = 16000
DEFAULT_RMS_THRESHOLD = 0.01

TRIM_FRAME_S = 0.025
TRIM_HOP_S = 0.010


@dataclass
class ChunkSpec:
    chunk_s: float = 5.0
    sample_rate: int = DEFAULT_SAMPLE_RATE
    overlap_s: float = 0.0

    def __post_init__(self):
        if self.chunk_s <= 0:
            raise ValueError("chunk length must be positive")
        if self.sample_rate < 1:
            raise ValueError("sample rate must be positive")
        if self.overlap_s != 0.0:
            raise ValueError("only non-overlapping chunks are supported")

    @property
    def chunk_samples(self) -> int:
        return int(round(self.chunk_s * self.sample_rate))


def chunk_signal(samples: np.ndarray, spec: ChunkSpec) -> list[np.ndarray]:
    """Consecutive non-overlapping windows; a trailing partial chunk is dropped."""
    samples = np.asarray(samples, dtype=np.float64).reshape(-1)
    size = spec.chunk_samples
    count = samples.size // size
    return [samples[i * size:(i + 1) * size] for i in range(count)]


def rms(samples: np.ndarray) -> float:
    samples = np.asarray(samples, dtype=np.float64).reshape(-1)
    if samples.size == 0:
        raise ValueError("empty window")
    return float(np.sqrt(np.mean(samples * samples)))


def rms_gate(window: np.ndarray, threshold: float = DEFAULT_RMS_THRESHOLD) -> bool:
    """True (keep) when the window's RMS reaches the threshold."""
    return rms(window) >= threshold


def trim_silence(
    samples: np.ndarray,
    threshold: float = DEFAULT_RMS_THRESHOLD,
    sample_rate: int = DEFAULT_SAMPLE_RATE,
) -> np.ndarray:
    """Drop leading/trailing stretches whose framewise RMS stays below threshold.

    Frames are 25 ms windows on a 10 ms hop (the final windows may be
    partial); the kept span runs from the start of the first above-threshold
    window to the end of the last one.  Interior samples are never touched.
    """
    samples = np.asarray(samples, dtype=np.float64).reshape(-1)
    if samples.size == 0:
        return samples
    frame = max(1, int(round(TRIM_FRAME_S * sample_rate)))
    hop = max(1, int(round(TRIM_HOP_S * sample_rate)))

    voiced_starts = [
        start for start in range(0, samples.size, hop)
        if rms(samples[start:start + frame]) >= threshold
    ]
    if not voiced_starts:
        return samples[:0]
    begin = voiced_starts[0]
    end = min(voiced_starts[-1] + frame, samples.size)
    return samples[begin:end]
