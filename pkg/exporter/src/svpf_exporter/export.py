"""Run a pretrained frontend over audio and dump its layer stack to .svpf.

All four supported frontends share the same interface: raw 16 kHz waveform
in, 12 transformer encoder layers of 768-dim frames out.  The export stacks
all 13 hidden states (the encoder input plus every layer) so the probe can
learn its own layer weighting downstream.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from math import gcd

import numpy as np

from .format import write_svpf

TARGET_SAMPLE_RATE = 16000

# Public checkpoints for the supported frontend identifiers.  A local
# directory containing a saved model is accepted as well, which keeps the
# export path testable without hub access.
MODEL_REGISTRY = {
    "wav2vec2": "facebook/wav2vec2-base-960h",
    "wavlm": "microsoft/wavlm-base-plus",
    "mert": "m-a-p/MERT-v0-public",
    "music2vec": "m-a-p/music2vec-v1",
}


class ExportError(ValueError):
    pass


@dataclass
class ExportRequest:
    audio_path: str
    model: str
    out_path: str
    sample_rate: int = TARGET_SAMPLE_RATE


def resolve_model(identifier: str) -> str:
    if identifier in MODEL_REGISTRY:
        return MODEL_REGISTRY[identifier]
    if os.path.isdir(identifier):
        return identifier
    known = ", ".join(sorted(MODEL_REGISTRY))
    raise ExportError(
        f"unknown model {identifier!r}: expected one of {known} or a saved-model directory")


def load_audio(path, target_rate: int = TARGET_SAMPLE_RATE) -> np.ndarray:
    """Mono float64 waveform at the target rate; stereo is downmixed by averaging."""
    from scipy.io import wavfile

    try:
        rate, samples = wavfile.read(path)
    except Exception as exc:
        raise ExportError(f"undecodable audio {path!r}: {exc}") from exc
    samples = np.asarray(samples)
    if samples.ndim == 2:
        samples = samples.mean(axis=1)
    if np.issubdtype(samples.dtype, np.integer):
        samples = samples / float(np.iinfo(samples.dtype).max)
    samples = samples.astype(np.float64)
    if rate != target_rate:
        from scipy.signal import resample_poly

        g = gcd(int(rate), int(target_rate))
        samples = resample_poly(samples, target_rate // g, rate // g)
    return samples


def _frame_rate_from_config(config, sample_rate: int, frames: int, n_samples: int) -> float:
    strides = getattr(config, "conv_stride", None)
    if strides:
        return sample_rate / float(np.prod(strides))
    return frames * sample_rate / n_samples


def export_features(request: ExportRequest) -> None:
    """Resample, run the frontend, and write the stacked hidden states."""
    import torch
    from transformers import AutoModel

    source = resolve_model(request.model)
    samples = load_audio(request.audio_path, request.sample_rate)
    if samples.size == 0:
        raise ExportError(f"{request.audio_path!r} contains no samples")

    model = AutoModel.from_pretrained(source)
    model.eval()

    waveform = torch.from_numpy(samples).to(torch.float32).unsqueeze(0)
    with torch.inference_mode():
        outputs = model(input_values=waveform, output_hidden_states=True)
    hidden_states = outputs.hidden_states
    if hidden_states is None:
        raise ExportError(f"model {request.model!r} does not expose hidden states")

    stack = np.stack([h.squeeze(0).cpu().numpy() for h in hidden_states]).astype(np.float32)
    if not np.all(np.isfinite(stack)):
        raise ExportError("frontend produced non-finite features")

    frame_rate = _frame_rate_from_config(
        model.config, request.sample_rate, stack.shape[1], samples.size)
    write_svpf(stack, frame_rate, request.out_path)
