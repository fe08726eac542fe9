import os

import numpy as np
import pytest

os.environ.setdefault("HF_HUB_OFFLINE", "1")
os.environ.setdefault("TRANSFORMERS_OFFLINE", "1")


@pytest.fixture(scope="session")
def frontend_dir(tmp_path_factory):
    """A randomly initialized 13-layer/768-dim frontend saved to disk.

    Shape-compatible with the real checkpoints (same hidden size, layer count
    and conv stride); the weights are untrained, which the format tests do
    not care about.
    """
    import torch
    from transformers import Wav2Vec2Config, Wav2Vec2Model

    torch.manual_seed(0)
    config = Wav2Vec2Config(
        hidden_size=768,
        num_hidden_layers=12,
        num_attention_heads=12,
        intermediate_size=768,
        num_conv_pos_embeddings=16,
    )
    model = Wav2Vec2Model(config)
    path = tmp_path_factory.mktemp("frontend") / "model"
    model.save_pretrained(path)
    return str(path)


def write_tone_wav(path, duration_s=5.0, rate=16000, freq=440.0, stereo=False):
    from scipy.io import wavfile

    t = np.arange(int(duration_s * rate)) / rate
    tone = (0.5 * np.sin(2 * np.pi * freq * t)).astype(np.float32)
    if stereo:
        tone = np.stack([tone, 0.25 * tone], axis=1)
    wavfile.write(path, rate, tone)
    return str(path)


@pytest.fixture
def tone_wav(tmp_path):
    return write_tone_wav(tmp_path / "tone.wav")
