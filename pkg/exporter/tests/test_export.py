import numpy as np
import pytest

from svpf_exporter import ExportError, ExportRequest, export_features, load_audio, verify_svpf
from svpf_exporter.export import resolve_model

from svprobe import read_feature_file

from conftest import write_tone_wav


def test_export_five_second_tone(frontend_dir, tone_wav, tmp_path):
    out = tmp_path / "tone.svpf"
    export_features(ExportRequest(audio_path=tone_wav, model=frontend_dir, out_path=str(out)))

    stack = read_feature_file(out)
    assert stack.layers == 13
    assert stack.dim == 768
    assert abs(stack.frames - 250) <= 2
    assert stack.frame_rate == 50.0  # 320-sample hop at 16 kHz

    report = verify_svpf(out)
    assert (report.layers, report.frames, report.dim) == (13, stack.frames, 768)


def test_export_is_deterministic(frontend_dir, tone_wav, tmp_path):
    a, b = tmp_path / "a.svpf", tmp_path / "b.svpf"
    export_features(ExportRequest(audio_path=tone_wav, model=frontend_dir, out_path=str(a)))
    export_features(ExportRequest(audio_path=tone_wav, model=frontend_dir, out_path=str(b)))
    assert a.read_bytes() == b.read_bytes()


def test_export_silence_stays_finite(frontend_dir, tmp_path):
    from scipy.io import wavfile

    wav = tmp_path / "silence.wav"
    wavfile.write(wav, 16000, np.zeros(16000 * 2, dtype=np.float32))
    out = tmp_path / "silence.svpf"
    export_features(ExportRequest(audio_path=str(wav), model=frontend_dir, out_path=str(out)))
    stack = read_feature_file(out)
    assert np.all(np.isfinite(stack.data))


def test_unknown_model_rejected():
    with pytest.raises(ExportError, match="unknown model"):
        resolve_model("hubert-large")


def test_known_ids_resolve_to_checkpoints():
    assert resolve_model("wav2vec2") == "facebook/wav2vec2-base-960h"
    assert resolve_model("wavlm") == "microsoft/wavlm-base-plus"
    assert resolve_model("mert") == "m-a-p/MERT-v0-public"
    assert resolve_model("music2vec") == "m-a-p/music2vec-v1"


def test_undecodable_audio_rejected(frontend_dir, tmp_path):
    bogus = tmp_path / "not_audio.wav"
    bogus.write_bytes(b"this is not a riff file")
    with pytest.raises(ExportError, match="undecodable audio"):
        export_features(ExportRequest(audio_path=str(bogus), model=frontend_dir,
                                      out_path=str(tmp_path / "x.svpf")))


def test_stereo_downmix(tmp_path):
    wav = write_tone_wav(tmp_path / "stereo.wav", duration_s=1.0, stereo=True)
    samples = load_audio(wav)
    assert samples.ndim == 1
    assert samples.size == 16000
    # downmix is the channel mean: (0.5 + 0.125) / 2 peak
    assert np.max(np.abs(samples)) == pytest.approx(0.3125, abs=1e-3)


def test_resampling_to_16k(tmp_path):
    wav = write_tone_wav(tmp_path / "hi.wav", duration_s=1.0, rate=44100)
    samples = load_audio(wav)
    assert samples.size == 16000


def test_resampled_audio_exports_expected_frames(frontend_dir, tmp_path):
    wav = write_tone_wav(tmp_path / "hi.wav", duration_s=5.0, rate=44100)
    out = tmp_path / "hi.svpf"
    export_features(ExportRequest(audio_path=wav, model=frontend_dir, out_path=str(out)))
    stack = read_feature_file(out)
    assert abs(stack.frames - 250) <= 2
