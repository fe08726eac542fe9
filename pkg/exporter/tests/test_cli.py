import numpy as np

from svpf_exporter.cli import main
from svpf_exporter.format import write_svpf


def test_export_then_verify(frontend_dir, tone_wav, tmp_path, capsys):
    out = tmp_path / "tone.svpf"
    assert main(["export", "--audio", tone_wav, "--model", frontend_dir,
                 "--out", str(out)]) == 0
    assert "ok: 13 layers" in capsys.readouterr().out

    assert main(["verify", str(out)]) == 0
    assert "768 dims" in capsys.readouterr().out


def test_verify_good_file(tmp_path, capsys):
    path = tmp_path / "f.svpf"
    write_svpf(np.ones((13, 10, 768), dtype=np.float32), 50.0, path)
    assert main(["verify", str(path)]) == 0
    out = capsys.readouterr().out
    assert "ok: 13 layers x 10 frames x 768 dims" in out


def test_verify_bad_file_exits_nonzero(tmp_path, capsys):
    path = tmp_path / "junk.svpf"
    path.write_bytes(b"JUNKJUNKJUNKJUNKJUNKJUNK")
    assert main(["verify", str(path)]) == 1
    assert "error:" in capsys.readouterr().err


def test_unknown_model_exits_nonzero(tone_wav, tmp_path, capsys):
    assert main(["export", "--audio", tone_wav, "--model", "mystery",
                 "--out", str(tmp_path / "x.svpf")]) == 1
    assert "unknown model" in capsys.readouterr().err
