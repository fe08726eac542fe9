import json
import os

import numpy as np
import pytest

from svprobe.cli import main
from svprobe import NoteEvent, write_note_file
from svprobe.synth import write_fixture_dataset


def _write_wav(path, samples, rate=16000):
    from scipy.io import wavfile

    wavfile.write(path, rate, samples.astype(np.float32))


def _write_config(tmp_path, task, manifest, out, train=None, seed=4):
    config = {
        "task": task,
        "manifest": str(manifest),
        "out": str(out),
        "seed": seed,
        "train": train or {"stage1_lr": 0.05, "stage1_epochs": 120, "batch_size": 64},
    }
    path = tmp_path / f"{task}.json"
    path.write_text(json.dumps(config))
    return path


def test_chunk_command(tmp_path, capsys):
    t = np.arange(12 * 16000) / 16000
    audio = np.sin(2 * np.pi * 220 * t)
    audio[:16000] = 0.0  # one silent leading second -> chunk 0 has reduced rms
    wav = tmp_path / "in.wav"
    _write_wav(wav, audio)
    out = tmp_path / "chunks"
    assert main(["chunk", "--audio", str(wav), "--out", str(out), "--chunk-s", "5.0"]) == 0
    lines = (out / "decisions.csv").read_text().strip().split("\n")
    assert lines[0] == "index,start_s,end_s,rms,kept"
    assert len(lines) == 3  # 12 s -> 2 chunks
    kept = [line.split(",")[-1] for line in lines[1:]]
    assert kept == ["1", "1"]
    assert (out / "chunk0000.wav").exists() and (out / "chunk0001.wav").exists()


def test_chunk_gates_silent_audio(tmp_path):
    wav = tmp_path / "silent.wav"
    _write_wav(wav, np.zeros(6 * 16000))
    out = tmp_path / "chunks"
    assert main(["chunk", "--audio", str(wav), "--out", str(out), "--chunk-s", "5.0"]) == 0
    lines = (out / "decisions.csv").read_text().strip().split("\n")
    assert lines[1].endswith(",0")
    assert not (out / "chunk0000.wav").exists()


def test_encode_targets_command(tmp_path):
    notes_path = tmp_path / "notes.tsv"
    write_note_file([NoteEvent(0.0, 0.1, 60.0)], notes_path)
    out = tmp_path / "targets.csv"
    assert main(["encode-targets", "--notes", str(notes_path), "--frames", "10",
                 "--frame-rate", "50", "--out", str(out)]) == 0
    rows = out.read_text().strip().split("\n")
    assert rows[0] == "frame,onset,silence,pitch_class,octave"
    assert rows[1] == "0,1,0,0,2"
    assert rows[-1] == "9,0,1,12,4"


def test_train_decode_eval_pipeline(tmp_path):
    manifest = write_fixture_dataset(str(tmp_path / "data"), "svt", n_stacks=24, seed=6)
    run_dir = tmp_path / "run"
    config = _write_config(tmp_path, "svt", manifest, run_dir,
                           train={"stage1_lr": 0.05, "stage1_epochs": 60, "batch_size": 32})

    assert main(["train", "--config", str(config)]) == 0
    checkpoint = run_dir / "checkpoint.svpm"
    assert checkpoint.exists() and (run_dir / "history.csv").exists()

    # decode one test clip and score it against its reference
    records = [json.loads(line) for line in open(manifest)]
    test_record = next(r for r in records if r["split"] == "test")
    feature_path = os.path.join(os.path.dirname(manifest), test_record["features"])
    est_path = tmp_path / "est.tsv"
    assert main(["decode", "--checkpoint", str(checkpoint), "--features", feature_path,
                 "--out", str(est_path)]) == 0
    assert est_path.exists()

    ref_path = tmp_path / "ref.tsv"
    write_note_file([NoteEvent(*n) for n in test_record["notes"]], ref_path)
    assert main(["eval", "--ref", str(ref_path), "--est", str(est_path)]) == 0


def test_eval_note_files_output(tmp_path, capsys):
    ref = tmp_path / "ref.tsv"
    est = tmp_path / "est.tsv"
    notes = [NoteEvent(0.0, 0.5, 60.0), NoteEvent(0.8, 1.2, 64.0)]
    write_note_file(notes, ref)
    write_note_file(notes, est)
    assert main(["eval", "--ref", str(ref), "--est", str(est)]) == 0
    output = capsys.readouterr().out
    assert "COn.f1 = 1.000000" in output
    assert "COnPOff.precision = 1.000000" in output


def test_eval_checkpoint_mode(tmp_path):
    manifest = write_fixture_dataset(str(tmp_path / "data"), "singer_id", n_stacks=40, seed=9)
    run_dir = tmp_path / "run"
    config = _write_config(tmp_path, "singer_id", manifest, run_dir)
    assert main(["train", "--config", str(config)]) == 0

    eval_dir = tmp_path / "eval"
    assert main(["eval", "--config", str(config), "--checkpoint",
                 str(run_dir / "checkpoint.svpm"), "--out", str(eval_dir)]) == 0
    report = json.loads((eval_dir / "report.json").read_text())
    assert report["evaluation"]["accuracy"] >= 0.9
    assert (eval_dir / "report.txt").exists()


def test_eval_requires_a_mode():
    with pytest.raises(SystemExit, match="eval needs"):
        main(["eval"])


def test_analyze_layers_stdout(tmp_path, capsys):
    manifest = write_fixture_dataset(str(tmp_path / "data"), "singer_id", n_stacks=30, seed=1)
    run_dir = tmp_path / "run"
    config = _write_config(tmp_path, "singer_id", manifest, run_dir,
                           train={"stage1_epochs": 2, "batch_size": 16})
    assert main(["train", "--config", str(config)]) == 0
    capsys.readouterr()  # discard the train command's output
    assert main(["analyze-layers", "--checkpoint", str(run_dir / "checkpoint.svpm")]) == 0
    output = capsys.readouterr().out
    lines = output.strip().split("\n")
    assert lines[0] == "layer,weight"
    assert len(lines) == 14
    weights = [float(line.split(",")[1]) for line in lines[1:]]
    assert sum(weights) == pytest.approx(1.0, abs=1e-6)


def test_analyze_layers_directory_output(tmp_path):
    manifest = write_fixture_dataset(str(tmp_path / "data"), "singer_id", n_stacks=30, seed=1)
    run_dir = tmp_path / "run"
    config = _write_config(tmp_path, "singer_id", manifest, run_dir,
                           train={"stage1_epochs": 1, "batch_size": 16})
    assert main(["train", "--config", str(config)]) == 0
    out = tmp_path / "analysis"
    assert main(["analyze-layers", "--checkpoint", str(run_dir / "checkpoint.svpm"),
                 "--out", str(out)]) == 0
    assert (out / "layer_weights.csv").exists()
    assert (out / "layer_weights.png").exists()


def test_make_synthetic_command(tmp_path):
    out = tmp_path / "fixture"
    assert main(["make-synthetic", "--task", "svt", "--out", str(out), "--clips", "20"]) == 0
    assert (out / "manifest.jsonl").exists()
    lines = (out / "manifest.jsonl").read_text().strip().split("\n")
    assert len(lines) == 20


def test_errors_exit_nonzero(tmp_path, capsys):
    assert main(["decode", "--checkpoint", str(tmp_path / "nope.svpm"),
                 "--features", str(tmp_path / "nope.svpf"), "--out", str(tmp_path / "o.tsv")]) == 1
    assert "error:" in capsys.readouterr().err

    bad_config = tmp_path / "bad.json"
    bad_config.write_text(json.dumps({"task": "mystery", "manifest": "m.jsonl"}))
    assert main(["train", "--config", str(bad_config)]) == 1
    assert "error:" in capsys.readouterr().err
