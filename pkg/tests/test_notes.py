import numpy as np
import pytest

from svprobe import (
    FrameTargets,
    NoteEvent,
    midi_to_parts,
    parts_to_midi,
    rasterize_notes,
    read_note_file,
    write_note_file,
)


def test_midi_range_endpoints():
    assert midi_to_parts(36) == (0, 0)  # C2
    assert midi_to_parts(83) == (11, 3)  # B5


def test_midi_parts_round_trip():
    for midi in range(36, 84):
        pc, octave = midi_to_parts(midi)
        assert 0 <= pc <= 11 and 0 <= octave <= 3
        assert parts_to_midi(pc, octave) == midi


def test_midi_middle_c():
    # C4 sits in the third register of the 2-5 octave range
    assert midi_to_parts(60) == (0, 2)


def test_midi_out_of_range():
    for bad in (35, 84, 0, 127):
        with pytest.raises(ValueError, match="range"):
            midi_to_parts(bad)
    with pytest.raises(ValueError):
        parts_to_midi(12, 0)
    with pytest.raises(ValueError):
        parts_to_midi(0, 4)


def test_rasterize_empty_is_all_silence():
    targets = rasterize_notes([], 10, 50.0)
    assert np.array_equal(targets.silence, np.ones(10, dtype=int))
    assert np.array_equal(targets.onset, np.zeros(10, dtype=int))
    assert np.all(targets.pitch_class == 12)
    assert np.all(targets.octave == 4)


def test_rasterize_single_note():
    targets = rasterize_notes([NoteEvent(0.0, 0.1, 60)], 10, 50.0)
    assert targets.onset.tolist() == [1, 0, 0, 0, 0, 0, 0, 0, 0, 0]
    assert targets.silence.tolist() == [0] * 5 + [1] * 5
    assert targets.pitch_class[:5].tolist() == [0] * 5
    assert targets.octave[:5].tolist() == [2] * 5
    assert np.all(targets.pitch_class[5:] == 12)


def test_rasterize_abutting_notes():
    targets = rasterize_notes(
        [NoteEvent(0.0, 0.1, 60), NoteEvent(0.1, 0.2, 62)], 10, 50.0)
    assert targets.onset.tolist() == [1, 0, 0, 0, 0, 1, 0, 0, 0, 0]
    assert not np.any(targets.silence)
    assert targets.pitch_class[4] == 0 and targets.pitch_class[5] == 2


def test_rasterize_overlap_rejected():
    with pytest.raises(ValueError, match="overlap"):
        rasterize_notes([NoteEvent(0.0, 0.2, 60), NoteEvent(0.1, 0.3, 62)], 20, 50.0)


def test_rasterize_onset_beyond_clip_rejected():
    with pytest.raises(ValueError, match="beyond"):
        rasterize_notes([NoteEvent(1.0, 1.1, 60)], 10, 50.0)


def test_rasterize_clips_note_to_clip_end():
    targets = rasterize_notes([NoteEvent(0.1, 2.0, 48)], 10, 50.0)
    assert targets.onset[5] == 1
    assert np.all(targets.silence[5:] == 0)
    assert np.all(targets.silence[:5] == 1)


def test_rasterize_subframe_note_rejected():
    with pytest.raises(ValueError, match="spans no frames"):
        rasterize_notes([NoteEvent(0.001, 0.002, 60)], 10, 50.0)


def test_rasterize_fractional_pitch_rejected():
    with pytest.raises(ValueError, match="integral"):
        rasterize_notes([NoteEvent(0.0, 0.1, 60.5)], 10, 50.0)


def test_targets_invariants_enforced():
    with pytest.raises(ValueError, match="silence"):
        FrameTargets(onset=[0], silence=[1], pitch_class=[3], octave=[4])
    with pytest.raises(ValueError, match="silence"):
        FrameTargets(onset=[0], silence=[0], pitch_class=[12], octave=[2])
    with pytest.raises(ValueError, match="onset"):
        FrameTargets(onset=[1], silence=[1], pitch_class=[12], octave=[4])
    with pytest.raises(ValueError, match="length"):
        FrameTargets(onset=[0, 0], silence=[1], pitch_class=[12], octave=[4])


def test_note_event_validation():
    with pytest.raises(ValueError, match="offset"):
        NoteEvent(0.5, 0.5, 60)
    with pytest.raises(ValueError, match="offset"):
        NoteEvent(0.5, 0.2, 60)


def test_note_file_round_trip(tmp_path):
    notes = [NoteEvent(0.02, 0.54, 60.0), NoteEvent(0.6, 1.0, 71.5)]
    path = tmp_path / "notes.tsv"
    write_note_file(notes, path)
    loaded = read_note_file(path)
    assert len(loaded) == 2
    for original, read in zip(notes, loaded):
        assert read.onset_s == pytest.approx(original.onset_s, abs=1e-9)
        assert read.offset_s == pytest.approx(original.offset_s, abs=1e-9)
        assert read.pitch == pytest.approx(original.pitch, abs=1e-9)


def test_note_file_rejects_malformed(tmp_path):
    path = tmp_path / "bad.tsv"
    path.write_text("0.0 0.5\n")
    with pytest.raises(ValueError, match="onset offset pitch"):
        read_note_file(path)
