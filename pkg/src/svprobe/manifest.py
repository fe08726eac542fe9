"""Dataset manifests: one JSON record per line.

Each record names a clip, its feature file, its split, and exactly one task
payload -- a class label (classification tasks) or a note list
(transcription)::

    {"id": "a01", "features": "feats/a01.svpf", "split": "train", "label": "singer03"}
    {"id": "b02", "features": "feats/b02.svpf", "split": "test", "notes": [[0.0, 0.42, 60], ...]}

Feature paths are resolved relative to the manifest file.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass

from .notes import NoteEvent

SPLITS = ("train", "validation", "test")


class ManifestError(ValueError):
    """Raised for malformed manifest records."""


@dataclass
class ManifestEntry:
    clip_id: str
    feature_path: str
    split: str
    label: str | None = None
    notes: list[NoteEvent] | None = None

    def __post_init__(self):
        if self.split not in SPLITS:
            raise ManifestError(f"clip {self.clip_id!r}: unknown split {self.split!r}")
        if (self.label is None) == (self.notes is None):
            raise ManifestError(f"clip {self.clip_id!r}: need exactly one of label / notes")


def _parse_notes(raw, clip_id: str) -> list[NoteEvent]:
    notes = []
    for item in raw:
        if not isinstance(item, (list, tuple)) or len(item) != 3:
            raise ManifestError(f"clip {clip_id!r}: note records must be [onset, offset, pitch]")
        notes.append(NoteEvent(onset_s=float(item[0]), offset_s=float(item[1]), pitch=float(item[2])))
    return notes


def read_manifest(path, check_files: bool = True) -> list[ManifestEntry]:
    base = os.path.dirname(os.path.abspath(path))
    entries = []
    seen = set()
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ManifestError(f"{path}:{lineno}: invalid JSON ({exc})") from exc
            for key in ("id", "features", "split"):
                if key not in record:
                    raise ManifestError(f"{path}:{lineno}: missing field {key!r}")
            clip_id = str(record["id"])
            if clip_id in seen:
                raise ManifestError(f"{path}:{lineno}: duplicate clip id {clip_id!r}")
            seen.add(clip_id)
            feature_path = record["features"]
            if not os.path.isabs(feature_path):
                feature_path = os.path.join(base, feature_path)
            notes = _parse_notes(record["notes"], clip_id) if "notes" in record else None
            entry = ManifestEntry(
                clip_id=clip_id,
                feature_path=feature_path,
                split=str(record["split"]),
                label=str(record["label"]) if "label" in record else None,
                notes=notes,
            )
            if check_files and not os.path.isfile(entry.feature_path):
                raise ManifestError(f"{path}:{lineno}: feature file not found: {entry.feature_path}")
            entries.append(entry)
    if not entries:
        raise ManifestError(f"{path}: empty manifest")
    return entries


def write_manifest(entries, path) -> None:
    base = os.path.dirname(os.path.abspath(path))
    with open(path, "w", encoding="utf-8") as fh:
        for entry in entries:
            record: dict = {"id": entry.clip_id}
            record["features"] = os.path.relpath(entry.feature_path, base)
            record["split"] = entry.split
            if entry.label is not None:
                record["label"] = entry.label
            if entry.notes is not None:
                record["notes"] = [[n.onset_s, n.offset_s, n.pitch] for n in entry.notes]
            fh.write(json.dumps(record) + "\n")


def split_entries(entries) -> dict[str, list[ManifestEntry]]:
    out: dict[str, list[ManifestEntry]] = {split: [] for split in SPLITS}
    for entry in entries:
        out[entry.split].append(entry)
    return out
