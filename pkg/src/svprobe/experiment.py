"""End-to-end runs: manifest -> stage-1 training -> test-split evaluation -> report.

A full run writes, into its output directory:

* ``checkpoint.svpm``     -- the trained probe
* ``history.csv``         -- per-epoch mean training loss
* ``layer_weights.csv``   -- normalized layer weights (label, weight)
* ``report.json``         -- machine-readable per-clip records plus aggregates
* ``report.txt``          -- the same aggregates as key/value lines
* ``layer_weights.png``, ``training_loss.png``

Reports contain nothing run-dependent beyond the config and seed, so a rerun
with identical inputs is byte-identical.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field

import numpy as np

from .decoder import DecoderConfig, decode_notes
from .evaluate import (
    CRITERIA,
    MatchTolerances,
    classification_scores,
    classification_scores_to_dict,
    format_report,
    layer_weight_report,
    layer_weights_csv,
    transcription_scores,
    transcription_scores_to_dict,
)
from .features import read_feature_file
from .figures import plot_layer_weights, plot_loss_history
from .losses import inverse_frequency_weights
from .manifest import read_manifest, split_entries
from .model import (
    ProbeModel,
    TRANSCRIPTION_OUTPUTS,
    TaskKind,
    forward_clip,
    forward_frame,
    init_model,
    save_checkpoint,
)
from .notes import rasterize_notes
from .training import TrainConfig, train_stage1

TASKS = ("singer_id", "svt", "technique")

# Stage-1 schedule defaults per task: epochs and batch size.
TASK_DEFAULTS = {
    "singer_id": {"stage1_epochs": 6, "batch_size": 32},
    "svt": {"stage1_epochs": 6, "batch_size": 32},
    "technique": {"stage1_epochs": 5, "batch_size": 16},
}


class ConfigError(ValueError):
    """Raised for invalid run configurations, before any file I/O."""


@dataclass
class RunConfig:
    task: str
    manifest_path: str
    out_dir: str
    seed: int = 0
    train: TrainConfig = field(default_factory=TrainConfig)
    decoder: DecoderConfig = field(default_factory=DecoderConfig)
    tolerances: MatchTolerances = field(default_factory=MatchTolerances)

    def __post_init__(self):
        if self.task not in TASKS:
            raise ConfigError(f"unknown task {self.task!r}, expected one of {TASKS}")

    @property
    def task_kind(self) -> TaskKind:
        return TaskKind.FRAME_TRANSCRIPTION if self.task == "svt" else TaskKind.CLIP_CLASSIFICATION


def load_run_config(path, seed=None, out_dir=None, task=None) -> RunConfig:
    """Parse a JSON run config; explicit arguments override file values."""
    with open(path, "r", encoding="utf-8") as fh:
        raw = json.load(fh)
    if not isinstance(raw, dict):
        raise ConfigError(f"{path}: config must be a JSON object")

    chosen_task = task if task is not None else raw.get("task")
    if chosen_task not in TASKS:
        raise ConfigError(f"unknown task {chosen_task!r}, expected one of {TASKS}")

    train_kwargs = dict(TASK_DEFAULTS[chosen_task])
    train_kwargs.update(raw.get("train", {}))
    chosen_seed = seed if seed is not None else int(raw.get("seed", 0))
    train_kwargs["seed"] = chosen_seed

    base = os.path.dirname(os.path.abspath(path))

    def resolve(p):
        return p if os.path.isabs(p) else os.path.join(base, p)

    manifest_path = raw.get("manifest")
    if manifest_path is None:
        raise ConfigError(f"{path}: missing 'manifest'")
    chosen_out = out_dir if out_dir is not None else raw.get("out", "run_output")

    try:
        return RunConfig(
            task=chosen_task,
            manifest_path=resolve(manifest_path),
            out_dir=resolve(chosen_out),
            seed=chosen_seed,
            train=TrainConfig(**train_kwargs),
            decoder=DecoderConfig(**raw.get("decoder", {})),
            tolerances=MatchTolerances(**raw.get("tolerances", {})),
        )
    except TypeError as exc:
        raise ConfigError(f"{path}: {exc}") from exc


def _check_payloads(config: RunConfig, entries) -> None:
    wants_notes = config.task == "svt"
    for entry in entries:
        if wants_notes and entry.notes is None:
            raise ConfigError(f"clip {entry.clip_id!r} has no note payload for task 'svt'")
        if not wants_notes and entry.label is None:
            raise ConfigError(f"clip {entry.clip_id!r} has no label payload for task {config.task!r}")


def _load_stacks(entries):
    return [read_feature_file(entry.feature_path) for entry in entries]


def _label_vocabulary(entries) -> list[str]:
    return sorted({entry.label for entry in entries})


def _classification_pairs(entries, stacks, vocabulary):
    index = {label: i for i, label in enumerate(vocabulary)}
    return [(stack, index[entry.label]) for entry, stack in zip(entries, stacks)]


def _svt_pairs(entries, stacks):
    return [
        (stack, rasterize_notes(entry.notes, stack.frames, stack.frame_rate))
        for entry, stack in zip(entries, stacks)
    ]


def _technique_class_weights(train_pairs, vocabulary, alpha):
    counts = np.zeros(len(vocabulary))
    for _, label in train_pairs:
        counts[label] += 1
    if np.any(counts < 1):
        missing = [vocabulary[i] for i in np.flatnonzero(counts < 1)]
        raise ConfigError(f"classes absent from the train split: {missing}")
    return inverse_frequency_weights(counts, alpha)


def train_from_manifest(config: RunConfig):
    """Train a fresh probe on the manifest's train split.

    Returns (model, history, vocabulary, class_weights); vocabulary and
    class_weights are None except for the tasks that use them.
    """
    entries = read_manifest(config.manifest_path)
    _check_payloads(config, entries)
    by_split = split_entries(entries)
    if not by_split["train"]:
        raise ConfigError("manifest has no train entries")

    train_stacks = _load_stacks(by_split["train"])
    layers, dim = train_stacks[0].layers, train_stacks[0].dim

    vocabulary = None
    class_weights = None
    if config.task == "svt":
        outputs = TRANSCRIPTION_OUTPUTS
        train_pairs = _svt_pairs(by_split["train"], train_stacks)
    else:
        vocabulary = _label_vocabulary(entries)
        outputs = len(vocabulary)
        train_pairs = _classification_pairs(by_split["train"], train_stacks, vocabulary)
        if config.task == "technique":
            class_weights = _technique_class_weights(train_pairs, vocabulary, config.train.class_alpha)

    model = init_model(layers, dim, outputs, config.task_kind, seed=config.seed)
    model, history = train_stage1(train_pairs, model, config.train, class_weights=class_weights)
    return model, history, vocabulary, class_weights


def evaluate_test_split(config: RunConfig, model: ProbeModel, vocabulary=None):
    """Evaluate ``model`` on the manifest's test split.

    Returns (aggregate, per-clip records).  For classification the label
    vocabulary is recomputed from the manifest when not supplied.
    """
    entries = read_manifest(config.manifest_path)
    _check_payloads(config, entries)
    by_split = split_entries(entries)
    if not by_split["test"]:
        raise ConfigError("manifest has no test entries")
    test_entries = by_split["test"]
    test_stacks = _load_stacks(test_entries)

    if config.task == "svt":
        return _evaluate_transcription(model, test_entries, test_stacks,
                                       config.decoder, config.tolerances)
    if vocabulary is None:
        vocabulary = _label_vocabulary(entries)
    if len(vocabulary) != model.outputs:
        raise ConfigError(
            f"manifest has {len(vocabulary)} labels but the model predicts {model.outputs} classes")
    return _evaluate_classification(model, test_entries, test_stacks, vocabulary)


def _evaluate_classification(model, entries, stacks, vocabulary, ks=(1, 2, 3)):
    index = {label: i for i, label in enumerate(vocabulary)}
    logits = np.stack([forward_clip(model, stack) for stack in stacks])
    labels = np.array([index[entry.label] for entry in entries])
    usable_ks = tuple(k for k in ks if k <= len(vocabulary))
    scores = classification_scores(logits, labels, ks=usable_ks)
    clips = []
    for entry, row, label in zip(entries, logits, labels):
        predicted = int(np.argmax(row))
        clips.append({
            "id": entry.clip_id,
            "label": vocabulary[label],
            "predicted": vocabulary[predicted],
            "correct": bool(predicted == label),
        })
    return classification_scores_to_dict(scores), clips


def _evaluate_transcription(model, entries, stacks, decoder, tolerances):
    clips = []
    sums = {criterion: {"precision": 0.0, "recall": 0.0, "f1": 0.0, "matched_count": 0}
            for criterion in CRITERIA}
    for entry, stack in zip(entries, stacks):
        frame_logits = forward_frame(model, stack)
        estimated = decode_notes(frame_logits, decoder, frame_rate=stack.frame_rate)
        scores = transcription_scores(entry.notes, estimated, tolerances)
        record = transcription_scores_to_dict(scores)
        clips.append({
            "id": entry.clip_id,
            "reference_notes": len(entry.notes),
            "estimated_notes": len(estimated),
            "scores": record,
        })
        for criterion in CRITERIA:
            for key in ("precision", "recall", "f1"):
                sums[criterion][key] += record[criterion][key]
            sums[criterion]["matched_count"] += record[criterion]["matched_count"]
    n = len(entries)
    aggregate = {
        criterion: {
            "precision": sums[criterion]["precision"] / n,
            "recall": sums[criterion]["recall"] / n,
            "f1": sums[criterion]["f1"] / n,
            "matched_count": sums[criterion]["matched_count"],
        }
        for criterion in CRITERIA
    }
    return aggregate, clips


def write_training_artifacts(config: RunConfig, model: ProbeModel, history) -> None:
    os.makedirs(config.out_dir, exist_ok=True)
    save_checkpoint(model, os.path.join(config.out_dir, "checkpoint.svpm"))
    with open(os.path.join(config.out_dir, "history.csv"), "w", encoding="utf-8") as fh:
        fh.write("epoch,mean_loss\n")
        for epoch, loss in enumerate(history, 1):
            fh.write(f"{epoch},{loss:.9f}\n")
    with open(os.path.join(config.out_dir, "layer_weights.csv"), "w", encoding="utf-8") as fh:
        fh.write(layer_weights_csv(model))
    plot_layer_weights(layer_weight_report(model),
                       os.path.join(config.out_dir, "layer_weights.png"),
                       title=f"Layer weights ({config.task})")
    if history:
        plot_loss_history(history, os.path.join(config.out_dir, "training_loss.png"))


def write_report(config: RunConfig, report: dict) -> None:
    os.makedirs(config.out_dir, exist_ok=True)
    with open(os.path.join(config.out_dir, "report.json"), "w", encoding="utf-8") as fh:
        json.dump(report, fh, indent=2, sort_keys=True)
        fh.write("\n")
    text = format_report({
        "task": report["task"],
        "seed": report["seed"],
        "evaluation": report["evaluation"],
        "layer_weights": report["layer_weights"],
    })
    with open(os.path.join(config.out_dir, "report.txt"), "w", encoding="utf-8") as fh:
        fh.write(text + "\n")


def run_experiment(config: RunConfig) -> dict:
    """Train on the manifest's train split, evaluate on test, write all artifacts."""
    entries = read_manifest(config.manifest_path)
    by_split = split_entries(entries)

    model, history, vocabulary, class_weights = train_from_manifest(config)
    evaluation, clips = evaluate_test_split(config, model, vocabulary)

    report = {
        "task": config.task,
        "seed": config.seed,
        "splits": {split: [e.clip_id for e in by_split[split]] for split in by_split},
        "label_vocabulary": vocabulary,
        "class_weights": None if class_weights is None else [float(w) for w in class_weights],
        "train_loss_history": history,
        "evaluation": evaluation,
        "layer_weights": {label: weight for label, weight in layer_weight_report(model)},
        "clips": clips,
    }

    write_training_artifacts(config, model, history)
    write_report(config, report)
    return report
