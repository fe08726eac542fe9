"""svprobe: linear probing of frozen SSL frontend features for singing-voice tasks.

Covers the downstream half of an SSL probing pipeline: softmax-weighted
aggregation over frontend layers, a linear head trained with weighted
cross-entropy losses and hand-derived gradients, frame-to-note decoding,
transcription and classification metrics, and layer-contribution reporting.
"""

from .audio import ChunkSpec, chunk_signal, rms, rms_gate, trim_silence
from .decoder import DecoderConfig, decode_notes
from .evaluate import (
    ClassificationScores,
    CriterionScores,
    MatchTolerances,
    TranscriptionScores,
    classification_scores,
    layer_weight_report,
    match_notes,
    transcription_scores,
)
from .experiment import RunConfig, load_run_config, run_experiment
from .features import (
    FeatureFileError,
    FeatureStack,
    read_feature_file,
    write_feature_file,
)
from .losses import clf_loss, inverse_frequency_weights, svt_loss
from .manifest import ManifestEntry, read_manifest, write_manifest
from .model import (
    LayerWeights,
    LinearHead,
    ProbeModel,
    TaskKind,
    aggregate,
    forward_clip,
    forward_frame,
    init_model,
    load_checkpoint,
    save_checkpoint,
    softmax,
)
from .notes import (
    FrameTargets,
    NoteEvent,
    midi_to_parts,
    parts_to_midi,
    rasterize_notes,
    read_note_file,
    write_note_file,
)
from .optim import AdamState, adam_step
from .training import TrainConfig, grad_check, train_stage1

__version__ = "0.1.0"

__all__ = [
    "AdamState",
    "ChunkSpec",
    "ClassificationScores",
    "CriterionScores",
    "DecoderConfig",
    "FeatureFileError",
    "FeatureStack",
    "FrameTargets",
    "LayerWeights",
    "LinearHead",
    "ManifestEntry",
    "MatchTolerances",
    "NoteEvent",
    "ProbeModel",
    "RunConfig",
    "TaskKind",
    "TrainConfig",
    "TranscriptionScores",
    "adam_step",
    "aggregate",
    "chunk_signal",
    "classification_scores",
    "clf_loss",
    "decode_notes",
    "forward_clip",
    "forward_frame",
    "grad_check",
    "init_model",
    "inverse_frequency_weights",
    "layer_weight_report",
    "load_checkpoint",
    "load_run_config",
    "match_notes",
    "midi_to_parts",
    "parts_to_midi",
    "rasterize_notes",
    "read_feature_file",
    "read_manifest",
    "read_note_file",
    "rms",
    "rms_gate",
    "run_experiment",
    "save_checkpoint",
    "softmax",
    "svt_loss",
    "train_stage1",
    "transcription_scores",
    "trim_silence",
    "write_feature_file",
    "write_manifest",
    "write_note_file",
]
