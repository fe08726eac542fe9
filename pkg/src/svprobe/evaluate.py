"""Transcription and classification evaluation.

Note matching follows the standard correct-onset family of criteria: a
reference/estimate pair is admissible under

* COn      -- onsets within the onset tolerance;
* COnP     -- additionally pitches within the cent tolerance;
* COnPOff  -- additionally offsets within max(offset_s, offset_ratio * ref duration).

Scoring uses a maximum-cardinality bipartite matching over admissible pairs
(augmenting-path search), so results agree with the reference evaluation
tooling rather than a greedy pass.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .model import ProbeModel

CRITERIA = ("COn", "COnP", "COnPOff")


@dataclass
class MatchTolerances:
    onset_s: float = 0.05
    pitch_cents: float = 50.0
    offset_s: float = 0.05
    offset_ratio: float = 0.2

    def __post_init__(self):
        for name in ("onset_s", "pitch_cents", "offset_s", "offset_ratio"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")


@dataclass
class CriterionScores:
    precision: float
    recall: float
    f1: float
    matched_count: int


@dataclass
class TranscriptionScores:
    by_criterion: dict[str, CriterionScores] = field(default_factory=dict)

    def __getitem__(self, criterion: str) -> CriterionScores:
        return self.by_criterion[criterion]


@dataclass
class ClassificationScores:
    macro_f1: float
    accuracy: float
    balanced_accuracy: float
    topk_accuracy: dict[int, float]


def _admissible(ref, est, tol: MatchTolerances, criterion: str) -> bool:
    if abs(ref.onset_s - est.onset_s) > tol.onset_s:
        return False
    if criterion == "COn":
        return True
    if abs(ref.pitch - est.pitch) > tol.pitch_cents / 100.0:
        return False
    if criterion == "COnP":
        return True
    if criterion == "COnPOff":
        offset_tol = max(tol.offset_s, tol.offset_ratio * ref.duration_s)
        return abs(ref.offset_s - est.offset_s) <= offset_tol
    raise ValueError(f"unknown criterion {criterion!r}")


def match_notes(ref, est, tol: MatchTolerances, criterion: str) -> set[tuple[int, int]]:
    """Maximum-cardinality matching over admissible (ref, est) pairs.

    Kuhn's augmenting-path algorithm; each note is matched at most once.
    """
    if criterion not in CRITERIA:
        raise ValueError(f"unknown criterion {criterion!r}, expected one of {CRITERIA}")
    ref = list(ref)
    est = list(est)
    adjacency = [
        [e for e, est_note in enumerate(est) if _admissible(ref_note, est_note, tol, criterion)]
        for ref_note in ref
    ]

    est_to_ref: list[int | None] = [None] * len(est)

    def augment(r: int, visited: list[bool]) -> bool:
        for e in adjacency[r]:
            if visited[e]:
                continue
            visited[e] = True
            if est_to_ref[e] is None or augment(est_to_ref[e], visited):
                est_to_ref[e] = r
                return True
        return False

    for r in range(len(ref)):
        augment(r, [False] * len(est))

    return {(r, e) for e, r in enumerate(est_to_ref) if r is not None}


def transcription_scores(ref, est, tol: MatchTolerances | None = None) -> TranscriptionScores:
    """Precision/recall/F1 for each criterion on one clip."""
    if tol is None:
        tol = MatchTolerances()
    ref = list(ref)
    est = list(est)
    scores = TranscriptionScores()
    for criterion in CRITERIA:
        matches = match_notes(ref, est, tol, criterion)
        m = len(matches)
        precision = m / len(est) if est else 0.0
        recall = m / len(ref) if ref else 0.0
        f1 = 2 * precision * recall / (precision + recall) if precision + recall > 0 else 0.0
        scores.by_criterion[criterion] = CriterionScores(
            precision=precision, recall=recall, f1=f1, matched_count=m)
    return scores


def _topk_hits(logits: np.ndarray, labels: np.ndarray, k: int) -> np.ndarray:
    # stable argsort on -logits: ties resolve toward the lower class index
    order = np.argsort(-logits, axis=1, kind="stable")
    return (order[:, :k] == labels[:, None]).any(axis=1)


def classification_scores(
    predicted_logits: np.ndarray,
    labels,
    ks=(1, 2, 3),
) -> ClassificationScores:
    """Accuracy, balanced accuracy, macro F1, and top-k accuracy.

    Balanced accuracy and macro F1 average only over classes that occur in
    ``labels``.
    """
    logits = np.asarray(predicted_logits, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.int64).reshape(-1)
    if logits.ndim != 2:
        raise ValueError(f"expected (clips, classes) logits, got shape {logits.shape}")
    n, k_classes = logits.shape
    if n < 1:
        raise ValueError("need at least one prediction")
    if labels.size != n:
        raise ValueError(f"{labels.size} labels for {n} predictions")
    if labels.min() < 0 or labels.max() >= k_classes:
        raise ValueError("labels out of range")
    for k in ks:
        if not 1 <= k <= k_classes:
            raise ValueError(f"top-k with k={k} is undefined for {k_classes} classes")

    predictions = np.argmax(logits, axis=1)
    accuracy = float(np.mean(predictions == labels))

    recalls = []
    f1s = []
    for c in np.unique(labels):
        actual = labels == c
        predicted = predictions == c
        tp = int(np.sum(actual & predicted))
        recall = tp / int(np.sum(actual))
        precision = tp / int(np.sum(predicted)) if np.any(predicted) else 0.0
        f1 = 2 * precision * recall / (precision + recall) if precision + recall > 0 else 0.0
        recalls.append(recall)
        f1s.append(f1)

    topk = {int(k): float(np.mean(_topk_hits(logits, labels, int(k)))) for k in ks}

    return ClassificationScores(
        macro_f1=float(np.mean(f1s)),
        accuracy=accuracy,
        balanced_accuracy=float(np.mean(recalls)),
        topk_accuracy=topk,
    )


def layer_weight_report(model: ProbeModel) -> list[tuple[str, float]]:
    """("L0", w0) ... ("Ln", wn): softmax-normalized layer weights in layer order."""
    weights = model.layer_weights.normalized()
    return [(f"L{i}", float(w)) for i, w in enumerate(weights)]


def layer_weights_csv(model: ProbeModel) -> str:
    lines = ["layer,weight"]
    lines += [f"{label},{weight:.9f}" for label, weight in layer_weight_report(model)]
    return "\n".join(lines) + "\n"


def transcription_scores_to_dict(scores: TranscriptionScores) -> dict:
    return {
        criterion: {
            "precision": cs.precision,
            "recall": cs.recall,
            "f1": cs.f1,
            "matched_count": cs.matched_count,
        }
        for criterion, cs in scores.by_criterion.items()
    }


def classification_scores_to_dict(scores: ClassificationScores) -> dict:
    return {
        "macro_f1": scores.macro_f1,
        "accuracy": scores.accuracy,
        "balanced_accuracy": scores.balanced_accuracy,
        "topk_accuracy": {str(k): v for k, v in sorted(scores.topk_accuracy.items())},
    }


def format_report(values: dict, prefix: str = "") -> str:
    """Flatten nested score dicts into deterministic 'key = value' lines."""
    lines = []
    for key in sorted(values):
        value = values[key]
        name = f"{prefix}{key}"
        if isinstance(value, dict):
            lines.append(format_report(value, prefix=f"{name}."))
        elif isinstance(value, float):
            lines.append(f"{name} = {value:.6f}")
        else:
            lines.append(f"{name} = {value}")
    return "\n".join(lines)
