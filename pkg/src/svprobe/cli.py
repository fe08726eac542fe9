"""Command-line surface.

Subcommands: chunk, encode-targets, train, decode, eval, analyze-layers,
make-synthetic.  All errors exit nonzero with a one-line diagnostic.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from .audio import ChunkSpec, DEFAULT_RMS_THRESHOLD, chunk_signal, rms, trim_silence
from .decoder import DecoderConfig, decode_notes
from .evaluate import (
    MatchTolerances,
    format_report,
    layer_weight_report,
    layer_weights_csv,
    transcription_scores,
    transcription_scores_to_dict,
)
from .experiment import (
    TASKS,
    load_run_config,
    evaluate_test_split,
    train_from_manifest,
    write_report,
    write_training_artifacts,
)
from .features import read_feature_file
from .figures import plot_layer_weights
from .model import load_checkpoint, forward_frame
from .notes import rasterize_notes, read_note_file, write_note_file
from .synth import write_fixture_dataset

TASK_CHUNK_SECONDS = {"singer_id": 5.0, "svt": 5.0, "technique": 3.0}


def _read_wav(path):
    from scipy.io import wavfile

    rate, samples = wavfile.read(path)
    samples = np.asarray(samples)
    if samples.ndim == 2:  # downmix
        samples = samples.mean(axis=1)
    if np.issubdtype(samples.dtype, np.integer):
        samples = samples / float(np.iinfo(samples.dtype).max)
    return rate, samples.astype(np.float64)


def _write_wav(path, rate, samples):
    from scipy.io import wavfile

    wavfile.write(path, rate, samples.astype(np.float32))


def cmd_chunk(args):
    rate, samples = _read_wav(args.audio)
    if args.trim:
        samples = trim_silence(samples, threshold=args.rms_threshold, sample_rate=rate)
    chunk_s = args.chunk_s if args.chunk_s is not None else TASK_CHUNK_SECONDS[args.task]
    spec = ChunkSpec(chunk_s=chunk_s, sample_rate=rate)
    windows = chunk_signal(samples, spec)

    os.makedirs(args.out, exist_ok=True)
    decisions_path = os.path.join(args.out, "decisions.csv")
    kept = 0
    with open(decisions_path, "w", encoding="utf-8") as fh:
        fh.write("index,start_s,end_s,rms,kept\n")
        for i, window in enumerate(windows):
            energy = rms(window)
            keep = energy >= args.rms_threshold
            fh.write(f"{i},{i * chunk_s:.3f},{(i + 1) * chunk_s:.3f},{energy:.6f},{int(keep)}\n")
            if keep:
                _write_wav(os.path.join(args.out, f"chunk{i:04d}.wav"), rate, window)
                kept += 1
    print(f"{len(windows)} chunks, {kept} kept -> {args.out}")


def cmd_encode_targets(args):
    notes = read_note_file(args.notes)
    targets = rasterize_notes(notes, args.frames, args.frame_rate)
    with open(args.out, "w", encoding="utf-8") as fh:
        fh.write("frame,onset,silence,pitch_class,octave\n")
        for t in range(targets.frames):
            fh.write(f"{t},{targets.onset[t]},{targets.silence[t]},"
                     f"{targets.pitch_class[t]},{targets.octave[t]}\n")
    print(f"{targets.frames} frames -> {args.out}")


def cmd_train(args):
    config = load_run_config(args.config, seed=args.seed, out_dir=args.out, task=args.task)
    model, history, _, _ = train_from_manifest(config)
    write_training_artifacts(config, model, history)
    final = f", final loss {history[-1]:.6f}" if history else ""
    print(f"trained {config.task} probe for {len(history)} epochs{final} -> {config.out_dir}")


def cmd_decode(args):
    model = load_checkpoint(args.checkpoint)
    stack = read_feature_file(args.features)
    decoder = DecoderConfig(
        onset_threshold=args.onset_threshold,
        silence_threshold=args.silence_threshold,
        min_note_frames=args.min_note_frames,
    )
    notes = decode_notes(forward_frame(model, stack), decoder, frame_rate=stack.frame_rate)
    write_note_file(notes, args.out)
    print(f"{len(notes)} notes -> {args.out}")


def cmd_eval(args):
    if args.ref and args.est:
        ref = read_note_file(args.ref)
        est = read_note_file(args.est)
        scores = transcription_scores(ref, est, MatchTolerances())
        print(format_report(transcription_scores_to_dict(scores)))
        return
    if not (args.config and args.checkpoint):
        raise SystemExit("eval needs either --ref/--est note files or --config/--checkpoint")
    config = load_run_config(args.config, seed=args.seed, out_dir=args.out, task=args.task)
    model = load_checkpoint(args.checkpoint)
    evaluation, clips = evaluate_test_split(config, model)
    report = {
        "task": config.task,
        "seed": config.seed,
        "evaluation": evaluation,
        "layer_weights": {label: w for label, w in layer_weight_report(model)},
        "clips": clips,
    }
    write_report(config, report)
    print(format_report({"evaluation": evaluation}))
    print(f"report -> {config.out_dir}")


def cmd_analyze_layers(args):
    model = load_checkpoint(args.checkpoint)
    report = layer_weight_report(model)
    csv_text = layer_weights_csv(model)
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        csv_path = os.path.join(args.out, "layer_weights.csv")
        with open(csv_path, "w", encoding="utf-8") as fh:
            fh.write(csv_text)
        plot_layer_weights(report, os.path.join(args.out, "layer_weights.png"))
        print(f"layer weights -> {csv_path}")
    else:
        sys.stdout.write(csv_text)


def cmd_make_synthetic(args):
    manifest = write_fixture_dataset(
        args.out, args.task, n_stacks=args.clips, seed=args.seed)
    print(f"manifest -> {manifest}")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="svprobe",
        description="Probe frozen frontend features for singing-voice tasks",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("chunk", help="split audio into gated fixed-length windows")
    p.add_argument("--audio", required=True, help="input WAV file")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--task", choices=TASKS, default="singer_id",
                   help="task whose chunk length to use")
    p.add_argument("--chunk-s", type=float, default=None, help="chunk length override (seconds)")
    p.add_argument("--rms-threshold", type=float, default=DEFAULT_RMS_THRESHOLD)
    p.add_argument("--trim", action="store_true", help="trim edge silence before chunking")
    p.set_defaults(func=cmd_chunk)

    p = sub.add_parser("encode-targets", help="rasterize a note file onto the frame grid")
    p.add_argument("--notes", required=True, help="note file (onset_s offset_s pitch per line)")
    p.add_argument("--frames", type=int, required=True)
    p.add_argument("--frame-rate", type=float, default=50.0)
    p.add_argument("--out", required=True, help="output CSV")
    p.set_defaults(func=cmd_encode_targets)

    p = sub.add_parser("train", help="stage-1 training from a run config")
    p.add_argument("--config", required=True, help="JSON run config")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out", default=None, help="output directory override")
    p.add_argument("--task", choices=TASKS, default=None)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("decode", help="decode note events from features with a checkpoint")
    p.add_argument("--checkpoint", required=True, help=".svpm model file")
    p.add_argument("--features", required=True, help=".svpf feature file")
    p.add_argument("--out", required=True, help="output note file")
    p.add_argument("--onset-threshold", type=float, default=0.4)
    p.add_argument("--silence-threshold", type=float, default=0.5)
    p.add_argument("--min-note-frames", type=int, default=1)
    p.set_defaults(func=cmd_decode)

    p = sub.add_parser("eval", help="score note files, or a checkpoint against a manifest")
    p.add_argument("--ref", help="reference note file")
    p.add_argument("--est", help="estimated note file")
    p.add_argument("--config", help="JSON run config (checkpoint mode)")
    p.add_argument("--checkpoint", help=".svpm model file (checkpoint mode)")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out", default=None, help="output directory override")
    p.add_argument("--task", choices=TASKS, default=None)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("analyze-layers", help="emit the layer weight table for a checkpoint")
    p.add_argument("--checkpoint", required=True, help=".svpm model file")
    p.add_argument("--out", default=None, help="directory for CSV + figure (default: stdout)")
    p.set_defaults(func=cmd_analyze_layers)

    p = sub.add_parser("make-synthetic", help="write a synthetic fixture dataset")
    p.add_argument("--task", choices=TASKS, default="singer_id")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--clips", type=int, default=60)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_make_synthetic)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        args.func(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
