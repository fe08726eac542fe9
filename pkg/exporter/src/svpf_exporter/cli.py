"""CLI: ``svpf-exporter export --audio a.wav --model wavlm --out a.svpf``
and ``svpf-exporter verify a.svpf``."""

from __future__ import annotations

import argparse
import sys

from .export import ExportError, ExportRequest, MODEL_REGISTRY, export_features
from .format import FormatViolation, verify_svpf


def cmd_export(args):
    request = ExportRequest(audio_path=args.audio, model=args.model, out_path=args.out)
    export_features(request)
    report = verify_svpf(args.out)
    print(f"{args.out}: {report.summary()}")


def cmd_verify(args):
    report = verify_svpf(args.path)
    print(f"{args.path}: {report.summary()}")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="svpf-exporter",
        description="Export SSL frontend hidden states to .svpf feature files",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("export", help="run a frontend over audio and write features")
    p.add_argument("--audio", required=True, help="input WAV file (any rate; resampled to 16 kHz)")
    p.add_argument("--model", required=True,
                   help=f"frontend id ({', '.join(sorted(MODEL_REGISTRY))}) or a saved-model directory")
    p.add_argument("--out", required=True, help="output .svpf path")
    p.set_defaults(func=cmd_export)

    p = sub.add_parser("verify", help="check a .svpf file and print its shape")
    p.add_argument("path", help=".svpf file to verify")
    p.set_defaults(func=cmd_verify)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        args.func(args)
    except (ExportError, FormatViolation, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
