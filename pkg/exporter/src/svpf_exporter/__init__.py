"""svpf-exporter: dump layer-stacked SSL frontend hidden states to .svpf files."""

from .export import ExportError, ExportRequest, MODEL_REGISTRY, export_features, load_audio
from .format import FormatViolation, VerifyReport, verify_svpf, write_svpf

__version__ = "0.1.0"

__all__ = [
    "ExportError",
    "ExportRequest",
    "FormatViolation",
    "MODEL_REGISTRY",
    "VerifyReport",
    "export_features",
    "load_audio",
    "verify_svpf",
    "write_svpf",
]
