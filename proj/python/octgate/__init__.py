"""Mahalanobis out-of-distribution gate for OCT M-scans."""

from ._octgate import (
    BuiltinPyramidExtractor,
    Detector,
    auroc,
    average_precision,
    corrupt,
    corruption_kinds,
    estimate_ilm,
    mahalanobis,
    onnx_run,
    reference_heatmap,
    snr_score,
    synth_dataset,
)

__all__ = [
    "BuiltinPyramidExtractor",
    "Detector",
    "auroc",
    "average_precision",
    "corrupt",
    "corruption_kinds",
    "estimate_ilm",
    "mahalanobis",
    "onnx_run",
    "reference_heatmap",
    "snr_score",
    "synth_dataset",
]
