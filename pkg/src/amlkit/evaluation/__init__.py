"""Fidelity, detection-quality, and regulatory-alignment scoring."""

from .dtw import dtw_distance, dtw_exact, dtw_similarity
from .fidelity import (
    FidelityReport,
    ReferencePatterns,
    behavioral_components,
    behavioral_fidelity,
    build_reference_patterns,
    composite_fidelity,
    evaluate_fidelity,
)
from .ged import ged_exact, graph_edit_distance, structural_similarity
from .metrics import detection_metrics
from .regulatory import RegulatoryReport, classify_pattern_matches, evaluate_regulatory, regulatory_alignment

__all__ = [
    "dtw_distance",
    "dtw_exact",
    "dtw_similarity",
    "FidelityReport",
    "ReferencePatterns",
    "behavioral_components",
    "behavioral_fidelity",
    "build_reference_patterns",
    "composite_fidelity",
    "evaluate_fidelity",
    "ged_exact",
    "graph_edit_distance",
    "structural_similarity",
    "detection_metrics",
    "RegulatoryReport",
    "classify_pattern_matches",
    "evaluate_regulatory",
    "regulatory_alignment",
]
