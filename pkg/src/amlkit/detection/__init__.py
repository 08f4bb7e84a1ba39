"""Streaming detection: features, resampling, forests, alert pipeline."""

from .features import FEATURE_NAMES, FeatureExtractor
from .forest import IsolationForest, RandomForest
from .pipeline import Alert, DetectionResult, EnsembleModel, run_detection, stream_detect, tier_alerts, train_model
from .resample import resample

__all__ = [
    "FEATURE_NAMES",
    "FeatureExtractor",
    "IsolationForest",
    "RandomForest",
    "Alert",
    "DetectionResult",
    "EnsembleModel",
    "run_detection",
    "stream_detect",
    "tier_alerts",
    "train_model",
    "resample",
]
