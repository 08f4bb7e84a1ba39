"""Alerting pipeline: train the ensemble, stream-score, tier alerts.

The scoring path is separated from feature extraction so its latency can
be measured on its own; extraction timing is reported alongside.  Alert
files exclude wall-clock latency so repeated runs are byte-identical;
latencies are returned in memory and written to a separate timing file.
"""

from __future__ import annotations

import json
import logging
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .. import rng as rngmod
from ..config import ABLATION_COMPONENTS, DetectionConfig
from ..dataio import Dataset, stratified_split
from ..errors import ConfigError
from .features import FEATURE_NAMES, NETWORK_FEATURES, RISK_FEATURES, TEMPORAL_FEATURES, extract_stream_features
from .forest import IsolationForest, RandomForest, forest_from_arrays, forest_to_arrays
from .resample import resample

logger = logging.getLogger(__name__)

MODEL_FORMAT = "amlkit-ensemble/1"

_ZEROED = {
    "network_features": NETWORK_FEATURES,
    "temporal_features": TEMPORAL_FEATURES,
    "risk_scoring": RISK_FEATURES,
    "behavior_complexity": tuple(n for n in FEATURE_NAMES if n != "amount"),
}


def apply_ablation(X: np.ndarray, ablation: str | None) -> np.ndarray:
    """Zero the feature columns removed by the named ablation.

    `multibank` is handled at extraction time (single-institution graph
    views) and leaves the matrix untouched here.
    """
    if ablation is None or ablation == "multibank":
        return X
    if ablation not in ABLATION_COMPONENTS:
        raise ConfigError(f"unknown ablation component: {ablation}")
    X = X.copy()
    for name in _ZEROED[ablation]:
        X[:, FEATURE_NAMES.index(name)] = 0.0
    return X


@dataclass
class Alert:
    txn_id: str
    risk_score: float
    severity: str
    top_features: tuple[str, ...]
    latency_ns: int


@dataclass
class EnsembleModel:
    iforest: IsolationForest
    rforest: RandomForest
    feature_names: tuple[str, ...]
    rf_weight: float
    if_weight: float
    threshold: float
    tiers: tuple[float, float, float]
    ablation: str | None = None
    feature_means: np.ndarray | None = None
    feature_stds: np.ndarray | None = None

    @property
    def trained(self) -> bool:
        return self.iforest.trained and self.rforest.trained

    def score_matrix(self, X: np.ndarray) -> np.ndarray:
        """Combined risk: convex blend of supervised and isolation scores."""
        if not self.trained:
            raise RuntimeError("model is not trained")
        return self.rf_weight * self.rforest.predict_risk(X) + self.if_weight * self.iforest.score(X)

    def save(self, path: str | Path) -> None:
        meta = {
            "format": MODEL_FORMAT,
            "feature_names": list(self.feature_names),
            "rf_weight": self.rf_weight,
            "if_weight": self.if_weight,
            "threshold": self.threshold,
            "tiers": list(self.tiers),
            "ablation": self.ablation,
        }
        arrays = forest_to_arrays(self.iforest, "if")
        arrays.update(forest_to_arrays(self.rforest, "rf"))
        np.savez_compressed(
            path,
            meta=np.frombuffer(json.dumps(meta, sort_keys=True).encode(), dtype=np.uint8),
            feature_means=self.feature_means if self.feature_means is not None else np.zeros(0),
            feature_stds=self.feature_stds if self.feature_stds is not None else np.zeros(0),
            **arrays,
        )

    @classmethod
    def load(cls, path: str | Path) -> "EnsembleModel":
        data = np.load(path)
        meta = json.loads(bytes(data["meta"]).decode())
        if meta.get("format") != MODEL_FORMAT:
            raise ConfigError(f"unsupported model format: {meta.get('format')!r}")
        model = cls(
            iforest=forest_from_arrays(data, "if", "isolation"),
            rforest=forest_from_arrays(data, "rf", "random"),
            feature_names=tuple(meta["feature_names"]),
            rf_weight=meta["rf_weight"],
            if_weight=meta["if_weight"],
            threshold=meta["threshold"],
            tiers=tuple(meta["tiers"]),
            ablation=meta["ablation"],
        )
        if len(data["feature_means"]):
            model.feature_means = np.asarray(data["feature_means"])
            model.feature_stds = np.asarray(data["feature_stds"])
        return model


def train_model(
    X: np.ndarray, y: np.ndarray, config: DetectionConfig, feature_names: tuple[str, ...] | None = None
) -> EnsembleModel:
    """Fit the ensemble on (already ablated) training features.

    The isolation forest fits the raw imbalanced set, reflecting the
    population; the random forest fits the rebalanced set.
    """
    tiers = tuple(config.tier_thresholds)
    if not (len(tiers) == 3 and tiers[0] < tiers[1] < tiers[2]):
        raise ConfigError(f"tier thresholds must be three ascending values, got {tiers}")
    if abs(config.rf_weight + config.if_weight - 1.0) > 1e-9:
        raise ConfigError("rf_weight and if_weight must sum to 1")
    names = feature_names or FEATURE_NAMES
    if len(names) < X.shape[1]:
        names = tuple(names) + tuple(f"extra_{k}" for k in range(X.shape[1] - len(names)))

    iforest = IsolationForest(config.isolation_forest.n_trees, config.isolation_forest.subsample)
    iforest.fit(X, rngmod.substream(config.seed, rngmod.DETECTION, 1))
    Xb, yb = resample(X, y, rngmod.substream(config.seed, rngmod.DETECTION, 2), config.resample)
    rforest = RandomForest(
        config.random_forest.n_trees, config.random_forest.max_depth, config.random_forest.min_leaf
    )
    rforest.fit(Xb, yb, rngmod.substream(config.seed, rngmod.DETECTION, 3))

    stds = X.std(axis=0)
    return EnsembleModel(
        iforest=iforest,
        rforest=rforest,
        feature_names=tuple(names),
        rf_weight=config.rf_weight,
        if_weight=config.if_weight,
        threshold=config.base_threshold,
        tiers=tiers,
        ablation=config.ablate,
        feature_means=X.mean(axis=0),
        feature_stds=np.where(stds > 0, stds, 1.0),
    )


def _severity(score: float, tiers: tuple[float, float, float]) -> str:
    if score > tiers[2]:
        return "high"
    if score > tiers[1]:
        return "medium"
    return "low"


def tier_alerts(
    txn_ids: list[str],
    risks: np.ndarray,
    config: DetectionConfig,
    latencies_ns: np.ndarray | None = None,
    top_features: list[tuple[str, ...]] | None = None,
) -> list[Alert]:
    """Alerts for every score above the base threshold, banded by tier."""
    tiers = tuple(config.tier_thresholds)
    if not (len(tiers) == 3 and tiers[0] < tiers[1] < tiers[2]):
        raise ConfigError(f"tier thresholds must be three ascending values, got {tiers}")
    alerts = []
    for i, (txn_id, risk) in enumerate(zip(txn_ids, risks)):
        if risk <= config.base_threshold:
            continue
        alerts.append(
            Alert(
                txn_id=txn_id,
                risk_score=float(risk),
                severity=_severity(float(risk), tiers),
                top_features=top_features[i] if top_features else (),
                latency_ns=int(latencies_ns[i]) if latencies_ns is not None else 0,
            )
        )
    return alerts


@dataclass
class DetectionResult:
    model: EnsembleModel
    risks: np.ndarray
    flags: np.ndarray
    alerts: list[Alert]
    latency_ns: np.ndarray
    latency_series: list[float]
    timing: dict
    train_indices: np.ndarray | None = None
    test_indices: np.ndarray | None = None
    metrics: dict = field(default_factory=dict)


def stream_detect(
    dataset: Dataset, model: EnsembleModel, config: DetectionConfig, X: np.ndarray | None = None
) -> DetectionResult:
    """Score the dataset in batches of `batch_size`, in timestamp order.

    Latency per transaction is the batch scoring wall time divided by
    batch size; the moving-average series aggregates over strides of
    `window` transactions.  With `refresh_every_batches` > 0 the random
    forest is refit periodically on a sliding labeled buffer.
    """
    n = len(dataset)
    extraction_start = time.perf_counter_ns()
    if X is None:
        X = extract_stream_features(dataset, config)
        X = apply_ablation(X, config.ablate)
    extraction_ns = time.perf_counter_ns() - extraction_start

    risks = np.zeros(n)
    latency = np.zeros(n, dtype=np.int64)
    y = dataset.binary_labels()
    refresh = config.refresh_every_batches
    batch_no = 0
    for start in range(0, n, config.batch_size):
        stop = min(start + config.batch_size, n)
        t0 = time.perf_counter_ns()
        risks[start:stop] = model.score_matrix(X[start:stop])
        elapsed = time.perf_counter_ns() - t0
        latency[start:stop] = elapsed // max(stop - start, 1)
        batch_no += 1
        if refresh and batch_no % refresh == 0 and stop < n:
            buf = slice(max(0, stop - config.refresh_buffer), stop)
            if y[buf].any() and not y[buf].all():
                Xb, yb = resample(X[buf], y[buf], rngmod.substream(config.seed, rngmod.DETECTION, 4, batch_no), config.resample)
                model.rforest = RandomForest(
                    config.random_forest.n_trees, config.random_forest.max_depth, config.random_forest.min_leaf
                ).fit(Xb, yb, rngmod.substream(config.seed, rngmod.DETECTION, 5, batch_no))

    series = [float(latency[k : k + config.window].mean()) for k in range(0, n, config.window)]
    flags = risks > config.base_threshold

    flagged = np.flatnonzero(flags)
    tops: dict[int, tuple[str, ...]] = {}
    if model.feature_means is not None and model.rforest.feature_importances_ is not None:
        z = np.abs((X[flagged] - model.feature_means) / model.feature_stds)
        weight = z * model.rforest.feature_importances_
        for row, i in enumerate(flagged):
            best = np.argsort(weight[row])[::-1][:3]
            tops[int(i)] = tuple(model.feature_names[int(b)] for b in best)
    alerts = [
        Alert(
            txn_id=dataset.txn_ids[int(i)],
            risk_score=float(risks[int(i)]),
            severity=_severity(float(risks[int(i)]), model.tiers),
            top_features=tops.get(int(i), ()),
            latency_ns=int(latency[int(i)]),
        )
        for i in flagged
    ]
    timing = {
        "extraction_ns_total": int(extraction_ns),
        "scoring_ns_mean": float(latency.mean()) if n else 0.0,
        "scoring_ms_mean": float(latency.mean()) / 1e6 if n else 0.0,
        "transactions": n,
        "window": config.window,
    }
    return DetectionResult(
        model=model,
        risks=risks,
        flags=flags,
        alerts=alerts,
        latency_ns=latency,
        latency_series=series,
        timing=timing,
    )


def run_detection(dataset: Dataset, config: DetectionConfig) -> DetectionResult:
    """Extract, split, train, and stream-score one dataset.

    Precision/recall/F1/AUC are computed on the held-out stratified test
    rows; alerts and latency cover the full stream.
    """
    from ..evaluation.metrics import detection_metrics

    t0 = time.perf_counter_ns()
    X = extract_stream_features(dataset, config)
    extraction_ns = time.perf_counter_ns() - t0
    X = apply_ablation(X, config.ablate)
    y = dataset.binary_labels()

    train_idx, test_idx = stratified_split(dataset, config.train_fraction, config.seed)
    names = FEATURE_NAMES + tuple(sorted(dataset.extra_features))
    model = train_model(X[train_idx], y[train_idx], config, feature_names=names)

    result = stream_detect(dataset, model, config, X=X)
    result.train_indices = train_idx
    result.test_indices = test_idx
    result.timing["extraction_ns_total"] = int(extraction_ns)
    result.timing["extraction_ns_per_txn"] = float(extraction_ns / max(len(dataset), 1))
    result.metrics = detection_metrics(y[test_idx], result.flags[test_idx], scores=result.risks[test_idx])
    result.metrics["ablation"] = config.ablate
    result.metrics["alert_count"] = len(result.alerts)
    result.metrics["train_rows"] = int(len(train_idx))
    result.metrics["test_rows"] = int(len(test_idx))
    return result


def write_alerts(alerts: list[Alert], path: str | Path) -> None:
    """Deterministic alert CSV (no wall-clock columns)."""
    import csv

    with Path(path).open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["txn_id", "risk_score", "severity", "top_features"])
        for a in alerts:
            writer.writerow([a.txn_id, f"{a.risk_score:.6f}", a.severity, "|".join(a.top_features)])


def write_timing(result: DetectionResult, path: str | Path) -> None:
    """Wall-clock latency series; volatile by nature, kept out of alerts."""
    import csv

    stride = int(result.timing.get("window", 100))
    with Path(path).open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["window_start_row", "mean_latency_ns"])
        for k, value in enumerate(result.latency_series):
            writer.writerow([k * stride, f"{value:.1f}"])
