"""Regulatory pattern tagging and the range-based alignment score.

Each flagged transaction is tagged with the AUSTRAC-style patterns it
matches; ground-truth labels drive the three typology tags, and three
documented statistical rules drive the rest.  Alignment awards 1 point
per pattern inside its expected range, 0.5 outside but present, 0 when
absent.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources

import numpy as np

from ..config import EvaluationConfig
from ..dataio import Dataset

PATTERNS = (
    "placement_structuring",
    "layering",
    "integration",
    "high_risk_category_usage",
    "unusual_transaction_volumes",
    "unusual_account_activity",
)

_LABEL_TAGS = {"structuring": "placement_structuring", "layering": "layering", "integration": "integration"}


def load_expected_ranges() -> dict[str, tuple[float, float]]:
    """Expected percentage ranges shipped as a package data file."""
    text = resources.files("amlkit").joinpath("data/austrac_ranges.json").read_text()
    raw = json.loads(text)["ranges"]
    return {name: (float(lo), float(hi)) for name, (lo, hi) in raw.items()}


def classify_pattern_matches(
    dataset: Dataset, flags: np.ndarray, config: EvaluationConfig | None = None
) -> list[set[str]]:
    """Per-transaction pattern tags; unflagged rows get empty sets.

    Statistical rules: `unusual_transaction_volumes` fires when the
    amount exceeds `volume_multiple` times the sender's prior mean;
    `high_risk_category_usage` on the configured category list;
    `unusual_account_activity` when the sender made at least
    `activity_velocity_threshold` transactions in the past 24h or the
    transaction lands in the configured odd hours.
    """
    config = config or EvaluationConfig()
    flags = np.asarray(flags, dtype=bool)
    n = len(dataset)
    if len(flags) != n:
        raise ValueError("flags length must match dataset")
    high_risk = set(config.high_risk_categories)
    odd_hours = set(config.odd_hours)

    sums: dict[str, float] = {}
    counts: dict[str, int] = {}
    recent: dict[str, list[int]] = {}
    tags: list[set[str]] = []
    window = 24 * 60
    for i in range(n):
        sender = dataset.senders[i]
        minute = int(dataset.unix_minutes[i])
        amount = float(dataset.amount_cents[i])
        row: set[str] = set()
        if flags[i]:
            label = dataset.labels[i]
            if label in _LABEL_TAGS:
                row.add(_LABEL_TAGS[label])
            prior_mean = sums.get(sender, 0.0) / counts[sender] if counts.get(sender) else 0.0
            if prior_mean > 0 and amount > config.volume_multiple * prior_mean:
                row.add("unusual_transaction_volumes")
            if dataset.categories[i] in high_risk:
                row.add("high_risk_category_usage")
            bucket = recent.get(sender, [])
            velocity = sum(1 for m in bucket if m > minute - window)
            hour = (minute // 60) % 24
            if velocity >= config.activity_velocity_threshold or hour in odd_hours:
                row.add("unusual_account_activity")
        tags.append(row)
        sums[sender] = sums.get(sender, 0.0) + amount
        counts[sender] = counts.get(sender, 0) + 1
        bucket = recent.setdefault(sender, [])
        bucket.append(minute)
        if len(bucket) > 64:
            del bucket[: len(bucket) - 64]
    return tags


def pattern_percentages(tags: list[set[str]], flags: np.ndarray) -> dict[str, float]:
    """Share of flagged transactions carrying each tag, in percent.

    A transaction may count toward several patterns, so the percentages
    need not sum to 100.
    """
    flagged = int(np.asarray(flags, dtype=bool).sum())
    if flagged == 0:
        return {p: 0.0 for p in PATTERNS}
    out = {}
    for p in PATTERNS:
        out[p] = 100.0 * sum(1 for t in tags if p in t) / flagged
    return out


@dataclass
class RegulatoryReport:
    rows: list[dict]
    score: float
    coverage: float
    flagged: int
    notes: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "patterns": self.rows,
            "alignment_score": self.score,
            "coverage": self.coverage,
            "flagged_transactions": self.flagged,
            "notes": self.notes,
        }


def regulatory_alignment(
    percentages: dict[str, float], expected: dict[str, tuple[float, float]] | None = None
) -> RegulatoryReport:
    """Score observed pattern percentages against expected ranges."""
    expected = expected or load_expected_ranges()
    rows = []
    points = 0.0
    for name in PATTERNS:
        observed = float(percentages.get(name, 0.0))
        lo, hi = expected[name]
        if observed == 0.0:
            cls, pts = "absent", 0.0
        elif lo <= observed <= hi:
            cls, pts = "well_aligned", 1.0
        elif observed > hi:
            cls, pts = "over", 0.5
        else:
            cls, pts = "under", 0.5
        points += pts
        rows.append(
            {"pattern": name, "observed_pct": observed, "expected_range": [lo, hi], "class": cls, "points": pts}
        )
    return RegulatoryReport(rows=rows, score=points / len(PATTERNS), coverage=0.0, flagged=0)


def evaluate_regulatory(
    dataset: Dataset, flags: np.ndarray, config: EvaluationConfig | None = None
) -> RegulatoryReport:
    """Tag flagged transactions, score alignment, report coverage."""
    config = config or EvaluationConfig()
    tags = classify_pattern_matches(dataset, flags, config)
    report = regulatory_alignment(pattern_percentages(tags, flags))
    flags = np.asarray(flags, dtype=bool)
    flagged_suspicious = [i for i in np.flatnonzero(flags) if dataset.labels[i] != "normal"]
    covered = sum(1 for i in flagged_suspicious if tags[i])
    report.coverage = covered / len(flagged_suspicious) if flagged_suspicious else 1.0
    report.flagged = int(flags.sum())
    return report
