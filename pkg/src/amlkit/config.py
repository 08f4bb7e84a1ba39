"""Configuration model for generation, detection, and evaluation.

All tunable behaviour lives here as plain dataclasses with JSON-friendly
defaults.  A config file supplies partial overrides; unknown keys are
rejected so typos fail loudly instead of silently running defaults.
"""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from .errors import ConfigError

RISK_CLASSES = ("normal", "high_risk", "fraud_prone")

# Spending categories drawn from one Dirichlet profile per customer.
BASE_CATEGORIES = (
    "Other",
    "Housing",
    "Food",
    "Transport",
    "Utilities",
    "Healthcare",
    "Entertainment",
    "Education",
    "Shell Company",
)
BASE_ALPHAS = (22.1, 20.0, 16.9, 15.0, 13.0, 5.9, 4.0, 3.0, 0.1)

# Reachable only through high-risk profiles or injected patterns.
SPECIAL_CATEGORIES = ("Cryptocurrency", "Property Investment")
ALL_CATEGORIES = BASE_CATEGORIES + SPECIAL_CATEGORIES

PAYMENT_TYPES = (
    "DEBIT",
    "TRANSFER",
    "BPAY",
    "OSKO",
    "NPP",
    "CARD",
    "CASH_DEPOSIT",
    "INTL_WIRE",
)

LABELS = ("normal", "structuring", "layering", "integration", "suspicious")
SOPHISTICATION_LEVELS = ("none", "low", "medium", "high")

MERCHANT_SECTORS = (
    "generic_retail",
    "real_estate",
    "crypto_exchange",
    "luxury_goods",
    "import_export",
    "local_exchange",
    "shell_company",
)


def _amount_param(mean: float, sigma: float, cap: float) -> dict[str, float]:
    return {"mean": mean, "sigma": sigma, "min": 2.0, "max": cap}


def _default_amount_params() -> dict[str, dict[str, float]]:
    # Lognormal per category, parameterised by target mean (dollars).
    # Caps keep everyday categories out of the laundering amount band.
    return {
        "Other": _amount_param(215.03, 0.8, 5000.0),
        "Housing": _amount_param(2323.91, 0.6, 15000.0),
        "Food": _amount_param(173.89, 0.7, 2000.0),
        "Transport": _amount_param(92.98, 0.7, 1500.0),
        "Utilities": _amount_param(180.0, 0.5, 1200.0),
        "Healthcare": _amount_param(250.0, 0.9, 5000.0),
        "Entertainment": _amount_param(120.0, 0.8, 1500.0),
        "Education": _amount_param(400.0, 0.9, 8000.0),
        "Shell Company": _amount_param(6860.71, 0.7, 12000.0),
        "Cryptocurrency": _amount_param(30191.24, 1.1, 60000.0),
        "Property Investment": _amount_param(77708.24, 0.6, 250000.0),
    }


def _default_peer_probability() -> dict[str, float]:
    # Probability a transaction in the category goes to a known peer
    # account instead of a merchant.
    return {
        "Other": 0.35,
        "Housing": 0.10,
        "Food": 0.02,
        "Transport": 0.02,
        "Utilities": 0.0,
        "Healthcare": 0.02,
        "Entertainment": 0.05,
        "Education": 0.05,
        "Shell Company": 0.0,
        "Cryptocurrency": 0.0,
        "Property Investment": 0.0,
    }


def _default_category_sectors() -> dict[str, list[str]]:
    return {
        "Other": ["generic_retail", "local_exchange"],
        "Housing": ["real_estate", "generic_retail"],
        "Food": ["generic_retail"],
        "Transport": ["generic_retail"],
        "Utilities": ["generic_retail"],
        "Healthcare": ["generic_retail"],
        "Entertainment": ["generic_retail", "luxury_goods"],
        "Education": ["generic_retail"],
        "Shell Company": ["shell_company"],
        "Cryptocurrency": ["crypto_exchange"],
        "Property Investment": ["real_estate"],
    }


def _default_payment_type_weights() -> dict[str, dict[str, float]]:
    # Per-category payment mix; peer transfers are re-weighted toward
    # instant rails at small amounts inside the simulator.
    return {
        "Other": {"DEBIT": 0.30, "CARD": 0.25, "TRANSFER": 0.20, "OSKO": 0.10, "NPP": 0.10, "BPAY": 0.05},
        "Housing": {"BPAY": 0.45, "TRANSFER": 0.35, "DEBIT": 0.15, "NPP": 0.05},
        "Food": {"CARD": 0.55, "DEBIT": 0.40, "NPP": 0.05},
        "Transport": {"CARD": 0.60, "DEBIT": 0.35, "NPP": 0.05},
        "Utilities": {"BPAY": 0.65, "DEBIT": 0.25, "TRANSFER": 0.10},
        "Healthcare": {"CARD": 0.50, "DEBIT": 0.35, "BPAY": 0.15},
        "Entertainment": {"CARD": 0.60, "DEBIT": 0.30, "OSKO": 0.10},
        "Education": {"BPAY": 0.50, "TRANSFER": 0.35, "DEBIT": 0.15},
        "Shell Company": {"TRANSFER": 0.60, "INTL_WIRE": 0.25, "BPAY": 0.15},
        "Cryptocurrency": {"TRANSFER": 0.55, "OSKO": 0.25, "INTL_WIRE": 0.20},
        "Property Investment": {"TRANSFER": 0.70, "BPAY": 0.20, "INTL_WIRE": 0.10},
    }


def _default_income_bands() -> list[dict[str, Any]]:
    # Share of the population, baseline transactions per day, opening
    # balance range and monthly top-up (all money in dollars).
    return [
        {"name": "low", "share": 0.25, "daily_rate": 0.45, "balance": [1500, 6000], "monthly_income": 2800},
        {"name": "lower_mid", "share": 0.25, "daily_rate": 0.52, "balance": [3000, 12000], "monthly_income": 4100},
        {"name": "mid", "share": 0.25, "daily_rate": 0.60, "balance": [5000, 25000], "monthly_income": 5600},
        {"name": "upper_mid", "share": 0.15, "daily_rate": 0.72, "balance": [10000, 60000], "monthly_income": 8200},
        {"name": "high", "share": 0.10, "daily_rate": 0.90, "balance": [20000, 150000], "monthly_income": 14000},
    ]


def _default_hour_volume_weights() -> list[float]:
    # Relative transaction counts by hour of day; business hours dominate.
    return [
        0.6, 0.4, 0.3, 0.25, 0.3, 0.5,   # 00-05
        1.0, 1.8, 2.8, 3.8, 4.2, 4.4,    # 06-11
        4.5, 4.3, 4.1, 3.9, 3.6, 3.2,    # 12-17
        2.6, 2.1, 1.7, 1.4, 1.1, 0.8,    # 18-23
    ]


def _default_hour_amount_multipliers() -> list[float]:
    # Average transaction size by hour; mid-business-day purchases run
    # roughly five thirds of the overnight trough.
    return [
        0.74, 0.73, 0.72, 0.72, 0.73, 0.76,  # 00-05
        0.82, 0.90, 1.00, 1.10, 1.17, 1.20,  # 06-11
        1.21, 1.20, 1.17, 1.13, 1.08, 1.02,  # 12-17
        0.95, 0.89, 0.84, 0.80, 0.77, 0.75,  # 18-23
    ]


def _default_weekday_volume() -> list[float]:
    # Monday..Sunday
    return [1.05, 1.06, 1.06, 1.05, 1.08, 0.88, 0.82]


def _default_weekday_amount() -> list[float]:
    return [1.015, 1.02, 1.02, 1.015, 1.01, 0.965, 0.955]


def _default_dom_amount() -> list[float]:
    # Salary-cycle bimodality: start and end of month run hot.
    out = []
    for day in range(1, 32):
        if day <= 5 or day >= 25:
            out.append(1.22)
        elif 10 <= day <= 20:
            out.append(0.90)
        else:
            out.append(0.98)
    return out


def _default_dom_volume() -> list[float]:
    return [1.0] * 31


@dataclass
class TemporalConfig:
    hour_volume_weights: list[float] = field(default_factory=_default_hour_volume_weights)
    hour_amount_multipliers: list[float] = field(default_factory=_default_hour_amount_multipliers)
    weekday_volume: list[float] = field(default_factory=_default_weekday_volume)
    weekday_amount: list[float] = field(default_factory=_default_weekday_amount)
    day_of_month_volume: list[float] = field(default_factory=_default_dom_volume)
    day_of_month_amount: list[float] = field(default_factory=_default_dom_amount)


@dataclass
class NetworkConfig:
    degree_exponent: float = 2.5
    min_degree: int = 2
    max_degree: int = 50
    base_weight: float = 1.0
    region_affinity: float = 3.0
    same_bank_affinity: float = 4.2


@dataclass
class PatternConfig:
    # Integration episodes emit the most rows per episode (chunked
    # payouts on top of a layering chain), so equal episode weights
    # would let integration dominate row counts; weighting episodes
    # toward structuring keeps the per-row typology mix balanced.
    typology_weights: dict[str, float] = field(
        default_factory=lambda: {"structuring": 1.5, "layering": 1.0, "integration": 0.75}
    )
    sophistication_weights: dict[str, float] = field(
        default_factory=lambda: {"low": 1.0, "medium": 1.0, "high": 1.0}
    )
    # Total episode value ranges (dollars, lognormal between bounds).
    structuring_total: list[float] = field(default_factory=lambda: [25000.0, 90000.0])
    layering_total: list[float] = field(default_factory=lambda: [50000.0, 180000.0])
    integration_total: list[float] = field(default_factory=lambda: [35000.0, 250000.0])
    # Structuring thresholds (dollars).
    part_cap: float = 9500.0
    near_threshold_band: list[float] = field(default_factory=lambda: [8500.0, 9900.0])
    reporting_threshold: float = 10000.0
    integration_floor: float = 20000.0
    # Participant selection weight per risk class.
    risk_class_weights: dict[str, float] = field(
        default_factory=lambda: {"normal": 1.0, "high_risk": 6.0, "fraud_prone": 12.0}
    )
    # Phase windows in days.
    placement_window_days: float = 3.0
    low_layering_window_hours: float = 48.0
    layering_window_days: float = 14.0
    integration_min_delay_days: float = 14.0
    integration_max_delay_days: float = 35.0
    # Mules move each hop as a rapid run of near-equal transfers.
    burst_gap_minutes: list[int] = field(default_factory=lambda: [3, 9])
    # Share of episodes anchored to late-night hours.
    odd_hour_bias: float = 0.85
    odd_hours: list[int] = field(default_factory=lambda: [23, 0, 1, 2, 3, 4])


@dataclass
class CalibrationConfig:
    suspicious_fraction: float = 0.0016
    category_shares: dict[str, float] = field(
        default_factory=lambda: {"Other": 0.221, "Housing": 0.200, "Food": 0.169}
    )
    interbank_share: float = 0.488
    suspicious_tolerance: float = 0.0005
    category_tolerance: float = 0.02
    interbank_tolerance: float = 0.05
    max_iterations: int = 8
    adjustment_clamp: list[float] = field(default_factory=lambda: [0.5, 2.0])


@dataclass
class SimulationConfig:
    seed: int = 42
    n_customers: int = 1000
    days: int = 90
    start_date: str = "2024-01-01"
    banks: list[str] = field(default_factory=lambda: ["BNK01", "BNK02", "BNK03", "BNK04", "BNK05"])
    regions: list[str] = field(
        default_factory=lambda: ["Sydney", "Melbourne", "Brisbane", "Perth", "Adelaide", "Hobart"]
    )
    region_weights: list[float] = field(default_factory=lambda: [0.32, 0.28, 0.14, 0.11, 0.09, 0.06])
    risk_class_proportions: dict[str, float] = field(
        default_factory=lambda: {"normal": 0.995, "high_risk": 0.004, "fraud_prone": 0.001}
    )
    merchant_fraction: float = 0.01
    income_bands: list[dict[str, Any]] = field(default_factory=_default_income_bands)
    active_category_range: list[int] = field(default_factory=lambda: [4, 8])
    amount_params: dict[str, dict[str, float]] = field(default_factory=_default_amount_params)
    peer_probability: dict[str, float] = field(default_factory=_default_peer_probability)
    category_sectors: dict[str, list[str]] = field(default_factory=_default_category_sectors)
    payment_type_weights: dict[str, dict[str, float]] = field(default_factory=_default_payment_type_weights)
    # Chance per transaction that a high-risk-class customer diverts to a
    # special category (crypto or property) instead of its profile draw.
    special_category_rate: dict[str, float] = field(
        default_factory=lambda: {"normal": 0.0, "high_risk": 0.035, "fraud_prone": 0.05}
    )
    # Baseline share multipliers; the calibration loop adjusts these.
    category_weight_scale: dict[str, float] = field(default_factory=dict)
    suspicious_rate: float = 0.08
    balance_floor: float = 50.0
    temporal: TemporalConfig = field(default_factory=TemporalConfig)
    network: NetworkConfig = field(default_factory=NetworkConfig)
    patterns: PatternConfig = field(default_factory=PatternConfig)
    calibration: CalibrationConfig = field(default_factory=CalibrationConfig)


@dataclass
class ResampleConfig:
    # Keep broad majority coverage; a fully balanced set miscalibrates
    # the forest's vote fraction against the deployment prior, and a
    # tight undersample cap hides the legitimate heavy tail.
    undersample_ratio: float = 1000.0
    target_positive_fraction: float = 0.4
    k_neighbors: int = 5


@dataclass
class IsolationForestConfig:
    n_trees: int = 100
    subsample: int = 256


@dataclass
class RandomForestConfig:
    # Deep, small-leaf trees: laundering rows are rare and sit in narrow
    # feature pockets, so shallow trees blur them into the organic bulk.
    n_trees: int = 100
    max_depth: int = 18
    min_leaf: int = 2


@dataclass
class FeatureConfig:
    reporting_threshold: float = 10000.0
    structuring_band: float = 1500.0
    near_threshold_days: float = 7.0
    velocity_window_hours: float = 24.0
    # Gap regularity is judged over a short recent window so rapid
    # machine-paced runs stand out against sparse organic activity.
    periodicity_window_hours: float = 12.0
    periodicity_max_gaps: int = 24
    periodicity_max_lag: int = 8
    # Two gaps suffice: an unequal pair autocorrelates at -0.5, so only a
    # run of equally spaced transactions can score high this early.
    min_gaps_for_periodicity: int = 2
    betweenness_sample_sources: int = 64
    betweenness_exact_below: int = 400


@dataclass
class DetectionConfig:
    seed: int = 7
    batch_size: int = 1000
    window: int = 100
    base_threshold: float = 0.5
    tier_thresholds: list[float] = field(default_factory=lambda: [0.5, 0.7, 0.9])
    rf_weight: float = 0.7
    if_weight: float = 0.3
    train_fraction: float = 0.8
    refresh_every_batches: int = 0
    refresh_buffer: int = 20000
    ablate: str | None = None
    features: FeatureConfig = field(default_factory=FeatureConfig)
    resample: ResampleConfig = field(default_factory=ResampleConfig)
    isolation_forest: IsolationForestConfig = field(default_factory=IsolationForestConfig)
    random_forest: RandomForestConfig = field(default_factory=RandomForestConfig)


ABLATION_COMPONENTS = (
    "network_features",
    "temporal_features",
    "multibank",
    "risk_scoring",
    "behavior_complexity",
)


def _default_amount_anchors() -> list[list[float]]:
    # Hourly mean-amount reference curve (hour, dollars); overnight trough
    # of 450 against a mid-afternoon peak of 750.
    return [[0, 460.0], [4, 450.0], [9, 640.0], [13, 750.0], [17, 690.0], [21, 520.0], [23, 470.0]]


def _default_volume_anchors() -> list[list[float]]:
    return [[0, 0.5], [4, 0.25], [9, 3.8], [12, 4.5], [17, 3.2], [21, 1.4], [23, 0.8]]


def _default_reference_category_shares() -> dict[str, float]:
    shares = {name: alpha / 100.0 for name, alpha in zip(BASE_CATEGORIES, BASE_ALPHAS)}
    # Special categories are rare; fold their nominal mass out of "Other".
    shares["Cryptocurrency"] = 0.001
    shares["Property Investment"] = 0.001
    shares["Other"] -= 0.002
    return shares


def _default_reference_alert_shares() -> dict[str, float]:
    # Expected alert mix by payment rail: laundering moves over transfer
    # rails and wires, so retail rails (cards, debits) barely alert.
    return {
        "TRANSFER": 0.49,
        "OSKO": 0.16,
        "NPP": 0.13,
        "INTL_WIRE": 0.13,
        "CASH_DEPOSIT": 0.05,
        "BPAY": 0.03,
        "DEBIT": 0.01,
    }


def _default_reference_risk_histogram() -> list[float]:
    # Ten-bin reference over combined risk scores in [0, 1].  The benign
    # bulk lands in the second bin (the anomaly half of the ensemble
    # keeps ordinary rows slightly above zero) and laundering mass sits
    # in the top bin.
    return [0.0005, 0.9905, 0.0045, 0.0005, 0.0002, 0.0002, 0.0002, 0.0004, 0.001, 0.002]


@dataclass
class FidelityWeights:
    temporal: float = 0.4
    structural: float = 0.3
    behavioral: float = 0.3


@dataclass
class BehavioralWeights:
    category: float = 0.3
    risk: float = 0.25
    alerts: float = 0.2
    fraud_rate: float = 0.25


@dataclass
class EvaluationConfig:
    seed: int = 11
    dtw_radius: int = 3
    ged_exact_cap: int = 8
    ged_sample_cap: int = 1000
    ged_subgraphs: int = 10
    ged_subgraph_nodes: int = 200
    fidelity_weights: FidelityWeights = field(default_factory=FidelityWeights)
    behavioral_weights: BehavioralWeights = field(default_factory=BehavioralWeights)
    amount_anchors: list[list[float]] = field(default_factory=_default_amount_anchors)
    volume_anchors: list[list[float]] = field(default_factory=_default_volume_anchors)
    reference_category_shares: dict[str, float] = field(default_factory=_default_reference_category_shares)
    reference_alert_shares: dict[str, float] = field(default_factory=_default_reference_alert_shares)
    reference_risk_histogram: list[float] = field(default_factory=_default_reference_risk_histogram)
    baseline_fraud_rate: float = 0.0016
    chi2_alpha: float = 0.05
    # Statistical tagging rules for the regulatory report.  Thresholds
    # sit well above ordinary behavior so the statistical tags stay
    # rare enough to mean "unusual".
    volume_multiple: float = 5.0
    activity_velocity_threshold: int = 8
    odd_hours: list[int] = field(default_factory=lambda: [0, 1, 2, 3, 4])
    high_risk_categories: list[str] = field(
        default_factory=lambda: ["Shell Company", "Cryptocurrency", "Property Investment"]
    )


@dataclass
class AppConfig:
    simulation: SimulationConfig = field(default_factory=SimulationConfig)
    detection: DetectionConfig = field(default_factory=DetectionConfig)
    evaluation: EvaluationConfig = field(default_factory=EvaluationConfig)


def _apply_overrides(obj: Any, overrides: dict[str, Any], path: str) -> None:
    field_types = {f.name: f for f in dataclasses.fields(obj)}
    for key, value in overrides.items():
        if key not in field_types:
            raise ConfigError(f"unknown config key: {path}{key}")
        current = getattr(obj, key)
        if dataclasses.is_dataclass(current):
            if not isinstance(value, dict):
                raise ConfigError(f"config key {path}{key} expects an object")
            _apply_overrides(current, value, f"{path}{key}.")
        elif isinstance(current, dict) and isinstance(value, dict):
            merged = dict(current)
            merged.update(value)
            setattr(obj, key, merged)
        else:
            setattr(obj, key, value)


def load_config(path: str | Path | None = None, overrides: dict[str, Any] | None = None) -> AppConfig:
    """Build an AppConfig from defaults, an optional JSON file, and overrides."""
    cfg = AppConfig()
    if path is not None:
        p = Path(path)
        if not p.exists():
            raise FileNotFoundError(f"config file not found: {p}")
        try:
            data = json.loads(p.read_text())
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config file is not valid JSON: {exc}") from exc
        if not isinstance(data, dict):
            raise ConfigError("config file must contain a JSON object")
        _apply_overrides(cfg, data, "")
    if overrides:
        _apply_overrides(cfg, overrides, "")
    validate_config(cfg)
    return cfg


def validate_config(cfg: AppConfig) -> None:
    sim = cfg.simulation
    if sim.n_customers < 1:
        raise ConfigError("n_customers must be positive")
    if sim.days < 1:
        raise ConfigError("days must be positive")
    if not 0.0 <= sim.suspicious_rate <= 1.0:
        raise ConfigError("suspicious_rate must lie in [0, 1]")
    props = sim.risk_class_proportions
    if set(props) != set(RISK_CLASSES):
        raise ConfigError(f"risk_class_proportions must cover {RISK_CLASSES}")
    if any(v < 0 for v in props.values()):
        raise ConfigError("risk class proportions must be non-negative")
    if abs(sum(props.values()) - 1.0) > 1e-9:
        raise ConfigError("risk class proportions must sum to 1")
    if len(sim.banks) < 1:
        raise ConfigError("at least one bank is required")
    if len(sim.regions) != len(sim.region_weights):
        raise ConfigError("region_weights must match regions")
    lo, hi = sim.active_category_range
    if not (1 <= lo <= hi <= len(BASE_CATEGORIES)):
        raise ConfigError("active_category_range out of bounds")
    for name in ALL_CATEGORIES:
        if name not in sim.amount_params:
            raise ConfigError(f"amount_params missing category: {name}")
        params = sim.amount_params[name]
        if params["mean"] <= 0 or params["sigma"] <= 0:
            raise ConfigError(f"amount_params invalid for {name}")
        if not 0 < params["min"] < params["max"]:
            raise ConfigError(f"amount bounds invalid for {name}")
    band_shares = [b["share"] for b in sim.income_bands]
    if abs(sum(band_shares) - 1.0) > 1e-9:
        raise ConfigError("income band shares must sum to 1")
    tc = sim.temporal
    for name, seq, n in (
        ("hour_volume_weights", tc.hour_volume_weights, 24),
        ("hour_amount_multipliers", tc.hour_amount_multipliers, 24),
        ("weekday_volume", tc.weekday_volume, 7),
        ("weekday_amount", tc.weekday_amount, 7),
        ("day_of_month_volume", tc.day_of_month_volume, 31),
        ("day_of_month_amount", tc.day_of_month_amount, 31),
    ):
        if len(seq) != n:
            raise ConfigError(f"temporal.{name} must have {n} entries")
        if any(v <= 0 for v in seq):
            raise ConfigError(f"temporal.{name} entries must be positive")
    net = sim.network
    if not (1 <= net.min_degree <= net.max_degree):
        raise ConfigError("degree bounds invalid")
    if net.degree_exponent <= 1.0:
        raise ConfigError("degree_exponent must exceed 1")
    cal = sim.calibration
    clamp = cal.adjustment_clamp
    if len(clamp) != 2 or not (0 < clamp[0] <= 1.0 <= clamp[1]):
        raise ConfigError("adjustment_clamp must bracket 1.0")
    if cal.max_iterations < 1:
        raise ConfigError("max_iterations must be positive")

    det = cfg.detection
    if det.batch_size < 1 or det.window < 1:
        raise ConfigError("batch_size and window must be positive")
    tiers = det.tier_thresholds
    if len(tiers) != 3 or not (0.0 <= tiers[0] < tiers[1] < tiers[2] <= 1.0):
        raise ConfigError("tier_thresholds must be three increasing values in [0, 1]")
    if abs(det.rf_weight + det.if_weight - 1.0) > 1e-9:
        raise ConfigError("rf_weight and if_weight must sum to 1")
    if not 0.0 < det.train_fraction < 1.0:
        raise ConfigError("train_fraction must lie in (0, 1)")
    if det.ablate is not None and det.ablate not in ABLATION_COMPONENTS:
        raise ConfigError(f"unknown ablation component: {det.ablate}")
    if det.resample.k_neighbors < 1:
        raise ConfigError("k_neighbors must be positive")
    if not 0.0 < det.resample.target_positive_fraction < 1.0:
        raise ConfigError("target_positive_fraction must lie in (0, 1)")

    ev = cfg.evaluation
    fw = ev.fidelity_weights
    if abs(fw.temporal + fw.structural + fw.behavioral - 1.0) > 1e-9:
        raise ConfigError("fidelity weights must sum to 1")
    bw = ev.behavioral_weights
    if abs(bw.category + bw.risk + bw.alerts + bw.fraud_rate - 1.0) > 1e-9:
        raise ConfigError("behavioral weights must sum to 1")
    if len(ev.amount_anchors) < 2 or len(ev.volume_anchors) < 2:
        raise ConfigError("reference patterns need at least two anchors")
    if ev.dtw_radius < 1:
        raise ConfigError("dtw_radius must be positive")
    if ev.baseline_fraud_rate <= 0:
        raise ConfigError("baseline_fraud_rate must be positive")


def config_to_dict(cfg: AppConfig) -> dict[str, Any]:
    return dataclasses.asdict(cfg)
