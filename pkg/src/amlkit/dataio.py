"""Dataset container, CSV schema, external adapters, and splits.

The on-disk format is a flat CSV with a fixed column order; amounts are
integer cents and timestamps are minute-resolution ISO-8601 UTC.  Any
columns after the core twelve are treated as opaque numeric features
(used when foreign datasets are adapted in).
"""

from __future__ import annotations

import csv
import logging
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path
from typing import Any

import numpy as np

from . import rng as rngmod
from .config import ALL_CATEGORIES, LABELS, PAYMENT_TYPES, SOPHISTICATION_LEVELS
from .errors import ConfigError, DataFormatError

logger = logging.getLogger(__name__)

COLUMNS = (
    "txn_id",
    "timestamp",
    "sender",
    "receiver",
    "amount_cents",
    "category",
    "payment_type",
    "sender_bank",
    "receiver_bank",
    "label",
    "sophistication",
    "pattern_id",
)

_VALID_CATEGORIES = set(ALL_CATEGORIES) | {"external"}
_VALID_PAYMENT_TYPES = set(PAYMENT_TYPES) | {"external"}
_TYPOLOGY_LABELS = {"structuring", "layering", "integration"}


@dataclass
class Transaction:
    txn_id: str
    timestamp: datetime
    sender: str
    receiver: str
    amount_cents: int
    category: str
    payment_type: str
    sender_bank: str
    receiver_bank: str
    label: str
    sophistication: str
    pattern_id: str


def minutes_to_iso(minute: int) -> str:
    return datetime.fromtimestamp(int(minute) * 60, tz=timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")


def iso_to_minutes(text: str) -> int:
    dt = datetime.strptime(text, "%Y-%m-%dT%H:%M:%SZ").replace(tzinfo=timezone.utc)
    return int(dt.timestamp()) // 60


class Dataset:
    """Column-wise transaction store.

    `unix_minutes` holds minute-resolution epoch timestamps; string
    columns are plain lists aligned by row index.
    """

    def __init__(
        self,
        txn_ids: list[str],
        unix_minutes: np.ndarray,
        senders: list[str],
        receivers: list[str],
        amount_cents: np.ndarray,
        categories: list[str],
        payment_types: list[str],
        sender_banks: list[str],
        receiver_banks: list[str],
        labels: list[str],
        sophistications: list[str],
        pattern_ids: list[str],
        extra_features: dict[str, np.ndarray] | None = None,
        source: str = "generated",
    ):
        self.txn_ids = txn_ids
        self.unix_minutes = np.asarray(unix_minutes, dtype=np.int64)
        self.senders = senders
        self.receivers = receivers
        self.amount_cents = np.asarray(amount_cents, dtype=np.int64)
        self.categories = categories
        self.payment_types = payment_types
        self.sender_banks = sender_banks
        self.receiver_banks = receiver_banks
        self.labels = labels
        self.sophistications = sophistications
        self.pattern_ids = pattern_ids
        self.extra_features = extra_features or {}
        self.source = source
        n = len(txn_ids)
        for name, col in (
            ("unix_minutes", self.unix_minutes),
            ("senders", senders),
            ("receivers", receivers),
            ("amount_cents", self.amount_cents),
            ("categories", categories),
            ("payment_types", payment_types),
            ("sender_banks", sender_banks),
            ("receiver_banks", receiver_banks),
            ("labels", labels),
            ("sophistications", sophistications),
            ("pattern_ids", pattern_ids),
        ):
            if len(col) != n:
                raise ValueError(f"column {name} length mismatch")
        for name, col in self.extra_features.items():
            if len(col) != n:
                raise ValueError(f"extra feature {name} length mismatch")

    def __len__(self) -> int:
        return len(self.txn_ids)

    def row(self, i: int) -> Transaction:
        return Transaction(
            txn_id=self.txn_ids[i],
            timestamp=datetime.fromtimestamp(int(self.unix_minutes[i]) * 60, tz=timezone.utc),
            sender=self.senders[i],
            receiver=self.receivers[i],
            amount_cents=int(self.amount_cents[i]),
            category=self.categories[i],
            payment_type=self.payment_types[i],
            sender_bank=self.sender_banks[i],
            receiver_bank=self.receiver_banks[i],
            label=self.labels[i],
            sophistication=self.sophistications[i],
            pattern_id=self.pattern_ids[i],
        )

    def binary_labels(self) -> np.ndarray:
        """True where the transaction is laundering-related."""
        return np.array([lab != "normal" for lab in self.labels], dtype=bool)

    def suspicious_fraction(self) -> float:
        n = len(self)
        return float(self.binary_labels().sum() / n) if n else 0.0

    def subset(self, indices) -> "Dataset":
        idx = np.asarray(indices, dtype=np.int64)
        return Dataset(
            [self.txn_ids[i] for i in idx],
            self.unix_minutes[idx],
            [self.senders[i] for i in idx],
            [self.receivers[i] for i in idx],
            self.amount_cents[idx],
            [self.categories[i] for i in idx],
            [self.payment_types[i] for i in idx],
            [self.sender_banks[i] for i in idx],
            [self.receiver_banks[i] for i in idx],
            [self.labels[i] for i in idx],
            [self.sophistications[i] for i in idx],
            [self.pattern_ids[i] for i in idx],
            {k: v[idx] for k, v in self.extra_features.items()},
            source=self.source,
        )


def write_dataset(dataset: Dataset, path: str | Path) -> None:
    """Serialise to the published CSV schema (deterministic bytes)."""
    path = Path(path)
    extra_names = sorted(dataset.extra_features)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(list(COLUMNS) + extra_names)
        extras = [dataset.extra_features[k] for k in extra_names]
        for i in range(len(dataset)):
            row = [
                dataset.txn_ids[i],
                minutes_to_iso(dataset.unix_minutes[i]),
                dataset.senders[i],
                dataset.receivers[i],
                str(int(dataset.amount_cents[i])),
                dataset.categories[i],
                dataset.payment_types[i],
                dataset.sender_banks[i],
                dataset.receiver_banks[i],
                dataset.labels[i],
                dataset.sophistications[i],
                dataset.pattern_ids[i],
            ]
            row.extend(repr(float(col[i])) for col in extras)
            writer.writerow(row)


def _schema_error(line: int, message: str) -> DataFormatError:
    return DataFormatError(f"line {line}: {message}")


def read_dataset(path: str | Path) -> Dataset:
    """Parse and validate a dataset CSV; errors carry line numbers."""
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"dataset not found: {path}")
    txn_ids: list[str] = []
    minutes: list[int] = []
    senders: list[str] = []
    receivers: list[str] = []
    amounts: list[int] = []
    categories: list[str] = []
    payment_types: list[str] = []
    sender_banks: list[str] = []
    receiver_banks: list[str] = []
    labels: list[str] = []
    sophistications: list[str] = []
    pattern_ids: list[str] = []
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise _schema_error(1, "empty file: header row required") from None
        if tuple(header[: len(COLUMNS)]) != COLUMNS:
            raise _schema_error(1, f"header must start with {','.join(COLUMNS)}")
        extra_names = header[len(COLUMNS):]
        extra_cols: dict[str, list[float]] = {name: [] for name in extra_names}
        for lineno, row in enumerate(reader, start=2):
            if len(row) != len(header):
                raise _schema_error(lineno, f"expected {len(header)} fields, got {len(row)}")
            (txn_id, ts, sender, receiver, amount, category, ptype, sbank, rbank, label, soph, pid) = row[
                : len(COLUMNS)
            ]
            try:
                minute = iso_to_minutes(ts)
            except ValueError:
                raise _schema_error(lineno, f"invalid timestamp: {ts!r}") from None
            try:
                amount_c = int(amount)
            except ValueError:
                raise _schema_error(lineno, f"amount_cents must be an integer, got {amount!r}") from None
            if amount_c <= 0:
                raise _schema_error(lineno, f"amount_cents must be positive, got {amount_c}")
            if category not in _VALID_CATEGORIES:
                raise _schema_error(lineno, f"unknown category: {category!r}")
            if ptype not in _VALID_PAYMENT_TYPES:
                raise _schema_error(lineno, f"unknown payment_type: {ptype!r}")
            if label not in LABELS:
                raise _schema_error(lineno, f"unknown label: {label!r}")
            if soph not in SOPHISTICATION_LEVELS:
                raise _schema_error(lineno, f"unknown sophistication: {soph!r}")
            if sender == receiver:
                raise _schema_error(lineno, "sender and receiver must differ")
            if label == "normal" and (soph != "none" or pid):
                raise _schema_error(lineno, "normal rows must have sophistication=none and no pattern_id")
            if label in _TYPOLOGY_LABELS and (soph == "none" or not pid):
                raise _schema_error(lineno, f"{label} rows need a sophistication level and pattern_id")
            txn_ids.append(txn_id)
            minutes.append(minute)
            senders.append(sender)
            receivers.append(receiver)
            amounts.append(amount_c)
            categories.append(category)
            payment_types.append(ptype)
            sender_banks.append(sbank)
            receiver_banks.append(rbank)
            labels.append(label)
            sophistications.append(soph)
            pattern_ids.append(pid)
            for k, name in enumerate(extra_names):
                value = row[len(COLUMNS) + k]
                try:
                    extra_cols[name].append(float(value))
                except ValueError:
                    raise _schema_error(lineno, f"extra column {name} must be numeric, got {value!r}") from None
    extras = {k: np.asarray(v, dtype=np.float64) for k, v in extra_cols.items()}
    source = "external" if "suspicious" in set(labels) or "external" in set(categories) else "generated"
    return Dataset(
        txn_ids,
        np.asarray(minutes, dtype=np.int64),
        senders,
        receivers,
        np.asarray(amounts, dtype=np.int64),
        categories,
        payment_types,
        sender_banks,
        receiver_banks,
        labels,
        sophistications,
        pattern_ids,
        extras,
        source=source,
    )


REQUIRED_MAPPINGS = ("timestamp", "amount", "sender", "receiver", "label")


def adapt_external(path: str | Path, schema_map: dict[str, Any]) -> Dataset:
    """Convert a foreign CSV into the internal schema.

    `schema_map` supplies column mappings for timestamp/amount/sender/
    receiver/label, a label_map onto {normal, suspicious}, the amount
    unit, and the timestamp format.  Unmapped numeric columns survive as
    opaque features available to detection.
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"external dataset not found: {path}")
    columns = schema_map.get("columns", {})
    for key in REQUIRED_MAPPINGS:
        if key not in columns:
            raise ConfigError(f"schema map missing required column mapping: {key}")
    label_map = {str(k): v for k, v in schema_map.get("label_map", {"0": "normal", "1": "suspicious"}).items()}
    for value in label_map.values():
        if value not in ("normal", "suspicious"):
            raise ConfigError("label_map values must be 'normal' or 'suspicious'")
    unit = schema_map.get("amount_unit", "dollars")
    if unit not in ("dollars", "cents"):
        raise ConfigError(f"unsupported amount_unit: {unit}")
    ts_format = schema_map.get("timestamp_format", "iso")

    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DataFormatError("line 1: empty file") from None
        col_index = {name: i for i, name in enumerate(header)}
        for key in REQUIRED_MAPPINGS:
            if columns[key] not in col_index:
                raise DataFormatError(f"mapped column {columns[key]!r} not present in {path.name}")
        mapped = {columns[k] for k in REQUIRED_MAPPINGS}
        extra_names = [name for name in header if name not in mapped]
        extra_numeric: dict[str, list[float]] = {name: [] for name in extra_names}
        dropped: set[str] = set()

        txn_ids, minutes, senders, receivers, amounts, labels = [], [], [], [], [], []
        for lineno, row in enumerate(reader, start=2):
            if len(row) != len(header):
                raise _schema_error(lineno, f"expected {len(header)} fields, got {len(row)}")
            minutes.append(_parse_external_timestamp(row[col_index[columns["timestamp"]]], ts_format, lineno))
            raw_amount = row[col_index[columns["amount"]]]
            try:
                value = float(raw_amount)
            except ValueError:
                raise _schema_error(lineno, f"amount must be numeric, got {raw_amount!r}") from None
            cents = int(round(value * 100)) if unit == "dollars" else int(round(value))
            if cents <= 0:
                raise _schema_error(lineno, f"amount must be positive, got {raw_amount!r}")
            amounts.append(cents)
            sender = row[col_index[columns["sender"]]]
            receiver = row[col_index[columns["receiver"]]]
            if sender == receiver:
                raise _schema_error(lineno, "sender and receiver must differ")
            senders.append(sender)
            receivers.append(receiver)
            raw_label = str(row[col_index[columns["label"]]])
            if raw_label not in label_map:
                raise _schema_error(lineno, f"label {raw_label!r} missing from label_map")
            labels.append(label_map[raw_label])
            txn_ids.append(f"X{lineno - 2:07d}")
            for name in extra_names:
                if name in dropped:
                    continue
                cell = row[col_index[name]]
                try:
                    extra_numeric[name].append(float(cell))
                except ValueError:
                    dropped.add(name)
                    logger.warning("dropping non-numeric external column %r", name)
    n = len(txn_ids)
    extras = {
        k: np.asarray(v, dtype=np.float64) for k, v in extra_numeric.items() if k not in dropped and len(v) == n
    }
    order = np.argsort(np.asarray(minutes, dtype=np.int64), kind="stable")
    ds = Dataset(
        txn_ids,
        np.asarray(minutes, dtype=np.int64),
        senders,
        receivers,
        np.asarray(amounts, dtype=np.int64),
        ["external"] * n,
        ["external"] * n,
        ["external"] * n,
        ["external"] * n,
        labels,
        ["none"] * n,
        [""] * n,
        extras,
        source="external",
    )
    return ds.subset(order)


def _parse_external_timestamp(text: str, ts_format: str, lineno: int) -> int:
    try:
        if ts_format == "iso":
            cleaned = text.replace("Z", "+00:00")
            dt = datetime.fromisoformat(cleaned)
            if dt.tzinfo is None:
                dt = dt.replace(tzinfo=timezone.utc)
            return int(dt.timestamp()) // 60
        if ts_format == "epoch_s":
            return int(float(text)) // 60
        if ts_format == "epoch_ms":
            return int(float(text)) // 60000
        dt = datetime.strptime(text, ts_format).replace(tzinfo=timezone.utc)
        return int(dt.timestamp()) // 60
    except ValueError:
        raise _schema_error(lineno, f"invalid timestamp {text!r} for format {ts_format!r}") from None


def stratified_split(dataset: Dataset, train_fraction: float, seed: int) -> tuple[np.ndarray, np.ndarray]:
    """Per-label split preserving class proportions.

    Returns sorted train and test index arrays that partition the
    dataset.  A class with a single sample goes to the training side
    with a warning.
    """
    if not 0.0 < train_fraction < 1.0:
        raise ConfigError("train_fraction must lie in (0, 1)")
    if len(dataset) == 0:
        raise ValueError("cannot split an empty dataset")
    rng = rngmod.substream(seed, rngmod.SPLIT)
    labels = np.asarray(dataset.labels, dtype=object)
    train_parts: list[np.ndarray] = []
    test_parts: list[np.ndarray] = []
    for value in sorted(set(dataset.labels)):
        idx = np.flatnonzero(labels == value)
        if idx.size == 1:
            logger.warning("label %r has a single sample; assigning it to train", value)
            train_parts.append(idx)
            continue
        perm = rng.permutation(idx)
        n_train = int(train_fraction * idx.size + 0.5)
        n_train = min(max(n_train, 1), idx.size - 1)
        train_parts.append(perm[:n_train])
        test_parts.append(perm[n_train:])
    train = np.sort(np.concatenate(train_parts)) if train_parts else np.array([], dtype=np.int64)
    test = np.sort(np.concatenate(test_parts)) if test_parts else np.array([], dtype=np.int64)
    return train, test
