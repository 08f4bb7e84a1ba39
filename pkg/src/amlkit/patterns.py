"""Laundering episode planning: structuring, layering, and integration.

Planners produce fully materialised transfer lists (relative offsets in
minutes, integer-cent amounts) that the simulation engine schedules on
top of baseline behaviour.  Every plan conserves value exactly: parts of
a structuring split sum to the cent, and each intermediate account in a
layering chain forwards precisely what it received.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .config import PatternConfig, SimulationConfig
from .population import Population

logger = logging.getLogger(__name__)

TYPOLOGIES = ("structuring", "layering", "integration")
SOPHISTICATIONS = ("low", "medium", "high")

MINUTES_PER_DAY = 24 * 60

# Payment rails favoured by each phase.
STRUCTURING_RAILS = (("CASH_DEPOSIT", 0.45), ("TRANSFER", 0.25), ("OSKO", 0.15), ("NPP", 0.15))
LAYERING_RAILS = (("TRANSFER", 0.50), ("OSKO", 0.20), ("NPP", 0.15), ("INTL_WIRE", 0.15))
INTEGRATION_RAILS = (("TRANSFER", 0.60), ("INTL_WIRE", 0.25), ("BPAY", 0.15))

SECTOR_CATEGORY = {
    "shell_company": "Shell Company",
    "real_estate": "Property Investment",
    "crypto_exchange": "Cryptocurrency",
    "luxury_goods": "Other",
    "import_export": "Other",
    "generic_retail": "Other",
    "local_exchange": "Other",
}


@dataclass
class PlannedTransfer:
    offset_minutes: int
    sender: str
    receiver: str
    amount_cents: int
    category: str
    payment_type: str
    phase: str  # placement | layering | integration


@dataclass
class PatternPlan:
    pattern_id: str
    typology: str
    sophistication: str
    source: str
    participants: list[str]
    transfers: list[PlannedTransfer]
    total_cents: int
    metadata: dict = field(default_factory=dict)


@dataclass
class ScheduledTransfer:
    minute: int  # absolute simulation minute
    transfer: PlannedTransfer
    pattern_id: str
    typology: str
    sophistication: str


def _pick_rail(rails, rng: np.random.Generator) -> str:
    names = [r[0] for r in rails]
    probs = np.array([r[1] for r in rails])
    return names[int(rng.choice(len(names), p=probs / probs.sum()))]


def _largest_remainder_split(total: int, weights: np.ndarray) -> list[int]:
    """Split `total` cents proportionally to weights, exact to the cent."""
    w = np.asarray(weights, dtype=np.float64)
    shares = w / w.sum() * total
    parts = np.floor(shares).astype(np.int64)
    leftover = int(total - parts.sum())
    if leftover > 0:
        order = np.argsort(-(shares - parts), kind="stable")
        parts[order[:leftover]] += 1
    return [int(p) for p in parts]


def _redistribute_over_cap(parts: list[int], cap: int) -> list[int]:
    """Push any excess above `cap` onto parts with headroom."""
    parts = list(parts)
    for _ in range(10 * len(parts)):
        over = [i for i, p in enumerate(parts) if p > cap]
        if not over:
            return parts
        for i in over:
            excess = parts[i] - cap
            parts[i] = cap
            room = [(cap - p, j) for j, p in enumerate(parts) if p < cap]
            room.sort(reverse=True)
            for space, j in room:
                take = min(space, excess)
                parts[j] += take
                excess -= take
                if excess == 0:
                    break
            if excess:
                raise ValueError("total exceeds combined part capacity")
    raise ValueError("cap redistribution did not converge")


def split_structuring(
    total_cents: int, sophistication: str, rng: np.random.Generator, config: PatternConfig | None = None
) -> list[int]:
    """Break an amount into sub-threshold parts.

    Low: near-equal parts with small jitter, each below the cap.
    Medium: normal-distributed parts around the even split, clipped below
    the cap.  High: 4-9 parts with one or two placed just under the
    reporting threshold and the remainder spread lognormally outside
    that band.
    """
    config = config or PatternConfig()
    if total_cents < 100_00:
        raise ValueError("structuring total must be at least $100")
    if sophistication not in SOPHISTICATIONS:
        raise ValueError(f"unknown sophistication: {sophistication}")
    cap = int(round(config.part_cap * 100)) - 1  # strictly below the cap

    # Low and medium keep parts as close under the cap as the jitter
    # allows: depositing far below the limit would waste trips, so real
    # structuring packs each deposit near it.
    if sophistication == "low":
        n = max(2, round(total_cents / 9_000_00))
        while total_cents / n > 9_040_00:  # 1.05 * part must stay under cap
            n += 1
        weights = 1.0 + rng.uniform(-0.05, 0.05, size=n)
        parts = _largest_remainder_split(total_cents, weights)
        return _redistribute_over_cap(parts, cap)

    if sophistication == "medium":
        n = max(2, round(total_cents / 8_900_00))
        mean = total_cents / n
        draws = rng.normal(mean, 0.05 * mean, size=n)
        draws = np.clip(draws, 0.5 * mean, None)
        parts = _largest_remainder_split(total_cents, draws)
        return _redistribute_over_cap(parts, cap)

    # High sophistication.
    band_lo = int(round(config.near_threshold_band[0] * 100))
    band_hi = int(round(config.near_threshold_band[1] * 100))
    min_part = 50_00
    n = int(rng.integers(4, 10))
    k = int(rng.integers(1, 3))
    # Shrink until the near-threshold parts plus minimum remainder fit.
    while k > 1 and k * band_lo + (n - k) * min_part > total_cents:
        k -= 1
    while n > 4 and k * band_lo + (n - k) * min_part > total_cents:
        n -= 1
    if k * band_lo + (n - k) * min_part > total_cents:
        raise ValueError("total too small for a high-sophistication split")

    for _ in range(50):
        near = [int(rng.integers(band_lo, band_hi + 1)) for _ in range(k)]
        remainder = total_cents - sum(near)
        m = n - k
        if remainder < m * min_part:
            continue
        weights = rng.lognormal(0.0, 0.75, size=m)
        rest = _largest_remainder_split(remainder, weights)
        if any(band_lo <= p <= band_hi for p in rest):
            continue  # redraw: only the designated parts sit in the band
        if any(p < min_part for p in rest):
            continue
        parts = near + rest
        assert sum(parts) == total_cents
        return parts
    raise ValueError("could not construct a high-sophistication split")


def _threshold_chunks(amount: int, rng: np.random.Generator) -> list[int]:
    """Cut an amount into near-cap pieces plus one remainder.

    Mirrors how funds actually move under a reporting threshold: repeat
    trips just below the limit, then whatever is left.  A remainder
    under $500 is folded into the last chunk, which keeps every part
    below $9,900.
    """
    chunks: list[int] = []
    remaining = amount
    while remaining > 9_400_00:
        take = int(rng.integers(8_600_00, 9_400_01))
        chunks.append(take)
        remaining -= take
    if remaining > 0:
        if chunks and remaining < 500_00:
            chunks[-1] += remaining
        else:
            chunks.append(remaining)
    return chunks


def _emit_forward(
    transfers: list[PlannedTransfer],
    sender: str,
    pieces: list[tuple[str, int]],
    base_offset: int,
    span_cap: int,
    gap_range: list[int],
    rng: np.random.Generator,
) -> dict[str, int]:
    """Emit one holder's outgoing hop as a run of evenly spaced transfers.

    Every (receiver, amount) piece is cut into sub-threshold chunks; the
    whole run uses one constant intra-gap and must finish within
    `span_cap` minutes of `base_offset`.  Returns the amount delivered
    per receiver (exact to the cent).
    """
    schedule: list[tuple[str, int]] = []
    # Largest piece first: the run then opens near the threshold cap
    # rather than with a small residual transfer.
    for receiver, amount in sorted(pieces, key=lambda p: -p[1]):
        if amount <= 0:
            continue
        schedule.extend((receiver, int(s)) for s in _threshold_chunks(amount, rng) if s > 0)
    if not schedule:
        return {}
    gap = int(rng.integers(gap_range[0], gap_range[1] + 1))
    span = (len(schedule) - 1) * gap
    if span > max(0, span_cap - 1):
        gap = max(1, (span_cap - 1) // max(1, len(schedule) - 1))
        span = (len(schedule) - 1) * gap
    start = base_offset + int(rng.integers(0, max(1, span_cap - span)))
    delivered: dict[str, int] = {}
    for i, (receiver, part) in enumerate(schedule):
        transfers.append(
            PlannedTransfer(
                offset_minutes=start + i * gap,
                sender=sender,
                receiver=receiver,
                amount_cents=part,
                category="Other",
                payment_type=_pick_rail(LAYERING_RAILS, rng),
                phase="layering",
            )
        )
        delivered[receiver] = delivered.get(receiver, 0) + part
    return delivered


def _low_layering(
    total_cents: int,
    accounts: list[str],
    rng: np.random.Generator,
    source: str,
    config: PatternConfig,
) -> list[PlannedTransfer]:
    """Short chain over a small fixed account set inside a tight window.

    Layer one splits the amount evenly across two or three accounts;
    each later layer rotates every holding to the next account in the
    ring, so the whole episode touches only those accounts and wraps
    up within the low-sophistication window.
    """
    window = int(config.low_layering_window_hours * 60)
    w = min(int(rng.integers(2, 4)), len(accounts))
    ring = list(accounts[:w])
    transfers: list[PlannedTransfer] = []
    if w == 1:
        _emit_forward(transfers, source, [(ring[0], total_cents)], window // 2, 60, config.burst_gap_minutes, rng)
        return transfers
    n_layers = int(rng.integers(2, 4))
    gap = window // (n_layers + 1)
    span_cap = min(gap // 2, 240)
    holdings = dict(zip(ring, (int(v) for v in _largest_remainder_split(total_cents, np.ones(w)))))
    _emit_forward(
        transfers,
        source,
        [(acc, amt) for acc, amt in holdings.items() if amt > 0],
        gap,
        span_cap,
        config.burst_gap_minutes,
        rng,
    )
    for layer in range(1, n_layers):
        t = (layer + 1) * gap
        nxt: dict[str, int] = {}
        for i, acc in enumerate(ring):
            amt = holdings.get(acc, 0)
            if amt <= 0:
                continue
            dest = ring[(i + 1) % w]
            got = _emit_forward(transfers, acc, [(dest, amt)], t, span_cap, config.burst_gap_minutes, rng)
            for d, v in got.items():
                nxt[d] = nxt.get(d, 0) + v
        holdings = nxt
    return transfers


def build_layering_chain(
    total_cents: int,
    sophistication: str,
    accounts: list[str],
    rng: np.random.Generator,
    config: PatternConfig | None = None,
    source: str = "SRC",
) -> list[PlannedTransfer]:
    """Construct a multi-layer forwarding chain through mule accounts.

    Every holder forwards its full balance to the next layer, so inflow
    equals outflow for every intermediate account.  Low sophistication
    uses short chains with fixed delays; medium adds Dirichlet splits and
    fresh accounts per layer; high runs 5-8 layers with parallel chains
    and occasional account reuse (permitted cycles).
    """
    config = config or PatternConfig()
    if total_cents <= 0:
        raise ValueError("layering total must be positive")
    if sophistication not in SOPHISTICATIONS:
        raise ValueError(f"unknown sophistication: {sophistication}")
    if not accounts:
        raise ValueError("layering requires at least one mule account")

    window = int(config.layering_window_days * MINUTES_PER_DAY)
    if sophistication == "low":
        return _low_layering(total_cents, accounts, rng, source, config)
    # Gaps are whole-day multiples so hops recur near the episode's hour.
    # Chains fan out early and funnel back toward the end, the way real
    # layering converges on the account that will spend the funds; a
    # narrowing tail also keeps per-hop amounts from shrinking into
    # retail-sized slivers.
    if sophistication == "medium":
        n_layers = int(rng.integers(3, 6))
        half = n_layers // 2
        widths = [int(rng.integers(2, 4)) for _ in range(n_layers - half)] + [
            int(rng.integers(1, 3)) for _ in range(half)
        ]
        gaps = [MINUTES_PER_DAY * int(rng.integers(1, 5)) for _ in range(n_layers)]
        reuse_prob = 0.0
    else:
        n_layers = int(rng.integers(5, 9))
        half = n_layers // 2
        widths = [int(rng.integers(2, 4)) for _ in range(n_layers - half)] + [
            int(rng.integers(1, 3)) for _ in range(half)
        ]
        gaps = [MINUTES_PER_DAY * int(rng.integers(1, 4)) for _ in range(n_layers)]
        reuse_prob = 0.5
    jitter_max = 2 * 60

    # Keep the whole chain inside the layering window.
    slack = window - (jitter_max + 60) - sum(gaps)
    if slack < 0:
        scale = (window - (jitter_max + 60)) / sum(gaps)
        gaps = [max(MINUTES_PER_DAY, int(g * scale) // MINUTES_PER_DAY * MINUTES_PER_DAY) for g in gaps]
    # Jitter never crosses into the next layer, preserving causality.
    jitter_caps = [
        min(jitter_max, gaps[layer + 1] - 1) if layer + 1 < len(gaps) else jitter_max
        for layer in range(len(gaps))
    ]

    pool = list(accounts)
    used_per_layer: list[list[str]] = []
    holders: list[tuple[str, int]] = [(source, total_cents)]
    transfers: list[PlannedTransfer] = []
    t = 0
    for layer in range(n_layers):
        t += gaps[layer]
        width = min(widths[layer], max(1, len(pool)))
        destinations: list[str] = []
        for slot in range(width):
            reused = None
            if (
                reuse_prob > 0.0
                and layer >= 2
                and layer < n_layers - 1
                and rng.random() < reuse_prob
                and len(used_per_layer) >= 2
            ):
                # Cycle back through an account from two or more layers ago.
                older = [a for lay in used_per_layer[:-1] for a in lay]
                older = [a for a in older if a not in destinations and all(a != h for h, _ in holders)]
                if older:
                    reused = older[int(rng.integers(0, len(older)))]
            if reused is not None:
                destinations.append(reused)
            elif pool:
                pick = int(rng.integers(0, len(pool)))
                destinations.append(pool.pop(pick))
            elif layer == n_layers - 1:
                break
        if not destinations:
            # Pool exhausted: terminate the chain early at current holders.
            n_layers = layer
            break
        next_holdings = {d: 0 for d in destinations}
        for holder, amount in holders:
            targets = [d for d in destinations if d != holder] or destinations
            # Concentrated Dirichlet with an additive floor: no target
            # receives a sliver that would vanish among retail noise.
            weights = rng.dirichlet(3.0 * np.ones(len(targets))) + 1.0
            split = _largest_remainder_split(amount, np.asarray(weights))
            got = _emit_forward(
                transfers,
                holder,
                [(dest, int(part)) for dest, part in zip(targets, split)],
                t,
                jitter_caps[layer],
                config.burst_gap_minutes,
                rng,
            )
            for dest, part in got.items():
                next_holdings[dest] += part
        used_per_layer.append(destinations)
        holders = [(d, amt) for d, amt in next_holdings.items() if amt > 0]
    return transfers


def build_integration(
    total_cents: int,
    sophistication: str,
    payer: str,
    merchants_by_sector: dict[str, list[str]],
    rng: np.random.Generator,
    config: PatternConfig | None = None,
    mule_accounts: list[str] | None = None,
) -> tuple[list[PlannedTransfer], dict]:
    """Plan the re-entry of laundered funds into the legitimate economy.

    Low: one large transfer to a shell company.  Medium: payments toward
    a plausibly legitimate business with a randomised legitimacy score.
    High: a layering prefix followed by split payments across sectors,
    delayed by two weeks or more.
    """
    config = config or PatternConfig()
    if total_cents <= 0:
        raise ValueError("integration total must be positive")
    floor = int(round(config.integration_floor * 100))
    meta: dict = {}

    if sophistication == "low":
        shells = merchants_by_sector.get("shell_company") or []
        if not shells:
            raise ValueError("integration requires a shell-company merchant")
        amount = max(total_cents, floor)
        meta["target_sector"] = "shell_company"
        offset = MINUTES_PER_DAY * int(rng.integers(1, 3)) + int(rng.integers(-120, 121))
        return (
            [
                PlannedTransfer(
                    offset_minutes=offset,
                    sender=payer,
                    receiver=shells[int(rng.integers(0, len(shells)))],
                    amount_cents=amount,
                    category=SECTOR_CATEGORY["shell_company"],
                    payment_type=_pick_rail(INTEGRATION_RAILS, rng),
                    phase="integration",
                )
            ],
            meta,
        )

    if sophistication == "medium":
        sectors = [s for s in ("real_estate", "crypto_exchange", "luxury_goods") if merchants_by_sector.get(s)]
        if not sectors:
            raise ValueError("integration requires a business merchant")
        sector = sectors[int(rng.integers(0, len(sectors)))]
        meta["target_sector"] = sector
        meta["legitimacy_score"] = round(float(rng.uniform(0.2, 0.8)), 4)
        n_payments = int(rng.integers(1, 3))
        parts = _largest_remainder_split(total_cents, rng.dirichlet(np.ones(n_payments)) + 0.2)
        pool = merchants_by_sector[sector]
        offsets = sorted(
            MINUTES_PER_DAY * int(rng.integers(2, 10)) + int(rng.integers(-120, 121)) for _ in range(n_payments)
        )
        transfers = [
            PlannedTransfer(
                offset_minutes=offsets[i],
                sender=payer,
                receiver=pool[int(rng.integers(0, len(pool)))],
                amount_cents=part,
                category=SECTOR_CATEGORY[sector],
                payment_type=_pick_rail(INTEGRATION_RAILS, rng),
                phase="integration",
            )
            for i, part in enumerate(parts)
            if part > 0
        ]
        return transfers, meta

    # High sophistication: complex layering first, then delayed payouts.
    mules = mule_accounts or []
    if not mules:
        raise ValueError("high-sophistication integration requires mule accounts")
    chain = build_layering_chain(total_cents, "medium", mules, rng, config, source=payer)
    # Funnel whatever the chain's final holders retain through payouts.
    held: dict[str, int] = {}
    for tr in chain:
        held[tr.receiver] = held.get(tr.receiver, 0) + tr.amount_cents
        held[tr.sender] = held.get(tr.sender, 0) - tr.amount_cents
    holders = [(a, v) for a, v in held.items() if v > 0]
    chain_end = max(tr.offset_minutes for tr in chain)
    min_delay = int(config.integration_min_delay_days * MINUTES_PER_DAY)
    max_delay = int(config.integration_max_delay_days * MINUTES_PER_DAY)
    sectors = [s for s in ("real_estate", "luxury_goods", "crypto_exchange", "import_export") if merchants_by_sector.get(s)]
    if not sectors:
        raise ValueError("integration requires business merchants")
    meta["target_sector"] = "mixed"
    transfers = list(chain)
    for holder, amount in holders:
        n_payments = int(rng.integers(1, 3))
        parts = _largest_remainder_split(amount, rng.dirichlet(np.ones(n_payments)) + 0.2)
        # Distinct payout days per holder: two same-day runs from one
        # payer would interleave into an unreadable schedule.
        days = rng.choice(np.arange(8, 22), size=n_payments, replace=False)
        for part, day in zip(parts, days):
            if part <= 0:
                continue
            sector = sectors[int(rng.integers(0, len(sectors)))]
            pool = merchants_by_sector[sector]
            receiver = pool[int(rng.integers(0, len(pool)))]
            payout_day = chain_end // MINUTES_PER_DAY + int(day)
            offset = max(min_delay, MINUTES_PER_DAY * payout_day) + int(rng.integers(0, 121))
            offset = min(offset, max_delay)
            gap = int(rng.integers(config.burst_gap_minutes[0], config.burst_gap_minutes[1] + 1))
            for j, chunk in enumerate(_threshold_chunks(int(part), rng)):
                transfers.append(
                    PlannedTransfer(
                        offset_minutes=offset + j * gap,
                        sender=holder,
                        receiver=receiver,
                        amount_cents=chunk,
                        category=SECTOR_CATEGORY[sector],
                        payment_type=_pick_rail(INTEGRATION_RAILS, rng),
                        phase="integration",
                    )
                )
    return transfers, meta


def _structuring_offsets(n: int, sophistication: str, rng: np.random.Generator, config: PatternConfig) -> list[int]:
    """Deposit times: day-granular spacing near one recurring hour."""
    window = int(config.placement_window_days * MINUTES_PER_DAY)
    window_days = max(1, int(config.placement_window_days))
    if sophistication == "high":
        # Timestamps vary around a mid-window anchor by up to two days,
        # clamped into the placement window.
        anchor = config.placement_window_days / 2.0
        days = [anchor + rng.uniform(-2, 2) for _ in range(n)]
        jitter = 45
    else:
        days = [float(rng.integers(0, window_days)) for _ in range(n)]
        jitter = 150
    return [
        int(np.clip(round(d) * MINUTES_PER_DAY + rng.integers(-jitter, jitter + 1), 0, window - 1))
        for d in days
    ]


def plan_pattern(
    typology: str,
    sophistication: str,
    population: Population,
    rng: np.random.Generator,
    pattern_id: str,
    config: SimulationConfig | None = None,
) -> PatternPlan | None:
    """Select participants and materialise one laundering episode.

    Returns None (with a warning) when the population cannot supply
    enough distinct participants.
    """
    config = config or population.config
    pcfg = config.patterns
    if typology not in TYPOLOGIES:
        raise ValueError(f"unknown typology: {typology}")
    if sophistication not in SOPHISTICATIONS:
        raise ValueError(f"unknown sophistication: {sophistication}")

    class_w = np.array([pcfg.risk_class_weights[c] for c in ("normal", "high_risk", "fraud_prone")])
    weights = class_w[population.risk_class].astype(np.float64)
    source_idx = int(rng.choice(population.n, p=weights / weights.sum()))
    source = population.agent_ids[source_idx]

    needed = {"structuring": 9, "layering": 26, "integration": 20}[typology]
    candidate_weights = weights.copy()
    candidate_weights[source_idx] = 0.0
    if population.network is not None:
        for j in population.network.neighbors(source_idx):
            candidate_weights[j] *= 3.0  # prefer existing relationships
    available = int(np.count_nonzero(candidate_weights))
    if available < min(needed, 2):
        logger.warning("pattern %s skipped: insufficient participants", pattern_id)
        return None
    k = min(needed, available)
    mule_idx = rng.choice(population.n, size=k, replace=False, p=candidate_weights / candidate_weights.sum())
    mules = [population.agent_ids[int(j)] for j in mule_idx]

    lo, hi = {
        "structuring": pcfg.structuring_total,
        "layering": pcfg.layering_total,
        "integration": pcfg.integration_total,
    }[typology]
    total_cents = int(round(math.exp(rng.uniform(math.log(lo), math.log(hi))) * 100))
    if typology == "structuring" and sophistication != "high":
        # Snap the total to a whole number of near-cap deposits: packing
        # each trip close to the limit is the point of structuring, and a
        # remainder part far below the cap would break the episode's shape.
        mean_part = float(rng.uniform(8_950_00, 9_040_00)) if sophistication == "low" else float(
            rng.uniform(8_950_00, 9_150_00)
        )
        n_parts = max(2, round(total_cents / mean_part))
        total_cents = int(round(n_parts * mean_part))

    merchants_by_sector: dict[str, list[str]] = {}
    for m in population.merchants:
        merchants_by_sector.setdefault(m.sector, []).append(m.merchant_id)

    meta: dict = {}
    if typology == "structuring":
        parts = split_structuring(total_cents, sophistication, rng, pcfg)
        offsets = _structuring_offsets(len(parts), sophistication, rng, pcfg)
        recipients = list(mules)
        rng.shuffle(recipients)
        transfers = []
        for i, (part, offset) in enumerate(zip(parts, offsets)):
            transfers.append(
                PlannedTransfer(
                    offset_minutes=offset,
                    sender=source,
                    receiver=recipients[i % len(recipients)],
                    amount_cents=part,
                    category="Other",
                    payment_type=_pick_rail(STRUCTURING_RAILS, rng),
                    phase="placement",
                )
            )
    elif typology == "layering":
        transfers = build_layering_chain(total_cents, sophistication, mules, rng, pcfg, source=source)
        if not transfers:
            logger.warning("pattern %s skipped: empty layering chain", pattern_id)
            return None
    else:
        payer = source
        try:
            transfers, meta = build_integration(
                total_cents, sophistication, payer, merchants_by_sector, rng, pcfg, mule_accounts=mules
            )
        except ValueError as exc:
            logger.warning("pattern %s skipped: %s", pattern_id, exc)
            return None
        if sophistication == "low":
            total_cents = transfers[0].amount_cents  # floor may raise the total

    participants = sorted({t.sender for t in transfers} | {t.receiver for t in transfers})
    return PatternPlan(
        pattern_id=pattern_id,
        typology=typology,
        sophistication=sophistication,
        source=source,
        participants=participants,
        transfers=transfers,
        total_cents=total_cents,
        metadata=meta,
    )


def inject(plan: PatternPlan, start_minute: int, horizon_minutes: int) -> tuple[list[ScheduledTransfer], bool]:
    """Place a plan on the absolute timeline, truncating at the horizon.

    The schedule is additive: baseline behaviour of the participants is
    never rewritten, so after the final scheduled transfer the agents'
    observable behaviour reverts to their profile exactly.
    """
    scheduled: list[ScheduledTransfer] = []
    truncated = False
    for tr in plan.transfers:
        minute = start_minute + tr.offset_minutes
        if minute >= horizon_minutes:
            truncated = True
            continue
        scheduled.append(
            ScheduledTransfer(
                minute=minute,
                transfer=tr,
                pattern_id=plan.pattern_id,
                typology=plan.typology,
                sophistication=plan.sophistication,
            )
        )
    return scheduled, truncated
