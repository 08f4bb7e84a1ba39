"""Customer population, merchant pool, and the peer relationship network.

The population is stored column-wise (numpy arrays indexed by agent
position) for simulation speed; `agent()` and `merchant()` materialise
single-record views for callers that want objects.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from . import rng as rngmod
from .config import (
    BASE_ALPHAS,
    BASE_CATEGORIES,
    MERCHANT_SECTORS,
    RISK_CLASSES,
    SimulationConfig,
)
from .errors import ConfigError

logger = logging.getLogger(__name__)

AGE_BANDS = ("18-24", "25-34", "35-44", "45-54", "55-64", "65+")
AGE_BAND_WEIGHTS = (0.12, 0.22, 0.21, 0.18, 0.15, 0.12)

# Sector mix for the merchant pool; every sector keeps at least one slot.
SECTOR_WEIGHTS = {
    "generic_retail": 0.60,
    "real_estate": 0.10,
    "crypto_exchange": 0.08,
    "luxury_goods": 0.08,
    "import_export": 0.06,
    "local_exchange": 0.05,
    "shell_company": 0.03,
}

RISK_SCORE_RANGES = {"normal": (5.0, 30.0), "high_risk": (40.0, 75.0), "fraud_prone": (70.0, 95.0)}


@dataclass
class CustomerAgent:
    agent_id: str
    index: int
    risk_class: str
    bank: str
    region: str
    age_band: str
    income_band: str
    daily_rate: float
    spending_profile: np.ndarray
    active_categories: tuple[str, ...]
    balance_cents: int
    risk_score: float


@dataclass
class Merchant:
    merchant_id: str
    index: int
    sector: str
    bank: str
    region: str
    legitimacy_score: float


class TransactionNetwork:
    """Undirected weighted peer graph over customer indices."""

    def __init__(self, n: int):
        self.n = n
        self._adj: list[dict[int, float]] = [dict() for _ in range(n)]
        # Sampling caches, built lazily per node.
        self._neighbors: list[np.ndarray | None] = [None] * n
        self._cumweights: list[np.ndarray | None] = [None] * n

    def add_edge(self, i: int, j: int, weight: float) -> None:
        if i == j:
            raise ValueError("self-loops are not allowed")
        self._adj[i][j] = weight
        self._adj[j][i] = weight
        self._neighbors[i] = self._neighbors[j] = None

    def has_edge(self, i: int, j: int) -> bool:
        return j in self._adj[i]

    def degree(self, i: int) -> int:
        return len(self._adj[i])

    def neighbors(self, i: int) -> list[int]:
        return list(self._adj[i])

    def weight(self, i: int, j: int) -> float:
        return self._adj[i][j]

    @property
    def edge_count(self) -> int:
        return sum(len(a) for a in self._adj) // 2

    def sample_neighbor(self, i: int, rng: np.random.Generator) -> int | None:
        """Weighted neighbor draw; None when the node is isolated."""
        if not self._adj[i]:
            return None
        if self._neighbors[i] is None:
            nbrs = np.fromiter(self._adj[i].keys(), dtype=np.int64)
            w = np.fromiter(self._adj[i].values(), dtype=np.float64)
            self._neighbors[i] = nbrs
            self._cumweights[i] = np.cumsum(w)
        cum = self._cumweights[i]
        u = rng.random() * cum[-1]
        return int(self._neighbors[i][np.searchsorted(cum, u, side="right")])


class Population:
    """Columnar store of customers plus the merchant pool."""

    def __init__(self, config: SimulationConfig):
        self.config = config
        self.n = config.n_customers
        self.agent_ids: list[str] = []
        self.risk_class = np.zeros(self.n, dtype=np.int8)
        self.bank = np.zeros(self.n, dtype=np.int16)
        self.region = np.zeros(self.n, dtype=np.int16)
        self.age_band = np.zeros(self.n, dtype=np.int8)
        self.income_band = np.zeros(self.n, dtype=np.int8)
        self.daily_rate = np.zeros(self.n, dtype=np.float64)
        self.profiles = np.zeros((self.n, len(BASE_CATEGORIES)), dtype=np.float64)
        self.active_mask = np.zeros((self.n, len(BASE_CATEGORIES)), dtype=bool)
        self.balance_cents = np.zeros(self.n, dtype=np.int64)
        self.risk_score = np.zeros(self.n, dtype=np.float64)
        self.merchants: list[Merchant] = []
        self.network: TransactionNetwork | None = None

    def agent(self, i: int) -> CustomerAgent:
        cfg = self.config
        active = tuple(BASE_CATEGORIES[k] for k in np.flatnonzero(self.active_mask[i]))
        return CustomerAgent(
            agent_id=self.agent_ids[i],
            index=i,
            risk_class=RISK_CLASSES[self.risk_class[i]],
            bank=cfg.banks[self.bank[i]],
            region=cfg.regions[self.region[i]],
            age_band=AGE_BANDS[self.age_band[i]],
            income_band=cfg.income_bands[self.income_band[i]]["name"],
            daily_rate=float(self.daily_rate[i]),
            spending_profile=self.profiles[i].copy(),
            active_categories=active,
            balance_cents=int(self.balance_cents[i]),
            risk_score=float(self.risk_score[i]),
        )

    def merchants_by_sector(self, sector: str) -> list[int]:
        return [m.index for m in self.merchants if m.sector == sector]


def sample_spending_profile(alphas, rng: np.random.Generator) -> np.ndarray:
    """Draw one spending profile from a Dirichlet over the base categories."""
    arr = np.asarray(alphas, dtype=np.float64)
    if arr.ndim != 1 or arr.size == 0:
        raise ValueError("alphas must be a non-empty 1-D sequence")
    if np.any(arr <= 0) or not np.all(np.isfinite(arr)):
        raise ValueError("alphas must be positive and finite")
    return rng.dirichlet(arr)


def _sample_active_categories(
    profile: np.ndarray, size: int, allow_shell: bool, rng: np.random.Generator
) -> np.ndarray:
    """Weighted sample (without replacement) of category indices."""
    shell_idx = BASE_CATEGORIES.index("Shell Company")
    weights = profile.copy()
    if not allow_shell:
        weights[shell_idx] = 0.0
    candidates = np.flatnonzero(weights > 0)
    size = min(size, candidates.size)
    w = weights[candidates] / weights[candidates].sum()
    chosen = rng.choice(candidates, size=size, replace=False, p=w)
    mask = np.zeros(len(BASE_CATEGORIES), dtype=bool)
    mask[chosen] = True
    return mask


def build_population(config: SimulationConfig) -> Population:
    """Instantiate customers, merchants, and demographics for one run."""
    rng = rngmod.substream(config.seed, rngmod.POPULATION)
    pop = Population(config)
    n = config.n_customers

    props = np.array([config.risk_class_proportions[c] for c in RISK_CLASSES])
    pop.risk_class = rng.choice(len(RISK_CLASSES), size=n, p=props).astype(np.int8)
    pop.bank = rng.integers(0, len(config.banks), size=n).astype(np.int16)
    region_w = np.asarray(config.region_weights, dtype=np.float64)
    pop.region = rng.choice(len(config.regions), size=n, p=region_w / region_w.sum()).astype(np.int16)
    pop.age_band = rng.choice(len(AGE_BANDS), size=n, p=AGE_BAND_WEIGHTS).astype(np.int8)

    band_shares = np.array([b["share"] for b in config.income_bands])
    pop.income_band = rng.choice(len(config.income_bands), size=n, p=band_shares).astype(np.int8)
    rates = np.array([b["daily_rate"] for b in config.income_bands])
    pop.daily_rate = rates[pop.income_band]

    alphas = np.asarray(BASE_ALPHAS)
    lo, hi = config.active_category_range
    for i in range(n):
        pop.agent_ids.append(f"C{i:05d}")
        profile = sample_spending_profile(alphas, rng)
        pop.profiles[i] = profile
        allow_shell = RISK_CLASSES[pop.risk_class[i]] == "fraud_prone"
        size = int(rng.integers(lo, hi + 1))
        pop.active_mask[i] = _sample_active_categories(profile, size, allow_shell, rng)
        band = config.income_bands[pop.income_band[i]]
        b_lo, b_hi = band["balance"]
        pop.balance_cents[i] = int(round(rng.uniform(b_lo, b_hi) * 100))
        s_lo, s_hi = RISK_SCORE_RANGES[RISK_CLASSES[pop.risk_class[i]]]
        pop.risk_score[i] = rng.uniform(s_lo, s_hi)

    pop.merchants = _build_merchants(config, rng)
    return pop


def _build_merchants(config: SimulationConfig, rng: np.random.Generator) -> list[Merchant]:
    count = max(int(np.ceil(config.merchant_fraction * config.n_customers)), len(MERCHANT_SECTORS))
    sectors = list(MERCHANT_SECTORS)
    weights = np.array([SECTOR_WEIGHTS[s] for s in sectors])
    # One of each sector first, the rest proportional to the mix.
    assigned = sectors + list(rng.choice(sectors, size=count - len(sectors), p=weights / weights.sum()))
    merchants = []
    for k, sector in enumerate(assigned):
        legit = rng.uniform(0.75, 1.0) if sector != "shell_company" else rng.uniform(0.05, 0.35)
        merchants.append(
            Merchant(
                merchant_id=f"M{k:04d}",
                index=k,
                sector=sector,
                bank=config.banks[int(rng.integers(0, len(config.banks)))],
                region=config.regions[int(rng.integers(0, len(config.regions)))],
                legitimacy_score=round(float(legit), 4),
            )
        )
    return merchants


def _sample_degrees(n: int, config: SimulationConfig, rng: np.random.Generator) -> np.ndarray:
    """Truncated power-law degree targets."""
    net = config.network
    kmin, kmax = net.min_degree, min(net.max_degree, max(n - 1, 1))
    ks = np.arange(kmin, kmax + 1, dtype=np.float64)
    pmf = ks ** (-net.degree_exponent)
    pmf /= pmf.sum()
    return rng.choice(np.arange(kmin, kmax + 1), size=n, p=pmf)


def build_network(population: Population, config: SimulationConfig | None = None) -> TransactionNetwork:
    """Wire customers into a weighted relationship graph.

    Edge weight is the product of the base weight and the region and
    same-bank affinities, so intra-region and intra-bank links both carry
    more transaction traffic.  Degrees follow a truncated power law.
    """
    config = config or population.config
    n = population.n
    network = TransactionNetwork(n)
    population.network = network
    if n < 2:
        return network

    rng = rngmod.substream(config.seed, rngmod.NETWORK)
    target = _sample_degrees(n, config, rng)
    residual = target.astype(np.int64).copy()
    net = config.network

    order = rng.permutation(n)
    for i in order:
        while residual[i] > 0:
            weights = np.where(population.region == population.region[i], net.region_affinity, 1.0)
            weights = weights * np.where(population.bank == population.bank[i], net.same_bank_affinity, 1.0)
            weights *= net.base_weight
            weights[i] = 0.0
            weights[residual <= 0] = 0.0
            for j in network.neighbors(i):
                weights[j] = 0.0
            total = weights.sum()
            if total <= 0:
                break
            j = int(rng.choice(n, p=weights / total))
            w = _edge_weight(population, i, j, net)
            network.add_edge(i, int(j), w)
            residual[i] -= 1
            residual[j] -= 1

    # Top-up pass: guarantee the configured minimum degree when possible.
    for i in range(n):
        while network.degree(i) < net.min_degree:
            weights = np.where(population.region == population.region[i], net.region_affinity, 1.0)
            weights = weights * np.where(population.bank == population.bank[i], net.same_bank_affinity, 1.0)
            weights[i] = 0.0
            for j in network.neighbors(i):
                weights[j] = 0.0
            degrees = np.fromiter((network.degree(k) for k in range(n)), dtype=np.int64)
            weights[degrees >= net.max_degree] = 0.0
            total = weights.sum()
            if total <= 0:
                logger.warning("node %d could not reach min degree", i)
                break
            j = int(rng.choice(n, p=weights / total))
            network.add_edge(i, j, _edge_weight(population, i, j, net))
    return network


def _edge_weight(population: Population, i: int, j: int, net) -> float:
    w = net.base_weight
    if population.region[i] == population.region[j]:
        w *= net.region_affinity
    if population.bank[i] == population.bank[j]:
        w *= net.same_bank_affinity
    return w
