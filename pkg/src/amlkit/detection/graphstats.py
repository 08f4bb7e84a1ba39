"""Incremental account graph and the centrality statistics fed to detection.

The graph is undirected for statistics purposes: an edge means two
accounts have ever transacted.  Betweenness runs Brandes' algorithm with
all sources on small graphs and a sampled source set above a size
cutoff, vectorized so every source advances in lockstep.
"""

from __future__ import annotations

import numpy as np
from scipy import sparse

from .. import rng as rngmod


def brandes_betweenness(
    indptr: np.ndarray, indices: np.ndarray, n: int, sources: np.ndarray
) -> np.ndarray:
    """Accumulated shortest-path dependencies from the given sources.

    Returns the per-node sum of pair dependencies delta_s(v) over the
    sources; callers scale and normalize.  All sources advance in
    lockstep: `sigma` and `dist` are (n_sources, n) arrays and each BFS
    level is a single dense-by-sparse product with the adjacency.
    """
    s = len(sources)
    if s == 0 or n < 3:
        return np.zeros(n)
    adjacency = sparse.csr_matrix(
        (np.ones(len(indices)), indices, indptr), shape=(n, n)
    )
    dist = np.full((s, n), -1, dtype=np.int32)
    sigma = np.zeros((s, n))
    rows = np.arange(s)
    dist[rows, sources] = 0
    sigma[rows, sources] = 1.0
    frontier = np.zeros((s, n), dtype=bool)
    frontier[rows, sources] = True
    frontiers = [frontier]

    level = 0
    while True:
        pushed = np.asarray((sigma * frontiers[level]) @ adjacency)
        newly = (pushed > 0) & (dist < 0)
        if not newly.any():
            break
        dist[newly] = level + 1
        sigma[newly] += pushed[newly]
        frontiers.append(newly)
        level += 1

    delta = np.zeros((s, n))
    for lvl in range(len(frontiers) - 1, 0, -1):
        fr = frontiers[lvl]
        coeff = np.zeros((s, n))
        coeff[fr] = (1.0 + delta[fr]) / sigma[fr]
        pulled = np.asarray(coeff @ adjacency)  # symmetric adjacency
        prev = frontiers[lvl - 1]
        delta[prev] += sigma[prev] * pulled[prev]
    acc = delta.sum(axis=0)
    acc[sources] -= delta[rows, sources]
    return acc


class TransactionGraph:
    """Adjacency-set account graph with lazily refreshed centralities."""

    def __init__(self, betweenness_sources: int = 64, exact_below: int = 400, seed: int = 0):
        self.index: dict[str, int] = {}
        self.adj: list[set[int]] = []
        self.betweenness_sources = betweenness_sources
        self.exact_below = exact_below
        self.seed = seed
        self._betweenness: np.ndarray | None = None
        self._clustering: dict[int, float] = {}
        self._refresh_count = 0

    def node(self, account: str) -> int:
        i = self.index.get(account)
        if i is None:
            i = len(self.adj)
            self.index[account] = i
            self.adj.append(set())
        return i

    def add_transaction(self, sender: str, receiver: str) -> None:
        u, v = self.node(sender), self.node(receiver)
        if u == v or v in self.adj[u]:
            return
        self.adj[u].add(v)
        self.adj[v].add(u)
        # Local clustering changed for the endpoints and their shared
        # neighborhood; drop only those cache entries.
        self._clustering.pop(u, None)
        self._clustering.pop(v, None)
        for w in self.adj[u] & self.adj[v]:
            self._clustering.pop(w, None)

    def degree(self, account: str) -> int:
        i = self.index.get(account)
        return len(self.adj[i]) if i is not None else 0

    def clustering(self, account: str) -> float:
        i = self.index.get(account)
        if i is None:
            return 0.0
        cached = self._clustering.get(i)
        if cached is not None:
            return cached
        nbrs = self.adj[i]
        k = len(nbrs)
        if k < 2:
            self._clustering[i] = 0.0
            return 0.0
        links = 0
        for u in nbrs:
            if len(self.adj[u]) < k:
                links += sum(1 for w in self.adj[u] if w > u and w in nbrs)
            else:
                links += sum(1 for w in nbrs if w > u and w in self.adj[u])
        value = 2.0 * links / (k * (k - 1))
        self._clustering[i] = value
        return value

    def _csr(self) -> tuple[np.ndarray, np.ndarray]:
        degrees = np.fromiter((len(a) for a in self.adj), dtype=np.int64, count=len(self.adj))
        indptr = np.zeros(len(self.adj) + 1, dtype=np.int64)
        np.cumsum(degrees, out=indptr[1:])
        indices = np.empty(int(indptr[-1]), dtype=np.int64)
        for i, nbrs in enumerate(self.adj):
            indices[indptr[i] : indptr[i + 1]] = sorted(nbrs)
        return indptr, indices

    def refresh_betweenness(self) -> None:
        """Recompute betweenness; exact below the cutoff, else sampled."""
        n = len(self.adj)
        if n < 3:
            self._betweenness = np.zeros(n)
            return
        indptr, indices = self._csr()
        if n <= self.exact_below or self.betweenness_sources >= n:
            sources = np.arange(n)
            scale = 1.0
        else:
            rng = rngmod.substream(self.seed, rngmod.DETECTION, 91, self._refresh_count)
            sources = rng.choice(n, size=self.betweenness_sources, replace=False)
            scale = n / float(self.betweenness_sources)
        self._refresh_count += 1
        acc = brandes_betweenness(indptr, indices, n, np.asarray(sources, dtype=np.int64))
        # Ordered-pair normalization; sampled runs extrapolate the source sum.
        value = acc * scale / ((n - 1) * (n - 2))
        self._betweenness = np.clip(value, 0.0, 1.0)

    def betweenness(self, account: str) -> float:
        i = self.index.get(account)
        if i is None:
            return 0.0
        if self._betweenness is None:
            self.refresh_betweenness()
        if i >= len(self._betweenness):
            return 0.0  # node added after the last refresh
        return float(self._betweenness[i])
