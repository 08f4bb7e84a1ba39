"""Class-imbalance correction: undersample the majority, then synthesize
minority points by interpolating between nearest minority neighbors."""

from __future__ import annotations

import logging

import numpy as np

from ..config import ResampleConfig

logger = logging.getLogger(__name__)


def resample(
    X: np.ndarray, y: np.ndarray, rng: np.random.Generator, config: ResampleConfig | None = None
) -> tuple[np.ndarray, np.ndarray]:
    """Balance a training set.

    Majority rows are randomly undersampled until the class ratio is at
    most `undersample_ratio`:1, then synthetic minority points x +
    u (x' - x), u ~ U(0,1), x' among the k nearest minority neighbors,
    are appended until the positive fraction reaches the target.  Real
    minority rows are always kept; no majority rows are fabricated.
    """
    config = config or ResampleConfig()
    y = np.asarray(y, dtype=bool)
    pos_idx = np.flatnonzero(y)
    neg_idx = np.flatnonzero(~y)
    n_pos, n_neg = len(pos_idx), len(neg_idx)
    if n_pos == 0 or n_neg == 0:
        logger.warning("resample: single-class input left unchanged")
        return X, y

    max_neg = max(int(round(n_pos * config.undersample_ratio)), 1)
    if n_neg > max_neg:
        neg_idx = neg_idx[rng.choice(n_neg, size=max_neg, replace=False)]
        neg_idx.sort()
        n_neg = max_neg

    parts_X = [X[neg_idx], X[pos_idx]]
    parts_y = [np.zeros(n_neg, dtype=bool), np.ones(n_pos, dtype=bool)]

    # target_positive_fraction f: need f*(n_neg+n_pos+s) = n_pos+s.
    f = config.target_positive_fraction
    need = int(round((f * (n_neg + n_pos) - n_pos) / (1.0 - f))) if f < 1.0 else 0
    if need > 0:
        if n_pos < 2:
            logger.warning("resample: fewer than 2 minority samples, skipping synthesis")
        else:
            P = X[pos_idx]
            k = min(config.k_neighbors, n_pos - 1)
            sq = np.einsum("ij,ij->i", P, P)
            d2 = sq[:, None] + sq[None, :] - 2.0 * (P @ P.T)
            np.fill_diagonal(d2, np.inf)
            neighbors = np.argsort(d2, axis=1)[:, :k]
            base = rng.integers(0, n_pos, size=need)
            pick = rng.integers(0, k, size=need)
            u = rng.random(size=need)[:, None]
            a = P[base]
            b = P[neighbors[base, pick]]
            parts_X.append(a + u * (b - a))
            parts_y.append(np.ones(need, dtype=bool))

    Xb = np.vstack(parts_X)
    yb = np.concatenate(parts_y)
    perm = rng.permutation(len(yb))
    return Xb[perm], yb[perm]
