"""Dynamic time warping: exact dynamic program and the coarsen-project-
refine approximation, plus the normalized similarity used for temporal
fidelity."""

from __future__ import annotations

import numpy as np


def _window_dtw(a: np.ndarray, b: np.ndarray, window) -> tuple[float, list[tuple[int, int]]]:
    """DTW restricted to the given (i, j) cell set; returns (cost, path)."""
    inf = float("inf")
    D: dict[tuple[int, int], tuple[float, tuple[int, int] | None]] = {(-1, -1): (0.0, None)}
    for i, j in window:
        cost = abs(float(a[i]) - float(b[j]))
        best, parent = inf, None
        for prev in ((i - 1, j), (i, j - 1), (i - 1, j - 1)):
            entry = D.get(prev)
            if entry is not None and entry[0] < best:
                best, parent = entry[0], prev
        if best < inf:
            D[(i, j)] = (best + cost, parent)
    end = (len(a) - 1, len(b) - 1)
    if end not in D:
        raise RuntimeError("warping window does not reach the end cell")
    path = []
    cell: tuple[int, int] | None = end
    while cell is not None and cell != (-1, -1):
        path.append(cell)
        cell = D[cell][1]
    path.reverse()
    return D[end][0], path


def _full_window(n: int, m: int) -> list[tuple[int, int]]:
    return [(i, j) for i in range(n) for j in range(m)]


def dtw_exact(a, b) -> float:
    """Unconstrained DTW with absolute-difference point cost."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.size == 0 or b.size == 0:
        raise ValueError("DTW requires non-empty series")
    n, m = len(a), len(b)
    prev = np.full(m + 1, np.inf)
    prev[0] = 0.0
    for i in range(1, n + 1):
        cur = np.full(m + 1, np.inf)
        ai = a[i - 1]
        for j in range(1, m + 1):
            cur[j] = abs(ai - b[j - 1]) + min(prev[j], cur[j - 1], prev[j - 1])
        prev = cur
    return float(prev[m])


def _coarsen(x: np.ndarray) -> np.ndarray:
    n = len(x) // 2 * 2
    half = (x[:n:2] + x[1:n:2]) / 2.0
    if len(x) % 2:
        half = np.append(half, x[-1])
    return half


def _expand_window(path, n: int, m: int, radius: int) -> list[tuple[int, int]]:
    cells = set()
    for ci, cj in path:
        for di in range(-radius, radius + 1):
            for dj in range(-radius, radius + 1):
                i2, j2 = ci + di, cj + dj
                for fi in (2 * i2, 2 * i2 + 1):
                    for fj in (2 * j2, 2 * j2 + 1):
                        if 0 <= fi < n and 0 <= fj < m:
                            cells.add((fi, fj))
    return sorted(cells)


def _fastdtw(a: np.ndarray, b: np.ndarray, radius: int) -> tuple[float, list[tuple[int, int]]]:
    min_size = radius + 2
    if len(a) <= min_size or len(b) <= min_size:
        return _window_dtw(a, b, _full_window(len(a), len(b)))
    _, coarse_path = _fastdtw(_coarsen(a), _coarsen(b), radius)
    window = _expand_window(coarse_path, len(a), len(b), radius)
    return _window_dtw(a, b, window)


def dtw_distance(a, b, radius: int = 3) -> float:
    """FastDTW-style approximate distance (exact when radius covers all)."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.size == 0 or b.size == 0:
        raise ValueError("DTW requires non-empty series")
    if radius >= max(len(a), len(b)):
        return dtw_exact(a, b)
    return _fastdtw(a, b, radius)[0]


def _minmax(x: np.ndarray) -> np.ndarray:
    lo, hi = x.min(), x.max()
    return (x - lo) / (hi - lo) if hi > lo else np.zeros_like(x)


def _zscore(x: np.ndarray) -> np.ndarray:
    sd = x.std()
    return (x - x.mean()) / sd if sd > 0 else np.zeros_like(x)


def dtw_similarity(a, b, radius: int = 3) -> float:
    """Similarity in [0, 1]: 1 / (1 + distance / max length).

    The distance is computed under min-max and z-score normalization of
    both series, and the two similarities are averaged.
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.size == 0 or b.size == 0:
        raise ValueError("DTW requires non-empty series")
    scale = float(max(len(a), len(b)))
    sims = []
    for norm in (_minmax, _zscore):
        d = dtw_distance(norm(a), norm(b), radius)
        sims.append(1.0 / (1.0 + d / scale))
    return float(np.mean(sims))
