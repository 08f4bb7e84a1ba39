"""Detection quality metrics over binary labels and flags."""

from __future__ import annotations

import numpy as np
from scipy import stats


def detection_metrics(labels, flags, scores=None) -> dict:
    """Precision, recall, F1, and rank-based ROC-AUC.

    Degenerate cases (no predicted positives, no actual positives, or a
    single class for AUC) report 0/None with an explicit flag instead of
    raising.
    """
    y = np.asarray(labels, dtype=bool)
    f = np.asarray(flags, dtype=bool)
    if y.shape != f.shape:
        raise ValueError("labels and flags must have equal length")
    tp = int(np.count_nonzero(y & f))
    fp = int(np.count_nonzero(~y & f))
    fn = int(np.count_nonzero(y & ~f))
    tn = int(np.count_nonzero(~y & ~f))

    degenerate = []
    if tp + fp == 0:
        precision = 0.0
        degenerate.append("no_predicted_positives")
    else:
        precision = tp / (tp + fp)
    if tp + fn == 0:
        recall = 0.0
        degenerate.append("no_actual_positives")
    else:
        recall = tp / (tp + fn)
    f1 = 2 * precision * recall / (precision + recall) if precision + recall > 0 else 0.0

    auc = None
    if scores is not None:
        s = np.asarray(scores, dtype=np.float64)
        n_pos, n_neg = int(y.sum()), int((~y).sum())
        if n_pos == 0 or n_neg == 0:
            degenerate.append("single_class_auc")
        else:
            ranks = stats.rankdata(s)
            auc = float((ranks[y].sum() - n_pos * (n_pos + 1) / 2) / (n_pos * n_neg))

    return {
        "precision": float(precision),
        "recall": float(recall),
        "f1": float(f1),
        "auc": auc,
        "tp": tp,
        "fp": fp,
        "fn": fn,
        "tn": tn,
        "degenerate": degenerate,
    }
