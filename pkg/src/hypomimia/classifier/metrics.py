"""Binary classification metrics with PD as the positive class."""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from ..errors import ShapeError


def _as_bool(labels):
    a = np.asarray(labels).ravel()
    if a.dtype == bool:
        return a
    return a > 0


def roc_auc(y_true, scores):
    """Trapezoidal area under the ROC curve; None when a class is absent.

    Tied scores form a single ROC step, which makes the area equal to the
    probability that a random positive outscores a random negative (ties
    counting one half).
    """
    y = _as_bool(y_true)
    s = np.asarray(scores, dtype=float).ravel()
    n_pos, n_neg = int(y.sum()), int((~y).sum())
    if n_pos == 0 or n_neg == 0:
        return None
    order = np.argsort(-s, kind="mergesort")
    s, y = s[order], y[order]
    last = np.r_[np.flatnonzero(s[1:] != s[:-1]), s.size - 1]
    # integer step counts keep the area exact until the final division
    tp = np.r_[0, np.cumsum(y)[last]]
    fp = np.r_[0, np.cumsum(~y)[last]]
    twice_area = int(np.sum(np.diff(fp) * (tp[1:] + tp[:-1])))
    return twice_area / (2 * n_pos * n_neg)


@dataclass
class Metrics:
    accuracy: float
    precision: float | None
    recall: float | None
    f1: float | None
    auc: float | None
    tp: int
    fp: int
    tn: int
    fn: int

    def to_dict(self):
        return asdict(self)


def compute_metrics(y_true, y_pred, scores=None):
    """Accuracy, precision, recall, F1 and ROC AUC.

    Ratios with a zero denominator are reported as None; F1 is None when
    precision or recall is, and 0 when both are 0.
    """
    t = _as_bool(y_true)
    p = _as_bool(y_pred)
    if t.size != p.size or t.size == 0 or (scores is not None and np.size(scores) != t.size):
        raise ShapeError("labels, predictions and scores must have equal non-zero length")
    tp = int(np.sum(t & p))
    fp = int(np.sum(~t & p))
    tn = int(np.sum(~t & ~p))
    fn = int(np.sum(t & ~p))
    precision = tp / (tp + fp) if tp + fp else None
    recall = tp / (tp + fn) if tp + fn else None
    if precision is None or recall is None:
        f1 = None
    elif precision + recall == 0:
        f1 = 0.0
    else:
        f1 = 2 * precision * recall / (precision + recall)
    auc = roc_auc(t, scores) if scores is not None else None
    return Metrics((tp + tn) / t.size, precision, recall, f1, auc, tp, fp, tn, fn)
