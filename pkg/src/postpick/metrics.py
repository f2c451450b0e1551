"""Confusion-matrix statistics and ROC/AUC for single-feature screening.

"particle" is the positive class throughout.  Ratios with a zero
denominator are reported as None (printed as "n/a"), never coerced to 0.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class ConfusionMatrix:
    tp: int
    fp: int
    tn: int
    fn: int

    def __post_init__(self):
        if min(self.tp, self.fp, self.tn, self.fn) < 0:
            raise ValueError("counts must be nonnegative")

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.tn + self.fn


@dataclass(frozen=True)
class DerivedMetrics:
    sensitivity: float | None
    specificity: float | None
    ppv: float | None
    npv: float | None
    accuracy: float | None


def confusion(truth, predicted, positive="particle") -> ConfusionMatrix:
    """2x2 cross-tabulation of true vs. predicted labels."""
    truth = list(truth)
    predicted = list(predicted)
    if len(truth) != len(predicted) or not truth:
        raise ValueError("truth and predicted must be equal-length and non-empty")
    t = np.array([lab == positive for lab in truth])
    p = np.array([lab == positive for lab in predicted])
    return ConfusionMatrix(
        tp=int(np.sum(t & p)),
        fp=int(np.sum(~t & p)),
        tn=int(np.sum(~t & ~p)),
        fn=int(np.sum(t & ~p)),
    )


def _ratio(num: int, den: int) -> float | None:
    return num / den if den else None


def derived_metrics(cm: ConfusionMatrix) -> DerivedMetrics:
    """Sensitivity, specificity, PPV, NPV, accuracy from a confusion matrix."""
    return DerivedMetrics(
        sensitivity=_ratio(cm.tp, cm.tp + cm.fn),
        specificity=_ratio(cm.tn, cm.tn + cm.fp),
        ppv=_ratio(cm.tp, cm.tp + cm.fp),
        npv=_ratio(cm.tn, cm.tn + cm.fn),
        accuracy=_ratio(cm.tp + cm.tn, cm.total),
    )


def roc_auc(scores, truth, positive="particle") -> float:
    """Mann-Whitney AUC with half credit for tied scores.

    Higher score = more particle-like.
    """
    scores = np.asarray(scores, dtype=np.float64)
    pos_mask = np.array([lab == positive for lab in truth])
    if scores.size != pos_mask.size:
        raise ValueError("scores and truth must have equal length")
    n_pos = int(pos_mask.sum())
    n_neg = int(pos_mask.size - n_pos)
    if n_pos == 0 or n_neg == 0:
        raise ValueError("both classes must be present")
    # Rank-sum formulation: average ranks handle ties with half credit.
    order = np.argsort(scores, kind="stable")
    ranks = np.empty(scores.size, dtype=np.float64)
    sorted_scores = scores[order]
    i = 0
    while i < scores.size:
        j = i
        while j + 1 < scores.size and sorted_scores[j + 1] == sorted_scores[i]:
            j += 1
        ranks[order[i:j + 1]] = (i + j) / 2.0 + 1.0
        i = j + 1
    rank_sum_pos = float(ranks[pos_mask].sum())
    u = rank_sum_pos - n_pos * (n_pos + 1) / 2.0
    return u / (n_pos * n_neg)
