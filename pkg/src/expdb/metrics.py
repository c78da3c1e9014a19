"""Evaluation-metric primitives.

All functions are pure and operate on plain Python lists.  AUC uses the
Mann-Whitney statistic with ties counting one half; macro averages treat
zero-denominator classes as contributing 0 so they stay total.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import EmptyInput, LengthMismatch


class UnknownLabel(ValueError):
    code = "unknown_label"

    def __init__(self, label):
        super().__init__(f"label {label!r} is not in the class catalogue")
        self.label = label


class SingleClassInput(ValueError):
    code = "single_class_input"

    def __init__(self):
        super().__init__("AUC needs both classes present")


@dataclass
class ConfusionMatrix:
    """counts[i][j] = instances of true class i predicted as class j."""

    classes: tuple[str, ...]
    counts: list[list[int]]

    @property
    def total(self) -> int:
        return sum(sum(row) for row in self.counts)

    @property
    def trace(self) -> int:
        return sum(self.counts[i][i] for i in range(len(self.classes)))

    def to_json_dict(self) -> dict:
        return {"classes": list(self.classes), "counts": self.counts}

    @classmethod
    def from_json_dict(cls, doc: dict) -> "ConfusionMatrix":
        return cls(tuple(doc["classes"]), [list(r) for r in doc["counts"]])


def accuracy(y_true: list, y_pred: list) -> float:
    """Fraction of positions where prediction equals truth."""
    if len(y_true) != len(y_pred):
        raise LengthMismatch(len(y_true), len(y_pred))
    if not y_true:
        raise EmptyInput("labels")
    return sum(1 for t, p in zip(y_true, y_pred) if t == p) / len(y_true)


def confusion(y_true: list, y_pred: list, classes: tuple[str, ...]) -> ConfusionMatrix:
    if len(y_true) != len(y_pred):
        raise LengthMismatch(len(y_true), len(y_pred))
    index = {label: i for i, label in enumerate(classes)}
    counts = [[0] * len(classes) for _ in classes]
    for t, p in zip(y_true, y_pred):
        if t not in index:
            raise UnknownLabel(t)
        if p not in index:
            raise UnknownLabel(p)
        counts[index[t]][index[p]] += 1
    return ConfusionMatrix(tuple(classes), counts)


def precision_recall_f1_macro(cm: ConfusionMatrix) -> dict:
    """Unweighted macro precision/recall/F1 over all catalogue classes."""
    k = len(cm.classes)
    precisions, recalls, f1s = [], [], []
    for i in range(k):
        tp = cm.counts[i][i]
        fp = sum(cm.counts[j][i] for j in range(k)) - tp
        fn = sum(cm.counts[i]) - tp
        p = tp / (tp + fp) if tp + fp > 0 else 0.0
        r = tp / (tp + fn) if tp + fn > 0 else 0.0
        f = 2 * p * r / (p + r) if p + r > 0 else 0.0
        precisions.append(p)
        recalls.append(r)
        f1s.append(f)
    return {
        "precision": sum(precisions) / k,
        "recall": sum(recalls) / k,
        "f1": sum(f1s) / k,
    }


def auc_binary(y_true: list[bool], scores: list[float]) -> float:
    """Mann-Whitney AUC of the positive class, ties counting one half.

    Computed from tie-averaged ranks; equivalent to the concordant-pair
    count (#{score_pos > score_neg} + 0.5 * #ties) / (n_pos * n_neg).
    """
    if len(y_true) != len(scores):
        raise LengthMismatch(len(y_true), len(scores))
    n_pos = sum(1 for t in y_true if t)
    n_neg = len(y_true) - n_pos
    if n_pos == 0 or n_neg == 0:
        raise SingleClassInput()
    order = sorted(range(len(scores)), key=lambda i: scores[i])
    rank_sum_pos = 0.0
    i = 0
    while i < len(order):
        j = i
        while j < len(order) and scores[order[j]] == scores[order[i]]:
            j += 1
        avg_rank = (i + 1 + j) / 2  # ranks are 1-based
        rank_sum_pos += avg_rank * sum(1 for k in order[i:j] if y_true[k])
        i = j
    return (rank_sum_pos - n_pos * (n_pos + 1) / 2) / (n_pos * n_neg)


def rmse(y_true: list[float], y_pred: list[float]) -> float:
    if len(y_true) != len(y_pred):
        raise LengthMismatch(len(y_true), len(y_pred))
    if not y_true:
        raise EmptyInput("values")
    return math.sqrt(sum((t - p) ** 2 for t, p in zip(y_true, y_pred)) / len(y_true))


def mae(y_true: list[float], y_pred: list[float]) -> float:
    if len(y_true) != len(y_pred):
        raise LengthMismatch(len(y_true), len(y_pred))
    if not y_true:
        raise EmptyInput("values")
    return sum(abs(t - p) for t, p in zip(y_true, y_pred)) / len(y_true)
