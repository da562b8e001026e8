"""Confusion matrices, accuracy / macro-F1, and per-category model selection."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, Mapping

import numpy as np

from ..errors import EmptyMatrix, LengthMismatch, MissingScore, ValidationError


def confusion_matrix(gold, pred, k: int) -> np.ndarray:
    """``k x k`` counts; rows are gold labels, columns predictions."""
    gold = np.asarray(gold, dtype=np.int64)
    pred = np.asarray(pred, dtype=np.int64)
    if gold.shape != pred.shape:
        raise LengthMismatch(f"{gold.size} gold labels vs {pred.size} predictions")
    for arr in (gold, pred):
        if arr.size and (arr.min() < 0 or arr.max() >= k):
            raise ValidationError(f"labels must lie in 0..{k - 1}")
    cm = np.zeros((k, k), dtype=np.int64)
    np.add.at(cm, (gold, pred), 1)
    return cm


@dataclass(frozen=True)
class Metrics:
    accuracy: float
    macro_f1: float
    precision: np.ndarray
    recall: np.ndarray
    f1: np.ndarray

    def to_dict(self) -> dict:
        return {
            "accuracy": self.accuracy,
            "macro_f1": self.macro_f1,
            "precision": self.precision.tolist(),
            "recall": self.recall.tolist(),
            "f1": self.f1.tolist(),
        }


def _safe_div(num: np.ndarray, den: np.ndarray) -> np.ndarray:
    return np.divide(num, den, out=np.zeros(num.shape, dtype=float), where=den > 0)


def metrics(cm) -> Metrics:
    """Scores from a confusion matrix; 0/0 counts as 0 and macro-F1 averages every class."""
    cm = np.asarray(cm)
    total = cm.sum()
    if total <= 0:
        raise EmptyMatrix("confusion matrix is empty")
    tp = np.diag(cm).astype(float)
    precision = _safe_div(tp, cm.sum(axis=0).astype(float))
    recall = _safe_div(tp, cm.sum(axis=1).astype(float))
    f1 = _safe_div(2 * precision * recall, precision + recall)
    return Metrics(float(tp.sum() / total), float(f1.mean()), precision, recall, f1)


def score(gold, pred, k: int) -> Metrics:
    return metrics(confusion_matrix(gold, pred, k))


def select_best(scores: Mapping[str, Mapping[str, float]]) -> Dict[str, str]:
    """Pick the highest-macro-F1 model for each category.

    ``scores`` maps model name to ``{category: macro_f1}``. Ties go to the
    lexicographically smallest model name.
    """
    if not scores:
        raise MissingScore("no models to choose from")
    categories = sorted(set().union(*(s.keys() for s in scores.values())))
    plan = {}
    for cat in categories:
        missing = [m for m, s in scores.items() if cat not in s]
        if missing:
            raise MissingScore(f"{', '.join(sorted(missing))} not scored on {cat}")
        plan[cat] = min(scores, key=lambda m: (-scores[m][cat], m))
    return plan
