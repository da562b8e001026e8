"""Free-marginal multirater kappa and the annotator-versus-model comparison."""

from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import List, Sequence, Tuple

import numpy as np

from ..corpus import LabelSchema
from ..errors import DegenerateInput, LengthMismatch, MissingColumn, UnknownLabel, ValidationError
from .metrics import score


def randolph_kappa(ratings, k: int) -> float:
    """Randolph's free-marginal kappa for an ``items x raters`` label matrix.

    Chance agreement is fixed at ``1/k``.
    """
    r = np.asarray(ratings, dtype=np.int64)
    if r.ndim != 2 or r.shape[1] < 2 or k < 2:
        raise DegenerateInput("need at least two raters and two categories")
    if r.shape[0] == 0:
        raise DegenerateInput("no items")
    if r.min() < 0 or r.max() >= k:
        raise ValidationError(f"ratings must lie in 0..{k - 1}")
    n = r.shape[1]
    counts = np.stack([(r == c).sum(axis=1) for c in range(k)], axis=1)
    p_obs = np.mean((counts * (counts - 1)).sum(axis=1) / (n * (n - 1)))
    p_chance = 1.0 / k
    return float((p_obs - p_chance) / (1.0 - p_chance))


def load_ratings(path, schema: LabelSchema) -> Tuple[List[str], np.ndarray, np.ndarray]:
    """Read ``item_id,gold,rater1,...``; returns item ids, gold labels and the rating matrix."""
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if not header or header[:2] != ["item_id", "gold"] or len(header) < 4:
            raise MissingColumn(f"{path}: header must be item_id,gold,rater1,rater2[,...]")
        ids, gold, rows = [], [], []
        for row_no, row in enumerate(reader, start=1):
            if len(row) != len(header):
                raise ValidationError(f"{path}: row {row_no} has {len(row)} fields, expected {len(header)}")
            labels = []
            for value in row[1:]:
                try:
                    labels.append(schema.index(value.strip()))
                except ValueError:
                    raise UnknownLabel(row_no, schema.category, value) from None
            ids.append(row[0])
            gold.append(labels[0])
            rows.append(labels[1:])
    return ids, np.array(gold, dtype=np.int64), np.array(rows, dtype=np.int64).reshape(len(ids), len(header) - 2)


@dataclass(frozen=True)
class ScoreRow:
    name: str
    macro_f1: float
    accuracy: float


@dataclass(frozen=True)
class AnnotatorReport:
    category: str
    rows: Tuple[ScoreRow, ...]
    kappa: float

    def to_dict(self) -> dict:
        return {
            "category": self.category,
            "kappa": self.kappa,
            "rows": [{"name": r.name, "macro_f1": r.macro_f1, "accuracy": r.accuracy} for r in self.rows],
        }

    def to_text(self) -> str:
        lines = [f"{'Annotators':<22}{'F1(%)':>9}{'Acc.(%)':>9}"]
        for r in self.rows:
            lines.append(f"{r.name:<22}{100 * r.macro_f1:>9.2f}{100 * r.accuracy:>9.2f}")
        lines.append(f"free-marginal kappa: {self.kappa:.4f}")
        return "\n".join(lines)


def annotator_report(ratings, gold, model_preds, k: int, category: str = "") -> AnnotatorReport:
    """Score every annotator and the model against gold; add the annotator average."""
    r = np.asarray(ratings, dtype=np.int64)
    gold = np.asarray(gold, dtype=np.int64)
    model_preds = np.asarray(model_preds, dtype=np.int64)
    if r.ndim != 2 or r.shape[0] != gold.size or model_preds.size != gold.size:
        raise LengthMismatch("ratings, gold and model predictions must cover the same items")
    rows = []
    for j in range(r.shape[1]):
        m = score(gold, r[:, j], k)
        rows.append(ScoreRow(f"Annotator {j + 1}", m.macro_f1, m.accuracy))
    avg = ScoreRow(
        "Annotator Average",
        float(np.mean([x.macro_f1 for x in rows])),
        float(np.mean([x.accuracy for x in rows])),
    )
    m = score(gold, model_preds, k)
    rows += [avg, ScoreRow("Model Performance", m.macro_f1, m.accuracy)]
    return AnnotatorReport(category, tuple(rows), randolph_kappa(r, k))
