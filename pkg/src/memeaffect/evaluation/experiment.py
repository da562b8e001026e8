"""Stratified k-fold cross-validation and the balanced/augmentation/image ablation grid."""

from __future__ import annotations

import itertools
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from ..corpus import CATEGORIES, Dataset, kfold
from ..pipeline import DenseFeatures, PipelineConfig, Resources, train_pipeline
from .metrics import score

CVHook = Callable[[int, str, np.ndarray], None]


def derive_seed(seed: int, *keys: int) -> int:
    """Child seed for (seed, keys); independent of scheduling order."""
    return int(np.random.SeedSequence([seed, *keys]).generate_state(1)[0])


@dataclass(frozen=True)
class FoldResult:
    fold: int
    macro_f1: float
    accuracy: float
    n_train: int
    n_test: int


@dataclass(frozen=True)
class CVReport:
    category: str
    k: int
    seed: int
    folds: Tuple[FoldResult, ...]

    @property
    def f1_values(self) -> np.ndarray:
        return np.array([f.macro_f1 for f in self.folds])

    @property
    def acc_values(self) -> np.ndarray:
        return np.array([f.accuracy for f in self.folds])

    @property
    def mean_f1(self) -> float:
        return float(self.f1_values.mean())

    @property
    def std_f1(self) -> float:
        return float(self.f1_values.std())

    @property
    def mean_accuracy(self) -> float:
        return float(self.acc_values.mean())

    @property
    def std_accuracy(self) -> float:
        return float(self.acc_values.std())

    def to_dict(self) -> dict:
        return {
            "category": self.category,
            "k": self.k,
            "seed": self.seed,
            "folds": [
                {"fold": f.fold, "macro_f1": f.macro_f1, "accuracy": f.accuracy, "n_train": f.n_train, "n_test": f.n_test}
                for f in self.folds
            ],
            "mean": {"macro_f1": self.mean_f1, "accuracy": self.mean_accuracy},
            "std": {"macro_f1": self.std_f1, "accuracy": self.std_accuracy},
        }

    def to_text(self) -> str:
        lines = [f"{self.category}: {self.k}-fold cross-validation (seed {self.seed})",
                 f"{'Fold':>6}{'F1(%)':>9}{'Acc.(%)':>9}"]
        for f in self.folds:
            lines.append(f"{f.fold:>6}{100 * f.macro_f1:>9.2f}{100 * f.accuracy:>9.2f}")
        lines.append(f"{'mean':>6}{100 * self.mean_f1:>9.2f}{100 * self.mean_accuracy:>9.2f}")
        lines.append(f"{'std':>6}{100 * self.std_f1:>9.2f}{100 * self.std_accuracy:>9.2f}")
        return "\n".join(lines)


def _map(fn, items, jobs: int):
    if jobs <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, items))


def cross_validate(
    d: Dataset,
    category: str,
    config: Optional[PipelineConfig] = None,
    k: int = 10,
    seed: int = 0,
    resources: Optional[Resources] = None,
    dense: Optional[DenseFeatures] = None,
    hook: Optional[CVHook] = None,
    jobs: int = 1,
) -> CVReport:
    """Stratified k-fold CV on ``category``; every fitted statistic sees the train fold only.

    ``hook(fold, stage, indices)`` is called for each fitted statistic with
    the dataset indices it was computed from.
    """
    config = config or PipelineConfig()
    if dense is None:
        dense = DenseFeatures(resources or Resources())
    folds = kfold(d, k, stratify_on=category, seed=seed)
    schema = d.schemas[category]
    y = d.labels(category)

    def run(item):
        f, (train_idx, test_idx) = item
        on_fit = (lambda stage, idx: hook(f, stage, idx)) if hook else None
        trained = train_pipeline(d, train_idx, category, config, dense, derive_seed(seed, f), on_fit)
        pred = trained.predict([d[int(i)] for i in test_idx], dense)
        m = score(y[test_idx], pred, schema.k)
        return FoldResult(f, m.macro_f1, m.accuracy, len(train_idx), len(test_idx))

    results = _map(run, list(enumerate(folds)), jobs)
    return CVReport(category, k, seed, tuple(results))


# Row order: base, +balanced, +augmentation, +image, +bal+aug, +bal+img, +aug+img, all three.
ABLATION_FLAGS: Tuple[Tuple[bool, bool, bool], ...] = tuple(
    sorted(itertools.product((False, True), repeat=3), key=lambda f: (sum(f), [not x for x in f]))
)


def ablation_label(flags: Tuple[bool, bool, bool]) -> str:
    names = [n for n, on in zip(("balanced training", "augmentation", "image features"), flags) if on]
    return "TFIDF Word (1,2)-gram + Dense Features" if not names else "+ " + " + ".join(names)


@dataclass(frozen=True)
class AblationRow:
    balanced: bool
    augmentation: bool
    image_features: bool
    scores: Dict[str, Tuple[float, float]]  # category -> (macro_f1, accuracy)

    @property
    def flags(self) -> Tuple[bool, bool, bool]:
        return (self.balanced, self.augmentation, self.image_features)

    @property
    def label(self) -> str:
        return ablation_label(self.flags)


@dataclass(frozen=True)
class AblationReport:
    k: int
    seed: int
    rows: Tuple[AblationRow, ...]
    reports: Dict[Tuple[Tuple[bool, bool, bool], str], CVReport]

    def to_dict(self) -> dict:
        return {
            "k": self.k,
            "seed": self.seed,
            "rows": [
                {
                    "features": r.label,
                    "balanced": r.balanced,
                    "augmentation": r.augmentation,
                    "image_features": r.image_features,
                    "scores": {c: {"macro_f1": f1, "accuracy": acc} for c, (f1, acc) in r.scores.items()},
                }
                for r in self.rows
            ],
        }

    def to_text(self) -> str:
        cats = list(self.rows[0].scores) if self.rows else []
        head = f"{'Features':<58}" + "".join(f"{c[:12]:>18}" for c in cats)
        sub = f"{'':<58}" + "".join(f"{'F1(%)':>9}{'Acc.(%)':>9}" for _ in cats)
        lines = [head, sub]
        for r in self.rows:
            cells = "".join(f"{100 * r.scores[c][0]:>9.2f}{100 * r.scores[c][1]:>9.2f}" for c in cats)
            lines.append(f"{r.label:<58}{cells}")
        return "\n".join(lines)


def ablation(
    d: Dataset,
    categories: Sequence[str] = CATEGORIES,
    k: int = 10,
    seed: int = 0,
    base: Optional[PipelineConfig] = None,
    resources: Optional[Resources] = None,
    jobs: int = 1,
) -> AblationReport:
    """Cross-validate every combination of balanced weights, augmentation and image features.

    The base configuration is TF-IDF plus the dense text blocks; "image
    features" switches on both the pixel statistics and the emotion vector.
    """
    base = base or PipelineConfig()
    dense = DenseFeatures(resources or Resources())
    rows, reports = [], {}
    for flags in ABLATION_FLAGS:
        balanced, augmentation, image_on = flags
        cfg = replace(base, balanced=balanced, augment=augmentation, image=image_on, emotion=image_on)
        scores = {}
        for cat in categories:
            rep = cross_validate(d, cat, cfg, k, seed, dense=dense, jobs=jobs)
            reports[(flags, cat)] = rep
            scores[cat] = (rep.mean_f1, rep.mean_accuracy)
        rows.append(AblationRow(balanced, augmentation, image_on, scores))
    return AblationReport(k, seed, tuple(rows), reports)
