"""Corpus ingestion, label schemas, distribution reports and data partitioning."""

from __future__ import annotations

import csv
import warnings
from dataclasses import dataclass, field
from decimal import ROUND_HALF_UP, Decimal
from pathlib import Path
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import maximum_flow

from .errors import (
    DuplicateId,
    EmptyDataset,
    KTooLarge,
    LevelTooSmall,
    MissingColumn,
    RatioSumInvalid,
    SchemaMismatch,
    UnknownLabel,
    ValidationError,
)

CATEGORIES: Tuple[str, ...] = ("sentiment", "humour", "sarcasm", "offensive", "motivational")
CSV_COLUMNS: Tuple[str, ...] = ("id", "image", "text") + CATEGORIES


@dataclass(frozen=True)
class LabelSchema:
    category: str
    levels: Tuple[str, ...]

    def __post_init__(self):
        if self.category not in CATEGORIES:
            raise ValidationError(f"unknown category {self.category!r}")
        if len(set(self.levels)) != len(self.levels):
            raise ValidationError(f"duplicate levels in {self.category} schema")
        if not self.levels:
            raise ValidationError(f"{self.category} schema has no levels")

    @property
    def k(self) -> int:
        return len(self.levels)

    def index(self, level: str) -> int:
        return self.levels.index(level)


# Level order follows the corpus distribution table.
FULL_SCHEMAS: Dict[str, LabelSchema] = {
    "sentiment": LabelSchema("sentiment", ("negative", "neutral", "positive")),
    "humour": LabelSchema("humour", ("not_funny", "funny", "very_funny", "hilarious")),
    "sarcasm": LabelSchema(
        "sarcasm", ("general", "not_sarcastic", "twisted_meaning", "very_twisted")
    ),
    "offensive": LabelSchema(
        "offensive",
        ("not_offensive", "slight_offensive", "very_offensive", "hateful_offensive"),
    ),
    "motivational": LabelSchema("motivational", ("not_motivational", "motivational")),
}

BINARY_SCHEMAS: Dict[str, LabelSchema] = {
    "sentiment": FULL_SCHEMAS["sentiment"],
    "humour": LabelSchema("humour", ("not_funny", "funny")),
    "sarcasm": LabelSchema("sarcasm", ("not_sarcastic", "sarcastic")),
    "offensive": LabelSchema("offensive", ("not_offensive", "offensive")),
    "motivational": FULL_SCHEMAS["motivational"],
}

# base level of each collapsible category; every other level maps to 1
_BINARY_BASE = {"humour": "not_funny", "sarcasm": "not_sarcastic", "offensive": "not_offensive"}


@dataclass(frozen=True)
class Sample:
    id: str
    text: str
    image_ref: Optional[Path] = None
    labels: Mapping[str, int] = field(default_factory=dict)


@dataclass(frozen=True)
class Dataset:
    samples: Tuple[Sample, ...]
    schemas: Mapping[str, LabelSchema] = field(default_factory=lambda: dict(FULL_SCHEMAS))

    def __post_init__(self):
        object.__setattr__(self, "samples", tuple(self.samples))
        seen = set()
        for s in self.samples:
            if s.id in seen:
                raise DuplicateId(f"duplicate sample id {s.id!r}")
            seen.add(s.id)
            for cat, idx in s.labels.items():
                schema = self.schemas.get(cat)
                if schema is None or not 0 <= idx < schema.k:
                    raise SchemaMismatch(f"sample {s.id!r}: invalid {cat} index {idx}")

    def __len__(self) -> int:
        return len(self.samples)

    def __getitem__(self, i: int) -> Sample:
        return self.samples[i]

    def __iter__(self):
        return iter(self.samples)

    @property
    def ids(self) -> List[str]:
        return [s.id for s in self.samples]

    def labels(self, category: str) -> np.ndarray:
        return np.array([s.labels[category] for s in self.samples], dtype=np.int64)

    def subset(self, indices: Iterable[int]) -> "Dataset":
        return Dataset(tuple(self.samples[int(i)] for i in indices), self.schemas)


def load_dataset(csv_path, image_dir=None) -> Dataset:
    """Read a corpus CSV (header ``id,image,text,<five categories>``).

    ``image_ref`` is set only when ``image_dir`` is given, the row names an
    image and that file exists.
    """
    csv_path = Path(csv_path)
    image_dir = Path(image_dir) if image_dir is not None else None
    samples = []
    with csv_path.open(newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        missing = [c for c in CSV_COLUMNS if c not in header]
        if missing:
            raise MissingColumn(f"{csv_path}: missing column(s) {', '.join(missing)}")
        for row_no, row in enumerate(reader, start=1):
            labels = {}
            for cat in CATEGORIES:
                value = (row[cat] or "").strip()
                try:
                    labels[cat] = FULL_SCHEMAS[cat].index(value)
                except ValueError:
                    raise UnknownLabel(row_no, cat, value) from None
            image_ref = None
            name = (row["image"] or "").strip()
            if image_dir is not None and name:
                candidate = image_dir / name
                if candidate.is_file():
                    image_ref = candidate
            samples.append(Sample(row["id"], row["text"] or "", image_ref, labels))
    return Dataset(tuple(samples), dict(FULL_SCHEMAS))


@dataclass(frozen=True)
class LevelCount:
    level: str
    count: int
    pct: float


@dataclass(frozen=True)
class DistributionReport:
    n_samples: int
    categories: Mapping[str, Tuple[LevelCount, ...]]

    def to_dict(self) -> dict:
        return {
            cat: [{"level": r.level, "count": r.count, "pct": r.pct} for r in rows]
            for cat, rows in self.categories.items()
        }

    def by_level(self) -> dict:
        return {
            cat: {r.level: {"count": r.count, "pct": r.pct} for r in rows}
            for cat, rows in self.categories.items()
        }

    def to_text(self) -> str:
        lines = [f"{'Category':<14}{'Tag':<20}{'No. of Samples':>15}{'Percentage(%)':>15}"]
        for cat, rows in self.categories.items():
            for i, r in enumerate(rows):
                lines.append(f"{cat if i == 0 else '':<14}{r.level:<20}{r.count:>15}{r.pct:>15.2f}")
        return "\n".join(lines)


def _pct(count: int, total: int) -> float:
    exact = Decimal(100 * count) / Decimal(total)
    return float(exact.quantize(Decimal("0.01"), rounding=ROUND_HALF_UP))


def distribution_report(d: Dataset) -> DistributionReport:
    n = len(d)
    if n == 0:
        raise EmptyDataset("cannot report on an empty dataset")
    cats = {}
    for cat, schema in d.schemas.items():
        counts = np.bincount(d.labels(cat), minlength=schema.k)
        cats[cat] = tuple(
            LevelCount(level, int(c), _pct(int(c), n)) for level, c in zip(schema.levels, counts)
        )
    return DistributionReport(n, cats)


def collapse_to_binary(d: Dataset) -> Dataset:
    """Map the graded humour/sarcasm/offensive scales to present/absent."""
    for cat in CATEGORIES:
        if d.schemas.get(cat) != FULL_SCHEMAS[cat]:
            raise SchemaMismatch(f"{cat} does not use the graded schema")
    base = {cat: FULL_SCHEMAS[cat].index(level) for cat, level in _BINARY_BASE.items()}
    out = []
    for s in d.samples:
        labels = dict(s.labels)
        for cat, b in base.items():
            labels[cat] = 0 if labels[cat] == b else 1
        out.append(Sample(s.id, s.text, s.image_ref, labels))
    return Dataset(tuple(out), dict(BINARY_SCHEMAS))


def _shuffled_by_level(y: np.ndarray, seed: int) -> Dict[int, np.ndarray]:
    rng = np.random.default_rng(seed)
    return {int(c): rng.permutation(np.flatnonzero(y == c)) for c in np.unique(y)}


def _controlled_rounding(counts: Sequence[int], ratios: Sequence[float]) -> np.ndarray:
    """Integer level x split table whose rows sum to ``counts``.

    Every cell is the floor or ceiling of ``count * ratio`` and every column
    total the floor or ceiling of its ideal total (such a rounding always
    exists for a two-way table). Cells start at the floor; the leftover units
    are routed by a max-flow from levels to splits with lower and upper bounds
    on each split's intake, using the usual auxiliary source/sink reduction.
    """
    counts = np.asarray(counts, dtype=np.int64)
    # rounding to 9 places keeps products such as 10 * 0.7 on the right integer
    ideal = np.round(np.outer(counts, np.asarray(ratios, dtype=float)), 9)
    table = np.floor(ideal).astype(np.int64)
    frac = ideal > table
    col_ideal = np.round(ideal.sum(axis=0), 9)
    row_need = counts - table.sum(axis=1)
    col_lo = np.floor(col_ideal).astype(np.int64) - table.sum(axis=0)
    col_hi = np.ceil(col_ideal).astype(np.int64) - table.sum(axis=0)

    n_rows, n_cols = table.shape
    rows = np.arange(1, 1 + n_rows)
    cols = np.arange(1 + n_rows, 1 + n_rows + n_cols)
    src, snk = 0, 1 + n_rows + n_cols
    aux_src, aux_snk = snk + 1, snk + 2
    cap = np.zeros((aux_snk + 1, aux_snk + 1), dtype=np.int64)
    cap[np.ix_(rows, cols)] = frac
    cap[cols, snk] = col_hi - col_lo
    # split intake lower bounds
    cap[aux_src, snk] = col_lo.sum()
    cap[cols, aux_snk] = col_lo
    # every level must place exactly its leftover units
    cap[aux_src, rows] = row_need
    cap[src, aux_snk] = row_need.sum()
    cap[snk, src] = row_need.sum()
    result = maximum_flow(csr_matrix(cap.astype(np.int32)), aux_src, aux_snk)
    if result.flow_value != col_lo.sum() + row_need.sum():  # cannot happen for a two-way table
        raise RuntimeError("controlled rounding failed")
    return table + result.flow.toarray()[np.ix_(rows, cols)]


def stratified_split(
    d: Dataset, ratios=(0.8, 0.1, 0.1), stratify_on: str = "sentiment", seed: int = 0
) -> Tuple[Dataset, Dataset, Dataset]:
    """Stratified train/validation/test partition.

    Levels with fewer samples than there are non-empty splits are placed
    entirely in train (a ``LevelTooSmall`` warning is issued).
    """
    ratios = tuple(float(r) for r in ratios)
    if len(ratios) != 3 or any(r < 0 for r in ratios) or abs(sum(ratios) - 1.0) > 1e-9:
        raise RatioSumInvalid(f"ratios must be three non-negative fractions summing to 1, got {ratios}")
    y = d.labels(stratify_on)
    groups = _shuffled_by_level(y, seed)
    n_splits = sum(1 for r in ratios if r > 0)

    forced_train = []
    for c in list(groups):
        if len(groups[c]) < n_splits:
            level = d.schemas[stratify_on].levels[c]
            warnings.warn(
                f"{stratify_on} level {level!r} has {len(groups[c])} sample(s); assigned to train",
                LevelTooSmall,
                stacklevel=2,
            )
            forced_train.extend(groups.pop(c).tolist())

    levels = sorted(groups)
    table = _controlled_rounding([len(groups[c]) for c in levels], ratios)
    parts = [list(forced_train), [], []]
    for c, row in zip(levels, table):
        bounds = np.cumsum(row)[:-1]
        for part, chunk in zip(parts, np.split(groups[c], bounds)):
            part.extend(chunk.tolist())
    train, val, test = (np.array(p, dtype=np.int64) for p in parts)
    return tuple(d.subset(np.sort(part)) for part in (train, val, test))


def kfold(
    d: Dataset, k: int = 10, stratify_on: str = "sentiment", seed: int = 0
) -> List[Tuple[np.ndarray, np.ndarray]]:
    """Stratified k-fold partition as (train indices, test indices) pairs."""
    return kfold_labels(d.labels(stratify_on), k, seed)


def kfold_labels(y, k: int, seed: int = 0) -> List[Tuple[np.ndarray, np.ndarray]]:
    y = np.asarray(y)
    n = len(y)
    if k < 2:
        raise ValidationError(f"k must be at least 2, got {k}")
    if k > n:
        raise KTooLarge(f"k={k} exceeds the number of samples ({n})")
    groups = _shuffled_by_level(y, seed)
    # levels laid end to end and dealt round-robin: fold sizes and per-level
    # counts each differ by at most one
    order = np.concatenate([groups[c] for c in sorted(groups)])
    fold_of = np.empty(n, dtype=np.int64)
    fold_of[order] = np.arange(n) % k
    folds = []
    for f in range(k):
        test = np.flatnonzero(fold_of == f)
        train = np.flatnonzero(fold_of != f)
        folds.append((train, test))
    return folds
