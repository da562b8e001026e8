"""Feature assembly and model training for one label category.

Dense per-sample features (stylistic, ambiguity, image, emotion) carry no
fitted state and are computed once per dataset. Everything fitted (TF-IDF
vocabulary and idf, dense z-scoring, SMOTE neighbours, augmentation, class
weights) sees training rows only; ``on_fit(stage, indices)`` reports the
dataset indices each fitted statistic was computed from.
"""

from __future__ import annotations

import logging
from dataclasses import asdict, dataclass, field, fields
from typing import Callable, Dict, List, Mapping, Optional, Sequence

import numpy as np
import scipy.sparse as sp

from . import image as img
from . import text
from .classifier import LRModel, TrainConfig, fit, predict
from .corpus import Dataset, Sample
from .errors import ValidationError
from .rebalance import augment, load_paraphrases, smote

log = logging.getLogger(__name__)

# dense matrices below this many cells are cheaper than sparse products
DENSE_CELL_LIMIT = 2_000_000

FitHook = Callable[[str, np.ndarray], None]


@dataclass
class PipelineConfig:
    tfidf: bool = True
    stylistic: bool = True
    ambiguity: bool = True
    image: bool = False
    emotion: bool = False
    balanced: bool = False
    smote: bool = False
    smote_k: int = 5
    smote_dense_only: bool = False
    augment: bool = False
    p_replace: float = 0.5
    copies: int = 1
    min_df: int = 1
    train: TrainConfig = field(default_factory=TrainConfig)

    def __post_init__(self):
        if isinstance(self.train, dict):
            self.train = TrainConfig(**self.train)
        if not (self.tfidf or self.stylistic or self.ambiguity or self.image or self.emotion):
            raise ValidationError("at least one feature block must be enabled")
        if self.smote and self.smote_dense_only and not self.dense_blocks:
            raise ValidationError("smote_dense_only needs at least one dense feature block")
        if self.min_df < 1:
            raise ValidationError("min_df must be >= 1")

    @property
    def dense_blocks(self) -> List[str]:
        return [b for b in ("stylistic", "ambiguity", "image", "emotion") if getattr(self, b)]

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: Mapping) -> "PipelineConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ValidationError(f"unknown pipeline option(s): {', '.join(sorted(unknown))}")
        return cls(**dict(data))


BLOCK_NAMES = {
    "stylistic": text.STYLISTIC_NAMES,
    "ambiguity": text.AMBIGUITY_NAMES,
    "image": img.IMAGE_NAMES,
    "emotion": img.FEATURE_NAMES[len(img.IMAGE_NAMES):],
}


@dataclass
class Resources:
    """Lexicons and lookup tables shared by all folds."""

    pos_lexicon: Mapping[str, str] = field(default_factory=text.load_pos_lexicon)
    synonyms: Mapping = field(default_factory=text.load_synonyms)
    paraphrases: Mapping = field(default_factory=load_paraphrases)
    emotions: Mapping[str, np.ndarray] = field(default_factory=dict)


class DenseFeatures:
    """Per-sample dense blocks, computed lazily and cached by sample id."""

    def __init__(self, resources: Resources):
        self.resources = resources
        self._cache: Dict[str, Dict[str, np.ndarray]] = {}

    def blocks(self, s: Sample) -> Dict[str, np.ndarray]:
        hit = self._cache.get(s.id)
        if hit is None:
            tokens = text.preprocess(s.text)
            tags = text.pos_tag(tokens, self.resources.pos_lexicon)
            grid = img.load_image(s.image_ref) if s.image_ref is not None else None
            emotion = img.attach_emotion(self.resources.emotions, s.id)
            image_vec = img.image_features(grid, emotion)
            hit = {
                "stylistic": text.stylistic_features(tokens, tags).as_array(),
                "ambiguity": text.ambiguity_features(tokens, self.resources.synonyms).as_array(),
                "image": image_vec[: len(img.IMAGE_NAMES)],
                "emotion": image_vec[len(img.IMAGE_NAMES):],
            }
            self._cache[s.id] = hit
        return hit

    def matrix(self, samples: Sequence[Sample], blocks: Sequence[str]) -> np.ndarray:
        width = sum(len(BLOCK_NAMES[b]) for b in blocks)
        if not samples:
            return np.zeros((0, width))
        return np.array([np.concatenate([self.blocks(s)[b] for b in blocks] or [np.zeros(0)]) for s in samples])

    def names(self, blocks: Sequence[str]) -> List[str]:
        return [n for b in blocks for n in BLOCK_NAMES[b]]


def _stack(tfidf_block, dense_block: np.ndarray):
    parts = [tfidf_block] if tfidf_block is not None else []
    if dense_block.shape[1]:
        parts.append(sp.csr_matrix(dense_block))
    X = sp.hstack(parts, format="csr") if len(parts) > 1 else sp.csr_matrix(parts[0])
    if X.shape[0] * X.shape[1] <= DENSE_CELL_LIMIT:
        return X.toarray()
    return X


@dataclass
class FittedFeatures:
    config: PipelineConfig
    tfidf: Optional[text.TfidfModel]
    mean: np.ndarray
    scale: np.ndarray

    @property
    def n_features(self) -> int:
        return (self.tfidf.n_features if self.tfidf else 0) + len(self.mean)

    def transform(self, samples: Sequence[Sample], dense: DenseFeatures):
        raw = dense.matrix(samples, self.config.dense_blocks)
        return self.assemble([text.preprocess(s.text) for s in samples], raw)

    def assemble(self, token_lists, raw_dense: np.ndarray):
        tf = text.transform_tfidf_many(self.tfidf, token_lists) if self.tfidf else None
        return _stack(tf, (raw_dense - self.mean) / self.scale)

    def to_dict(self) -> dict:
        return {
            "config": self.config.to_dict(),
            "tfidf": self.tfidf.to_dict() if self.tfidf else None,
            "mean": self.mean.tolist(),
            "scale": self.scale.tolist(),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "FittedFeatures":
        tfidf = text.TfidfModel.from_dict(data["tfidf"]) if data["tfidf"] else None
        return cls(
            PipelineConfig.from_dict(data["config"]),
            tfidf,
            np.asarray(data["mean"], dtype=float),
            np.asarray(data["scale"], dtype=float),
        )


@dataclass
class TrainedPipeline:
    category: str
    levels: tuple
    features: FittedFeatures
    model: LRModel

    def predict(self, samples: Sequence[Sample], dense: DenseFeatures) -> np.ndarray:
        return predict(self.model, self.features.transform(samples, dense))

    def to_dict(self) -> dict:
        out = self.model.to_dict()
        out.update(category=self.category, levels=list(self.levels), features=self.features.to_dict())
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "TrainedPipeline":
        return cls(
            data["category"],
            tuple(data["levels"]),
            FittedFeatures.from_dict(data["features"]),
            LRModel.from_dict(data),
        )


def _present_class_weights(y: np.ndarray, k: int) -> np.ndarray:
    # Balanced weights over the classes this training set actually contains;
    # an absent class has no rows to weight.
    counts = np.bincount(y, minlength=k).astype(float)
    present = counts > 0
    w = np.zeros(k)
    w[present] = len(y) / (present.sum() * counts[present])
    return w


def train_pipeline(
    d: Dataset,
    indices: Sequence[int],
    category: str,
    cfg: PipelineConfig,
    dense: DenseFeatures,
    seed: int = 0,
    on_fit: Optional[FitHook] = None,
) -> TrainedPipeline:
    """Fit features and model on ``d[indices]``."""
    indices = np.asarray(indices, dtype=np.int64)
    report = on_fit or (lambda stage, idx: None)
    samples = [d[int(i)] for i in indices]
    schema = d.schemas[category]
    blocks = cfg.dense_blocks
    raw = dense.matrix(samples, blocks)
    origin = indices

    if cfg.augment:
        report("augment", indices)
        aug = augment(samples, raw, dense.resources.paraphrases, cfg.p_replace, cfg.copies, seed)
        samples, raw, origin = list(aug.samples), aug.dense, indices[aug.source]
        log.debug("augmentation added %d samples", len(samples) - len(indices))

    tokens = [text.preprocess(s.text) for s in samples]
    tfidf = None
    if cfg.tfidf:
        report("tfidf", origin)
        tfidf = text.fit_tfidf(tokens, cfg.min_df)
    report("standardize", origin)
    mean = raw.mean(axis=0) if len(raw) else np.zeros(raw.shape[1])
    scale = raw.std(axis=0) if len(raw) else np.ones(raw.shape[1])
    scale = np.where(scale > 0, scale, 1.0)
    features = FittedFeatures(cfg, tfidf, mean, scale)

    X = features.assemble(tokens, raw)
    y = np.array([s.labels[category] for s in samples], dtype=np.int64)
    if cfg.smote:
        report("smote", origin)
        if sp.issparse(X):
            X = X.toarray()
        cols = None
        if cfg.smote_dense_only:
            start = tfidf.n_features if tfidf else 0
            cols = range(start, X.shape[1])
        X, y = smote(X, y, cfg.smote_k, seed, distance_columns=cols)
    weights = None
    if cfg.balanced:
        report("class_weights", origin)
        weights = _present_class_weights(y, schema.k)[y]
    model = fit(X, y, cfg.train, sample_weight=weights, n_classes=schema.k)
    return TrainedPipeline(category, schema.levels, features, model)
