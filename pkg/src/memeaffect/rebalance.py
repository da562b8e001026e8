"""Label-imbalance handling: balanced class weights, SMOTE, paraphrase augmentation."""

from __future__ import annotations

import zlib
from dataclasses import dataclass
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np
from scipy.spatial.distance import cdist

from .corpus import Sample
from .errors import BadK, ClassTooSmall, MissingClass, ValidationError
from .text import read_tsv, bundled, preprocess

MAX_PHRASE_TOKENS = 3


def class_weights(labels, k: int) -> np.ndarray:
    """Balanced weights ``N / (k * N_c)``."""
    y = np.asarray(labels, dtype=np.int64)
    counts = np.bincount(y, minlength=k)[:k] if y.size else np.zeros(k, dtype=np.int64)
    if y.size and (y.min() < 0 or y.max() >= k):
        raise ValidationError(f"labels must lie in 0..{k - 1}")
    absent = np.flatnonzero(counts == 0)
    if absent.size:
        raise MissingClass(f"class(es) {absent.tolist()} have no samples")
    return len(y) / (k * counts.astype(float))


def smote(
    X,
    y,
    k_neighbors: int = 5,
    seed: int = 0,
    distance_columns: Optional[Sequence[int]] = None,
) -> Tuple[np.ndarray, np.ndarray]:
    """Oversample every class up to the majority count.

    Each synthetic row is ``x + lam * (x_nn - x)`` with ``lam ~ U[0, 1]`` and
    ``x_nn`` drawn from the ``k_neighbors`` nearest same-class rows (Euclidean,
    measured on ``distance_columns`` when given). Originals come first,
    unchanged; synthetic rows are appended class by class.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=np.int64)
    if X.ndim != 2 or len(X) != len(y):
        raise ValidationError("X must be 2-D with one row per label")
    if k_neighbors < 1:
        raise BadK(f"k_neighbors must be >= 1, got {k_neighbors}")
    classes, counts = np.unique(y, return_counts=True)
    if classes.size == 0:
        return X.copy(), y.copy()
    target = counts.max()
    rng = np.random.default_rng(seed)
    D = X if distance_columns is None else X[:, list(distance_columns)]

    new_rows, new_labels = [X], [y]
    for c, n_c in zip(classes, counts):
        need = target - n_c
        if need == 0:
            continue
        if n_c < 2:
            raise ClassTooSmall(f"class {c} has {n_c} sample; SMOTE needs at least 2")
        idx = np.flatnonzero(y == c)
        neighbours = nearest_neighbours(D[idx], min(k_neighbors, n_c - 1))
        base = np.resize(rng.permutation(n_c), need)
        pick = neighbours[base, rng.integers(0, neighbours.shape[1], size=need)]
        lam = rng.random(need)[:, None]
        xb = X[idx[base]]
        new_rows.append(xb + lam * (X[idx[pick]] - xb))
        new_labels.append(np.full(need, c, dtype=np.int64))
    return np.vstack(new_rows), np.concatenate(new_labels)


def nearest_neighbours(points: np.ndarray, k: int, chunk: int = 1024) -> np.ndarray:
    """Indices of the ``k`` nearest other rows; ties go to the lower index."""
    n = len(points)
    out = np.empty((n, k), dtype=np.int64)
    for start in range(0, n, chunk):
        dist = cdist(points[start : start + chunk], points, "sqeuclidean")
        rows = np.arange(dist.shape[0])
        dist[rows, rows + start] = np.inf
        out[start : start + chunk] = np.argsort(dist, axis=1, kind="stable")[:, :k]
    return out


def load_paraphrases(path=None) -> Dict[Tuple[str, ...], Tuple[Tuple[str, ...], ...]]:
    """Read ``phrase<TAB>repl1|repl2|...`` into token-tuple keys and replacements."""
    lexicon = {}
    for phrase, repls in read_tsv(path or bundled("paraphrases.tsv")):
        key = tuple(phrase.lower().split())
        if not 1 <= len(key) <= MAX_PHRASE_TOKENS:
            raise ValidationError(f"paraphrase source {phrase!r} must have 1-{MAX_PHRASE_TOKENS} tokens")
        options = []
        for r in repls.split("|"):
            tokens = tuple(r.lower().split())
            if tokens and tokens != key and tokens not in options:
                options.append(tokens)
        if options:
            lexicon[key] = tuple(options)
    return lexicon


def _sample_rng(seed: int, sample_id: str, copy: int) -> np.random.Generator:
    return np.random.default_rng([seed, zlib.crc32(sample_id.encode("utf-8")), copy])


def paraphrase(tokens: Sequence[str], lexicon: Mapping, p_replace: float, rng) -> Tuple[List[str], int]:
    """Left-to-right longest-match replacement; returns new tokens and the replacement count."""
    out, i, n_repl = [], 0, 0
    while i < len(tokens):
        for span in range(min(MAX_PHRASE_TOKENS, len(tokens) - i), 0, -1):
            key = tuple(tokens[i : i + span])
            options = lexicon.get(key)
            if options is not None:
                break
        else:
            out.append(tokens[i])
            i += 1
            continue
        if rng.random() < p_replace:
            out.extend(options[rng.integers(len(options))])
            n_repl += 1
        else:
            out.extend(key)
        i += span
    return out, n_repl


@dataclass(frozen=True)
class Augmented:
    samples: Tuple[Sample, ...]
    dense: np.ndarray
    source: np.ndarray  # row of the input each output row was derived from


def augment(
    samples: Sequence[Sample],
    dense,
    lexicon: Mapping,
    p_replace: float = 0.5,
    copies: int = 1,
    seed: int = 0,
) -> Augmented:
    """Paraphrase-based augmentation of training samples.

    Synthetic samples keep the source labels and image reference and receive
    a bitwise copy of the source's dense feature row. Copies in which nothing
    was replaced are dropped.
    """
    if not 0.0 <= p_replace <= 1.0:
        raise ValidationError(f"p_replace must lie in [0, 1], got {p_replace}")
    if copies < 0:
        raise ValidationError(f"copies must be >= 0, got {copies}")
    dense = np.asarray(dense, dtype=float)
    if len(dense) != len(samples):
        raise ValidationError("one dense row per sample required")

    out, rows, source = list(samples), [dense], list(range(len(samples)))
    for i, s in enumerate(samples):
        tokens = preprocess(s.text)
        for c in range(copies):
            new_tokens, n_repl = paraphrase(tokens, lexicon, p_replace, _sample_rng(seed, s.id, c))
            if n_repl == 0:
                continue
            out.append(Sample(f"{s.id}#aug{c}", " ".join(new_tokens), s.image_ref, dict(s.labels)))
            rows.append(dense[i : i + 1].copy())
            source.append(i)
    return Augmented(tuple(out), np.vstack(rows), np.array(source, dtype=np.int64))
