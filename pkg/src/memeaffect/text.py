"""Text cleaning, POS-based stylistic features, synset ambiguity features and
word (1,2)-gram TF-IDF."""

from __future__ import annotations

import math
import re
from collections import Counter
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Dict, FrozenSet, Iterable, List, Mapping, Optional, Sequence

import numpy as np
import scipy.sparse as sp

from .errors import EmptyCorpus, LengthMismatch, ValidationError

URL_RE = re.compile(r"(?:https?://|www\.)\S+", re.IGNORECASE)
MENTION_RE = re.compile(r"@\w+")
_DISALLOWED_RE = re.compile(r"[^a-z0-9']+")

POS_TAGS = ("N", "V", "A", "O")
_SUFFIX_RULES = (
    (("ing", "ed"), "V"),
    (("ous", "ful", "able", "ive"), "A"),
    (("ly",), "O"),
)

STYLISTIC_NAMES = ("n_words", "n_noun", "n_verb", "n_adj", "r_noun", "r_verb", "r_adj")
AMBIGUITY_NAMES = ("mean_synset_len", "max_synset_len", "synset_gap")


def preprocess(raw: str) -> List[str]:
    """Lowercase, strip URLs and @-mentions, keep only ``[a-z0-9']`` runs.

    >>> preprocess("Check www.foo.com @user NOW!!")
    ['check', 'now']
    """
    text = raw.lower()
    text = URL_RE.sub(" ", text)
    text = MENTION_RE.sub(" ", text)
    return _DISALLOWED_RE.sub(" ", text).split()


def read_tsv(path) -> Iterable[List[str]]:
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line.strip() or line.startswith("#"):
                continue
            parts = line.split("\t")
            if len(parts) != 2:
                raise ValidationError(f"{path}:{line_no}: expected two tab-separated fields")
            yield [p.strip() for p in parts]


def bundled(name: str) -> Path:
    return Path(str(resources.files("memeaffect") / "data" / name))


def load_pos_lexicon(path=None) -> Dict[str, str]:
    lexicon = {}
    for word, tag in read_tsv(path or bundled("pos_lexicon.tsv")):
        if tag not in POS_TAGS:
            raise ValidationError(f"{path}: bad POS tag {tag!r} for {word!r}")
        lexicon[word.lower()] = tag
    return lexicon


def load_synonyms(path=None) -> Dict[str, FrozenSet[str]]:
    """Read ``word<TAB>syn1,syn2,...``; every synset includes its head word."""
    lexicon = {}
    for word, syns in read_tsv(path or bundled("synonyms.tsv")):
        word = word.lower()
        members = {s.strip().lower() for s in syns.split(",") if s.strip()}
        members.add(word)
        lexicon[word] = frozenset(members)
    return lexicon


def pos_tag(tokens: Sequence[str], lexicon: Mapping[str, str]) -> List[str]:
    tags = []
    for tok in tokens:
        tag = lexicon.get(tok)
        if tag is None:
            tag = "N"
            for suffixes, rule_tag in _SUFFIX_RULES:
                if tok.endswith(suffixes):
                    tag = rule_tag
                    break
        tags.append(tag)
    return tags


@dataclass(frozen=True)
class StylisticFeatures:
    n_words: int
    n_noun: int
    n_verb: int
    n_adj: int
    r_noun: float
    r_verb: float
    r_adj: float

    def as_array(self) -> np.ndarray:
        return np.array(
            [self.n_words, self.n_noun, self.n_verb, self.n_adj, self.r_noun, self.r_verb, self.r_adj],
            dtype=float,
        )


def stylistic_features(tokens: Sequence[str], tags: Sequence[str]) -> StylisticFeatures:
    if len(tokens) != len(tags):
        raise LengthMismatch(f"{len(tokens)} tokens but {len(tags)} tags")
    n = len(tokens)
    counts = Counter(tags)
    nn, nv, na = counts["N"], counts["V"], counts["A"]

    def ratio(c):
        return c / n if n else 0.0

    return StylisticFeatures(n, nn, nv, na, ratio(nn), ratio(nv), ratio(na))


@dataclass(frozen=True)
class AmbiguityFeatures:
    mean_synset_len: float
    max_synset_len: int
    synset_gap: float

    def as_array(self) -> np.ndarray:
        return np.array([self.mean_synset_len, self.max_synset_len, self.synset_gap], dtype=float)


def ambiguity_features(tokens: Sequence[str], lexicon: Mapping[str, FrozenSet[str]]) -> AmbiguityFeatures:
    if not tokens:
        return AmbiguityFeatures(0.0, 0, 0.0)
    lengths = [len(lexicon[t]) if t in lexicon else 1 for t in tokens]
    mean = sum(lengths) / len(lengths)
    top = max(lengths)
    return AmbiguityFeatures(mean, top, top - mean)


def ngrams(tokens: Sequence[str]) -> List[str]:
    """Unigrams followed by space-joined bigrams."""
    return list(tokens) + [f"{a} {b}" for a, b in zip(tokens, tokens[1:])]


@dataclass(frozen=True)
class TfidfModel:
    vocabulary: Mapping[str, int]
    idf: np.ndarray
    n_docs: int

    @property
    def n_features(self) -> int:
        return len(self.vocabulary)

    def to_dict(self) -> dict:
        terms = sorted(self.vocabulary, key=self.vocabulary.get)
        return {"terms": terms, "idf": self.idf.tolist(), "n_docs": self.n_docs}

    @classmethod
    def from_dict(cls, data: dict) -> "TfidfModel":
        vocab = {t: i for i, t in enumerate(data["terms"])}
        return cls(vocab, np.asarray(data["idf"], dtype=float), int(data["n_docs"]))


def fit_tfidf(corpus: Sequence[Sequence[str]], min_df: int = 1) -> TfidfModel:
    """Smoothed idf, ``ln((1 + N) / (1 + df)) + 1``, over uni- and bigrams."""
    if len(corpus) == 0:
        raise EmptyCorpus("cannot fit TF-IDF on an empty corpus")
    df = Counter()
    for tokens in corpus:
        df.update(set(ngrams(tokens)))
    n = len(corpus)
    terms = sorted(g for g, c in df.items() if c >= min_df)
    vocab = {g: i for i, g in enumerate(terms)}
    idf = np.array([math.log((1 + n) / (1 + df[g])) + 1.0 for g in terms], dtype=float)
    return TfidfModel(vocab, idf, n)


def transform_tfidf(model: TfidfModel, tokens: Sequence[str]) -> sp.csr_matrix:
    return transform_tfidf_many(model, [tokens])


def transform_tfidf_many(model: TfidfModel, docs: Sequence[Sequence[str]]) -> sp.csr_matrix:
    """Raw counts times idf, each row scaled to unit L2 norm (zero rows stay zero)."""
    indptr, indices, values = [0], [], []
    for tokens in docs:
        counts = Counter(model.vocabulary[g] for g in ngrams(tokens) if g in model.vocabulary)
        cols = sorted(counts)
        if cols:
            row = np.array([counts[c] * model.idf[c] for c in cols], dtype=float)
            row /= math.sqrt(float(np.dot(row, row)))
            indices.extend(cols)
            values.extend(row.tolist())
        indptr.append(len(indices))
    return sp.csr_matrix(
        (np.array(values, dtype=float), np.array(indices, dtype=np.int64), np.array(indptr)),
        shape=(len(docs), model.n_features),
    )
