"""Deterministic synthetic corpora, images, emotion tables and lexicons."""

from __future__ import annotations

import csv
import shutil
from pathlib import Path
from typing import Dict, List, Mapping, Sequence

import numpy as np

from .corpus import CATEGORIES, CSV_COLUMNS, FULL_SCHEMAS, Dataset, Sample
from .image import EMOTIONS, PixelGrid, save_png
from .text import bundled

# Label counts of the 7001-sample annotated training split.
TABLE1_COUNTS: Dict[str, Sequence[int]] = {
    "sentiment": (631, 2205, 4165),
    "humour": (1651, 2457, 2241, 652),
    "sarcasm": (3512, 1546, 1549, 394),
    "offensive": (2715, 2596, 1469, 221),
    "motivational": (4530, 2471),
}

_SENTIMENT_WORDS = {
    "negative": ["hate", "sad", "terrible", "angry", "worst", "crying", "monday"],
    "neutral": ["work", "coffee", "phone", "school", "today", "office", "people"],
    "positive": ["love", "happy", "awesome", "best", "friends", "weekend", "good"],
}
_HUMOUR_WORDS = ["lol", "funny", "joke", "hilarious", "lmao", "meme"]
_FILLER = ["when", "you", "the", "a", "and", "my", "is", "that", "look at", "i think", "when you", "cat", "dog", "boss"]
_PALETTE = {
    "negative": [(40, 40, 60), (90, 20, 20), (30, 30, 30)],
    "neutral": [(128, 128, 128), (200, 200, 200), (90, 110, 120)],
    "positive": [(255, 200, 0), (255, 60, 60), (60, 200, 80)],
}


def allocate(total: int, weights: Sequence[float], floor: int = 0) -> List[int]:
    """Largest-remainder allocation of ``total`` proportional to ``weights`` with a per-slot floor."""
    w = np.asarray(weights, dtype=float)
    spare = total - floor * len(w)
    if spare < 0:
        raise ValueError("total too small for the floor")
    raw = spare * w / w.sum()
    counts = np.floor(raw).astype(int)
    order = sorted(range(len(w)), key=lambda i: (-(raw[i] - counts[i]), i))
    for i in order[: spare - counts.sum()]:
        counts[i] += 1
    return [int(c) + floor for c in counts]


def _labels(counts: Mapping[str, Sequence[int]], rng: np.random.Generator) -> Dict[str, np.ndarray]:
    return {cat: rng.permutation(np.repeat(np.arange(len(counts[cat])), counts[cat])) for cat in CATEGORIES}


def table1_dataset(seed: int = 0) -> Dataset:
    """7001 text-only samples whose per-category label counts reproduce the corpus table."""
    rng = np.random.default_rng(seed)
    labels = _labels(TABLE1_COUNTS, rng)
    samples = tuple(
        Sample(f"t{i:05d}", "", None, {c: int(labels[c][i]) for c in CATEGORIES}) for i in range(7001)
    )
    return Dataset(samples, dict(FULL_SCHEMAS))


def _make_text(rng: np.random.Generator, sentiment: str, humour: int) -> str:
    words = list(rng.choice(_SENTIMENT_WORDS[sentiment], size=3))
    words += list(rng.choice(_FILLER, size=int(rng.integers(2, 5))))
    if humour > 0:
        words += list(rng.choice(_HUMOUR_WORDS, size=humour))
    rng.shuffle(words)
    text = " ".join(words)
    extra = rng.random()
    if extra < 0.15:
        text += " https://memes.example.com/x" + str(int(rng.integers(1000)))
    elif extra < 0.3:
        text = "@meme_lord " + text
    if rng.random() < 0.5:
        text = text.capitalize() + "!!"
    return text


def _make_image(rng: np.random.Generator, sentiment: str, size: int = 16) -> PixelGrid:
    palette = _PALETTE[sentiment]
    a = np.array(palette[int(rng.integers(len(palette)))], dtype=np.int64)
    if rng.random() < 0.5:
        return PixelGrid.solid(a, size, size)
    b = np.array(palette[int(rng.integers(len(palette)))], dtype=np.int64)
    yy, xx = np.indices((size, size))
    mask = ((yy // 4 + xx // 4) % 2).astype(bool)
    px = np.where(mask[..., None], a, b)
    return PixelGrid(px)


def _emotion_vector(rng: np.random.Generator, sentiment: str) -> np.ndarray:
    alpha = np.ones(len(EMOTIONS))
    alpha[EMOTIONS.index({"negative": "sad", "neutral": "neutral", "positive": "happy"}[sentiment])] += 4.0
    vec = rng.dirichlet(alpha)
    vec = np.round(vec, 6)
    top = int(np.argmax(vec))
    vec[top] = round(1.0 - (vec.sum() - vec[top]), 6)
    return vec


def write_dataset_csv(d: Dataset, path, image_names: Mapping[str, str] = None) -> None:
    image_names = image_names or {}
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for s in d.samples:
            w.writerow([s.id, image_names.get(s.id, ""), s.text] + [d.schemas[c].levels[s.labels[c]] for c in CATEGORIES])


def generate_fixtures(out_dir, n_samples: int = 40, seed: int = 0) -> Dict[str, Path]:
    """Write a small multimodal corpus plus everything needed to run the toolkit on it.

    Returns the paths written, keyed by role.
    """
    out = Path(out_dir)
    img_dir = out / "images"
    img_dir.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(seed)
    floor = 2 if n_samples >= 34 else 0
    labels = _labels({c: allocate(n_samples, TABLE1_COUNTS[c], floor) for c in CATEGORIES}, rng)

    samples, image_names, emotions = [], {}, {}
    for i in range(n_samples):
        sid = f"m{i:03d}"
        lab = {c: int(labels[c][i]) for c in CATEGORIES}
        sentiment = FULL_SCHEMAS["sentiment"].levels[lab["sentiment"]]
        text = _make_text(rng, sentiment, lab["humour"])
        if i % 10 != 9:  # every tenth meme has no image
            name = f"{sid}.png"
            save_png(_make_image(rng, sentiment), img_dir / name)
            image_names[sid] = name
        if i % 8 != 7:  # and every eighth has no emotion vector
            emotions[sid] = _emotion_vector(rng, sentiment)
        samples.append(Sample(sid, text, None, lab))
    d = Dataset(tuple(samples), dict(FULL_SCHEMAS))

    paths = {
        "corpus": out / "corpus.csv",
        "images": img_dir,
        "emotions": out / "emotions.csv",
        "ratings": out / "ratings.csv",
        "preds": out / "preds.csv",
    }
    write_dataset_csv(d, paths["corpus"], image_names)
    with open(paths["emotions"], "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(("id",) + EMOTIONS)
        for sid, vec in emotions.items():
            w.writerow([sid] + [f"{v:.6f}" for v in vec])

    # four noisy raters and a noisy "model" on the sentiment labels
    levels = FULL_SCHEMAS["sentiment"].levels
    gold = labels["sentiment"]
    with open(paths["ratings"], "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["item_id", "gold"] + [f"rater{j + 1}" for j in range(4)])
        for i, g in enumerate(gold):
            ratings = [g if rng.random() < 0.6 else int(rng.integers(len(levels))) for _ in range(4)]
            w.writerow([f"m{i:03d}", levels[g]] + [levels[r] for r in ratings])
    with open(paths["preds"], "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["item_id", "label"])
        for i, g in enumerate(gold):
            p = g if rng.random() < 0.5 else int(rng.integers(len(levels)))
            w.writerow([f"m{i:03d}", levels[p]])

    for name in ("synonyms.tsv", "pos_lexicon.tsv", "paraphrases.tsv"):
        paths[name.split(".")[0]] = out / name
        shutil.copyfile(bundled(name), out / name)
    return paths
