"""Pixel-statistics image features and precomputed facial-emotion vectors.

All feature math runs on :class:`PixelGrid`; decoding files is the loader's
job (Pillow).
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import Dict, Mapping, Optional, Tuple

import numpy as np

from .errors import DomainError, EmptyImage, MissingColumn, ValidationError

EMOTIONS = ("angry", "disgusted", "fearful", "happy", "neutral", "sad", "surprised")
IMAGE_NAMES = ("h_image", "s_image", "v_image", "rms_contrast", "colourfulness", "pleasure", "arousal", "dominance")
FEATURE_NAMES = IMAGE_NAMES + tuple(f"emo_{e}" for e in EMOTIONS)
UNIFORM_EMOTION = np.full(len(EMOTIONS), 1.0 / len(EMOTIONS))


@dataclass(frozen=True)
class PixelGrid:
    """RGB pixels as a ``(height, width, 3)`` uint8 array."""

    pixels: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.pixels)
        if arr.ndim != 3 or arr.shape[2] != 3:
            raise ValidationError(f"expected (height, width, 3) pixels, got shape {arr.shape}")
        if arr.size and (arr.min() < 0 or arr.max() > 255):
            raise ValidationError("channel values must lie in 0..255")
        arr = arr.astype(np.uint8)
        arr.setflags(write=False)
        object.__setattr__(self, "pixels", arr)

    @classmethod
    def from_rows(cls, width: int, height: int, pixels) -> "PixelGrid":
        """Build from a row-major sequence of ``width * height`` RGB triples."""
        flat = np.asarray(pixels, dtype=np.int64).reshape(-1, 3)
        if len(flat) != width * height:
            raise ValidationError(f"{len(flat)} pixels for a {width}x{height} grid")
        return cls(flat.reshape(height, width, 3))

    @classmethod
    def solid(cls, rgb, width: int = 8, height: int = 8) -> "PixelGrid":
        return cls(np.broadcast_to(np.asarray(rgb, dtype=np.uint8), (height, width, 3)).copy())

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    def flat(self) -> np.ndarray:
        """Pixels as an ``(n, 3)`` float array in the 0-255 scale."""
        if self.pixels.size == 0:
            raise EmptyImage("image has no pixels")
        return self.pixels.reshape(-1, 3).astype(float)


def load_image(path) -> PixelGrid:
    from PIL import Image

    with Image.open(path) as im:
        return PixelGrid(np.asarray(im.convert("RGB")))


def save_png(grid: PixelGrid, path) -> None:
    from PIL import Image

    Image.fromarray(np.ascontiguousarray(grid.pixels), mode="RGB").save(path, format="PNG")


def rgb_to_hsv(rgb: np.ndarray) -> np.ndarray:
    """Per-pixel HSV with every channel in [0, 1]; hue is 0 for achromatic pixels.

    ``rgb`` is ``(n, 3)`` in the 0-255 scale.
    """
    rgb = np.asarray(rgb, dtype=float) / 255.0
    r, g, b = rgb[:, 0], rgb[:, 1], rgb[:, 2]
    mx = rgb.max(axis=1)
    mn = rgb.min(axis=1)
    delta = mx - mn
    v = mx
    s = np.divide(delta, mx, out=np.zeros_like(mx), where=mx > 0)

    chroma = delta > 0
    safe = np.where(chroma, delta, 1.0)
    hr = ((g - b) / safe) % 6.0
    hg = (b - r) / safe + 2.0
    hb = (r - g) / safe + 4.0
    h = np.where(mx == r, hr, np.where(mx == g, hg, hb))
    h = np.where(chroma, h / 6.0, 0.0)
    # (x % 6) / 6 can round up to exactly 1.0 for tiny negative x
    h = np.where(h >= 1.0, 0.0, h)
    return np.stack([h, s, v], axis=1)


def hsv_means(p: PixelGrid) -> Tuple[float, float, float]:
    hsv = rgb_to_hsv(p.flat())
    h, s, v = hsv.mean(axis=0)
    return float(h), float(s), float(v)


def rms_contrast(p: PixelGrid) -> float:
    """Population standard deviation of the V channel."""
    v = p.flat().max(axis=1) / 255.0
    return float(np.std(v))


def colourfulness(p: PixelGrid) -> float:
    """Hasler-Suesstrunk opponent-channel colourfulness (0-255 channel scale)."""
    px = p.flat()
    r, g, b = px[:, 0], px[:, 1], px[:, 2]
    rg = r - g
    yb = 0.5 * (r + g) - b
    spread = np.sqrt(np.var(rg) + np.var(yb))
    magnitude = np.sqrt(np.mean(rg) ** 2 + np.mean(yb) ** 2)
    return float(spread + 0.3 * magnitude)


def pad_scores(saturation: float, value: float) -> Tuple[float, float, float]:
    """Pleasure, arousal, dominance as linear functions of brightness and saturation."""
    if not (0.0 <= saturation <= 1.0 and 0.0 <= value <= 1.0):
        raise DomainError(f"saturation and value must lie in [0, 1], got ({saturation}, {value})")
    pleasure = 0.69 * value + 0.22 * saturation
    arousal = -0.31 * value + 0.60 * saturation
    dominance = 0.76 * value + 0.32 * saturation
    return pleasure, arousal, dominance


def load_emotion_table(path) -> Dict[str, np.ndarray]:
    """Read ``id,angry,...,surprised``; each row must be a probability vector."""
    table = {}
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        missing = [c for c in ("id",) + EMOTIONS if c not in (reader.fieldnames or [])]
        if missing:
            raise MissingColumn(f"{path}: missing column(s) {', '.join(missing)}")
        for row_no, row in enumerate(reader, start=1):
            try:
                vec = np.array([float(row[e]) for e in EMOTIONS])
            except (TypeError, ValueError):
                raise ValidationError(f"{path}: row {row_no} has a non-numeric entry") from None
            if not np.all(np.isfinite(vec)) or vec.min() < 0:
                raise ValidationError(f"{path}: row {row_no} has a negative or non-finite entry")
            if abs(vec.sum() - 1.0) > 1e-6:
                raise ValidationError(f"{path}: row {row_no} sums to {vec.sum():.6f}, not 1")
            table[row["id"]] = vec
    return table


def attach_emotion(table: Mapping[str, np.ndarray], sample_id: str) -> np.ndarray:
    vec = table.get(sample_id)
    return UNIFORM_EMOTION.copy() if vec is None else np.array(vec, dtype=float)


def image_features(p: Optional[PixelGrid], emotion) -> np.ndarray:
    """``[H, S, V, rms_contrast, colourfulness, P, A, D, emotion x7]``; no image gives zeros
    in the first eight slots."""
    out = np.zeros(len(FEATURE_NAMES))
    if p is not None:
        h, s, v = hsv_means(p)
        out[:8] = (h, s, v, rms_contrast(p), colourfulness(p), *pad_scores(s, v))
    out[8:] = np.asarray(emotion, dtype=float)
    return out
