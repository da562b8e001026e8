"""L2-regularised multinomial logistic regression trained by full-batch gradient descent."""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from typing import List, Optional, Tuple

import numpy as np
import scipy.sparse as sp

from .errors import NonFiniteInput, NonFiniteLoss, ShapeMismatch, SingleClass, ValidationError

MAX_HALVINGS = 30


@dataclass
class TrainConfig:
    lam: float = 1.0
    learning_rate: float = 1.0
    max_iters: int = 500
    tol: float = 1e-6

    def __post_init__(self):
        if self.lam < 0:
            raise ValidationError(f"lambda must be >= 0, got {self.lam}")
        if self.learning_rate <= 0:
            raise ValidationError(f"learning_rate must be > 0, got {self.learning_rate}")
        if self.max_iters < 1:
            raise ValidationError(f"max_iters must be >= 1, got {self.max_iters}")
        if self.tol <= 0:
            raise ValidationError(f"tol must be > 0, got {self.tol}")


def _log_softmax(z: np.ndarray) -> np.ndarray:
    z = z - z.max(axis=1, keepdims=True)
    return z - np.log(np.exp(z).sum(axis=1, keepdims=True))


def _check_inputs(W, b, X, y, weights):
    n, d = X.shape
    if W.ndim != 2 or W.shape[1] != d or b.shape != (W.shape[0],):
        raise ShapeMismatch(f"W {W.shape} / b {b.shape} do not fit X with {d} columns")
    if y.shape != (n,) or weights.shape != (n,):
        raise ShapeMismatch("y and weights need one entry per row of X")
    data = X.data if sp.issparse(X) else X
    if not (np.all(np.isfinite(data)) and np.all(np.isfinite(W)) and np.all(np.isfinite(b))):
        raise NonFiniteInput("non-finite value in X, W or b")
    if np.any(weights < 0) or not np.all(np.isfinite(weights)):
        raise NonFiniteInput("sample weights must be finite and non-negative")
    if y.size and (y.min() < 0 or y.max() >= W.shape[0]):
        raise ShapeMismatch(f"labels must lie in 0..{W.shape[0] - 1}")


def loss_and_gradient(W, b, X, y, weights=None, lam: float = 0.0, check: bool = True):
    """Weighted mean cross-entropy plus ``lam / 2 * ||W||_F^2`` (bias unpenalised).

    Returns ``(loss, grad_W, grad_b)``.
    """
    W = np.asarray(W, dtype=float)
    b = np.asarray(b, dtype=float)
    if not sp.issparse(X):
        X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=np.int64)
    weights = np.ones(X.shape[0]) if weights is None else np.asarray(weights, dtype=float)
    if check:
        _check_inputs(W, b, X, y, weights)
    n = X.shape[0]
    wsum = weights.sum()
    if wsum <= 0:
        raise NonFiniteInput("sample weights sum to zero")

    logp = _log_softmax(np.asarray(X @ W.T) + b)
    rows = np.arange(n)
    loss = -np.dot(weights, logp[rows, y]) / wsum + 0.5 * lam * np.sum(W * W)

    # d loss / d logits = w_i (p_i - onehot_i) / sum(w)
    delta = np.exp(logp)
    delta[rows, y] -= 1.0
    delta *= (weights / wsum)[:, None]
    grad_W = np.asarray(X.T @ delta).T + lam * W
    grad_b = delta.sum(axis=0)
    return float(loss), grad_W, grad_b


@dataclass
class LRModel:
    W: np.ndarray
    b: np.ndarray
    config: TrainConfig = field(default_factory=TrainConfig)
    trace: List[float] = field(default_factory=list)

    @property
    def k(self) -> int:
        return self.W.shape[0]

    @property
    def d(self) -> int:
        return self.W.shape[1]

    @property
    def final_loss(self) -> float:
        return self.trace[-1] if self.trace else float("nan")

    def decision_function(self, X) -> np.ndarray:
        if X.shape[-1] != self.d:
            raise ShapeMismatch(f"expected {self.d} features, got {X.shape[-1]}")
        return np.asarray(X @ self.W.T) + self.b

    def to_dict(self) -> dict:
        return {
            "k": self.k,
            "d": self.d,
            "W": self.W.ravel().tolist(),
            "b": self.b.tolist(),
            "config": asdict(self.config),
            "final_loss": self.final_loss,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "LRModel":
        k, d = int(data["k"]), int(data["d"])
        W = np.asarray(data["W"], dtype=float).reshape(k, d)
        return cls(W, np.asarray(data["b"], dtype=float), TrainConfig(**data["config"]), [data["final_loss"]])

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


def predict_proba(model: LRModel, X) -> np.ndarray:
    """Softmax class probabilities; a 1-D input gives a 1-D output."""
    single = not sp.issparse(X) and np.ndim(X) == 1
    if single:
        X = np.asarray(X, dtype=float)[None, :]
    elif not sp.issparse(X):
        X = np.asarray(X, dtype=float)
    p = np.exp(_log_softmax(model.decision_function(X)))
    return p[0] if single else p


def predict(model: LRModel, X):
    """Arg-max class; ties resolve to the lowest index."""
    p = predict_proba(model, X)
    return np.argmax(p, axis=-1)


def fit(X, y, cfg: Optional[TrainConfig] = None, sample_weight=None, n_classes: Optional[int] = None) -> LRModel:
    """Gradient descent from zero with step halving on loss increase.

    Each iteration starts from ``cfg.learning_rate`` and halves the step (at
    most 30 times) until the loss does not increase. Training stops after
    ``max_iters`` accepted steps, when the relative loss change drops below
    ``tol``, or when no halving gives a non-increasing loss.
    """
    cfg = cfg or TrainConfig()
    if not sp.issparse(X):
        X = np.asarray(X, dtype=float)
        if X.ndim != 2:
            raise ShapeMismatch("X must be 2-D")
    y = np.asarray(y, dtype=np.int64)
    n, d = X.shape
    if d < 1:
        raise ShapeMismatch("X has no feature columns")
    k = int(n_classes) if n_classes is not None else int(y.max()) + 1
    if np.unique(y).size < 2:
        raise SingleClass("training labels contain fewer than two classes")
    weights = np.ones(n) if sample_weight is None else np.asarray(sample_weight, dtype=float)

    W = np.zeros((k, d))
    b = np.zeros(k)
    loss, gW, gb = loss_and_gradient(W, b, X, y, weights, cfg.lam)
    trace = [loss]
    for _ in range(cfg.max_iters):
        step = cfg.learning_rate
        for _ in range(MAX_HALVINGS + 1):
            W_new = W - step * gW
            b_new = b - step * gb
            new_loss, new_gW, new_gb = loss_and_gradient(W_new, b_new, X, y, weights, cfg.lam, check=False)
            if math.isfinite(new_loss) and new_loss <= loss:
                break
            step *= 0.5
        else:
            break
        if not math.isfinite(new_loss):
            raise NonFiniteLoss("loss became non-finite")
        rel = (loss - new_loss) / max(abs(loss), 1e-300)
        W, b, gW, gb, loss = W_new, b_new, new_gW, new_gb, new_loss
        trace.append(loss)
        if rel < cfg.tol:
            break
    if not math.isfinite(loss):
        raise NonFiniteLoss("loss is non-finite")
    return LRModel(W, b, cfg, trace)
