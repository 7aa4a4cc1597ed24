"""Logistic regression trained by full-batch gradient descent, plus the
black-box predictor contract used by the explainer.

Any object with predict_proba(rows) -> probabilities and a threshold
satisfies the contract; LogisticModel and SubprocessModel both do.
"""

from __future__ import annotations

import json
import subprocess
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import (
    ConfigError,
    DegenerateTrainingError,
    DimensionError,
    InvalidArgumentError,
    InvalidInputError,
)


def sigmoid(z):
    z = np.asarray(z, dtype=float)
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


@dataclass(frozen=True)
class TrainingConfig:
    learning_rate: float = 0.1
    epochs: int = 1000
    l2_penalty: float = 1e-4
    convergence_tol: float = 1e-7
    seed: int = 0  # kept for the record; zero-init makes training seed-free

    def __post_init__(self):
        if self.learning_rate <= 0:
            raise InvalidArgumentError("learning_rate must be positive")
        if self.epochs < 1:
            raise InvalidArgumentError("epochs must be >= 1")
        if self.l2_penalty < 0:
            raise InvalidArgumentError("l2_penalty must be >= 0")

    def to_dict(self) -> dict:
        return {
            "learning_rate": self.learning_rate,
            "epochs": self.epochs,
            "l2_penalty": self.l2_penalty,
            "convergence_tol": self.convergence_tol,
            "seed": self.seed,
        }


@dataclass
class LogisticModel:
    weights: np.ndarray
    bias: float
    threshold: float = 0.5
    training: TrainingConfig | None = None
    epochs_run: int = 0
    final_loss: float = float("nan")

    def __post_init__(self):
        self.weights = np.asarray(self.weights, dtype=float)
        if not 0.0 < self.threshold < 1.0:
            raise InvalidArgumentError(f"threshold must be in (0,1), got {self.threshold}")

    @property
    def d(self) -> int:
        return self.weights.shape[0]

    def _check(self, rows: np.ndarray) -> np.ndarray:
        rows = np.asarray(rows, dtype=float)
        if rows.ndim == 1:
            if rows.shape[0] != self.d:
                raise DimensionError(f"row has dimension {rows.shape[0]}, model expects {self.d}")
        elif rows.ndim == 2:
            if rows.shape[1] != self.d:
                raise DimensionError(f"rows have dimension {rows.shape[1]}, model expects {self.d}")
        else:
            raise DimensionError(f"expected 1-D or 2-D input, got shape {rows.shape}")
        return rows

    def predict_proba(self, rows):
        rows = self._check(rows)
        return sigmoid(rows @ self.weights + self.bias)

    def predict(self, rows):
        return (self.predict_proba(rows) >= self.threshold).astype(np.int8)

    def to_dict(self, column_fingerprint: str | None = None) -> dict:
        doc = {
            "weights": [float(w) for w in self.weights],
            "bias": float(self.bias),
            "threshold": float(self.threshold),
        }
        if column_fingerprint is not None:
            doc["column_fingerprint"] = column_fingerprint
        return doc

    @classmethod
    def from_dict(cls, doc: dict) -> "LogisticModel":
        try:
            return cls(
                weights=np.asarray(doc["weights"], dtype=float),
                bias=float(doc["bias"]),
                threshold=float(doc.get("threshold", 0.5)),
            )
        except (KeyError, TypeError, ValueError) as e:
            raise ConfigError(f"malformed model document: {e}") from e


def loss_and_gradient(weights: np.ndarray, bias: float, X: np.ndarray, y: np.ndarray,
                      l2: float):
    """Mean binary cross-entropy with an L2 penalty on the weights (not the bias).

    Returns (loss, grad_weights, grad_bias).
    """
    n = X.shape[0]
    z = X @ weights + bias
    p = sigmoid(z)
    # log-loss written via log1p(exp(-|z|)) for stability
    log_p = -np.logaddexp(0.0, -z)
    log_1mp = -np.logaddexp(0.0, z)
    loss = -(y @ log_p + (1 - y) @ log_1mp) / n + 0.5 * l2 * float(weights @ weights)
    resid = p - y
    grad_w = X.T @ resid / n + l2 * weights
    grad_b = float(resid.mean())
    return float(loss), grad_w, grad_b


def train_logistic(train_matrix, train_labels, config: TrainingConfig | None = None,
                   threshold: float = 0.5) -> LogisticModel:
    """Full-batch gradient descent from zero-initialized parameters.

    Stops after config.epochs or when the loss improves by less than
    config.convergence_tol between consecutive epochs.
    """
    cfg = config or TrainingConfig()
    X = np.asarray(train_matrix, dtype=float)
    y = np.asarray(train_labels, dtype=float)
    if X.ndim != 2 or X.shape[0] == 0:
        raise InvalidInputError(f"train matrix must be non-empty 2-D, got shape {X.shape}")
    if y.shape != (X.shape[0],):
        raise DimensionError(f"labels shape {y.shape} does not match {X.shape[0]} rows")
    if not np.isfinite(X).all():
        raise InvalidInputError("train matrix contains NaN or infinite values")
    classes = np.unique(y)
    if not np.isin(classes, (0.0, 1.0)).all():
        raise InvalidInputError(f"labels must be binary 0/1, got values {classes}")
    if classes.shape[0] < 2:
        raise DegenerateTrainingError(f"training labels contain a single class ({int(classes[0])})")

    w = np.zeros(X.shape[1])
    b = 0.0
    prev_loss = float("inf")
    epochs_run = 0
    for epoch in range(cfg.epochs):
        loss, gw, gb = loss_and_gradient(w, b, X, y, cfg.l2_penalty)
        if prev_loss - loss < cfg.convergence_tol:
            break
        w = w - cfg.learning_rate * gw
        b = b - cfg.learning_rate * gb
        prev_loss = loss
        epochs_run = epoch + 1
    else:
        loss, _, _ = loss_and_gradient(w, b, X, y, cfg.l2_penalty)
    return LogisticModel(weights=w, bias=b, threshold=threshold, training=cfg,
                         epochs_run=epochs_run, final_loss=loss)


def gradient_check(model: LogisticModel, rows, labels, step: float = 1e-6,
                   l2: float | None = None) -> float:
    """Max relative deviation between the analytic gradient and central
    finite differences of the training loss at the model's parameters.

    Relative deviation for one coordinate is |analytic - numeric| divided by
    max(|analytic|, |numeric|, 1e-8). Under heavy sigmoid saturation
    (|logit| > 30) finite differences lose precision and deviations up to
    about 1e-3 are expected; see the tests for the measured behavior.
    """
    X = np.asarray(rows, dtype=float)
    if X.ndim == 1:
        X = X[None, :]
    y = np.asarray(labels, dtype=float)
    if l2 is None:
        l2 = model.training.l2_penalty if model.training else 0.0

    def loss_at(w, b):
        val, _, _ = loss_and_gradient(w, b, X, y, l2)
        return val

    _, grad_w, grad_b = loss_and_gradient(model.weights, model.bias, X, y, l2)
    analytic = np.append(grad_w, grad_b)
    numeric = np.empty_like(analytic)
    for i in range(model.d):
        w_hi = model.weights.copy(); w_hi[i] += step
        w_lo = model.weights.copy(); w_lo[i] -= step
        numeric[i] = (loss_at(w_hi, model.bias) - loss_at(w_lo, model.bias)) / (2 * step)
    numeric[-1] = (loss_at(model.weights, model.bias + step)
                   - loss_at(model.weights, model.bias - step)) / (2 * step)

    denom = np.maximum(np.maximum(np.abs(analytic), np.abs(numeric)), 1e-8)
    return float(np.max(np.abs(analytic - numeric) / denom))


def save_model(model: LogisticModel, path: str | Path, column_fingerprint: str | None = None) -> None:
    with open(path, "w", encoding="utf-8") as f:
        json.dump(model.to_dict(column_fingerprint), f, indent=2)
        f.write("\n")


def load_model(path: str | Path) -> LogisticModel:
    p = Path(path)
    if not p.exists():
        raise ConfigError(f"model file not found: {p}")
    with open(p, encoding="utf-8") as f:
        return LogisticModel.from_dict(json.load(f))


class SubprocessModel:
    """Adapter for out-of-process predictors.

    Protocol: the command reads newline-delimited JSON arrays (one encoded
    row per line) on stdin and writes one probability per line on stdout.
    The subprocess is spawned per predict_proba call, so audited models need
    not be written in Python or loaded in-process.
    """

    def __init__(self, command: list[str], threshold: float = 0.5, d: int | None = None):
        if not command:
            raise InvalidArgumentError("subprocess model needs a non-empty command")
        self.command = list(command)
        self.threshold = threshold
        self.d = d

    def predict_proba(self, rows):
        rows = np.asarray(rows, dtype=float)
        squeeze = rows.ndim == 1
        if squeeze:
            rows = rows[None, :]
        if self.d is not None and rows.shape[1] != self.d:
            raise DimensionError(f"rows have dimension {rows.shape[1]}, adapter expects {self.d}")
        payload = "\n".join(json.dumps([float(v) for v in r]) for r in rows) + "\n"
        proc = subprocess.run(self.command, input=payload, capture_output=True,
                              text=True, check=True)
        lines = [ln for ln in proc.stdout.splitlines() if ln.strip()]
        if len(lines) != rows.shape[0]:
            raise InvalidInputError(
                f"adapter returned {len(lines)} probabilities for {rows.shape[0]} rows"
            )
        probs = np.array([float(ln) for ln in lines])
        if ((probs < 0) | (probs > 1)).any():
            raise InvalidInputError("adapter returned probabilities outside [0,1]")
        return probs[0] if squeeze else probs

    def predict(self, rows):
        return (self.predict_proba(rows) >= self.threshold).astype(np.int8)
