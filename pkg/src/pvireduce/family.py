"""Hashed character n-gram softmax classifier: the built-in predictive family.

Deterministic end to end: feature hashing uses CRC32 with fixed field salts,
training is plain mini-batch gradient descent with a seeded shuffle, and the
whole pipeline runs in float64 on a single thread.
"""

from __future__ import annotations

import json
import math
import time
import zlib
from dataclasses import dataclass, field, replace

import numpy as np
import scipy.sparse as sp

from .corpus import Dataset

_FIELD_SALTS = {"premise": b"p\x00", "hypothesis": b"h\x00"}


@dataclass(frozen=True)
class Hyperparams:
    hash_bits: int = 16
    ngram_orders: tuple[int, ...] = (1, 2, 3)
    learning_rate: float = 0.05
    epochs: int = 16
    batch_size: int = 32
    l2: float = 1e-6
    seed: int = 1
    prob_floor: float = 1e-12
    preserve_order: bool = False
    lr_schedule: str = "linear"  # "linear" decay to 0 over all steps, or "constant"

    def __post_init__(self):
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be > 0")
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")
        if not 0.0 < self.prob_floor < 1.0:
            raise ValueError("prob_floor must be in (0,1)")
        if self.lr_schedule not in ("linear", "constant"):
            raise ValueError(f"unknown lr_schedule {self.lr_schedule!r}")

    @property
    def dim(self) -> int:
        return 1 << self.hash_bits


@dataclass(frozen=True)
class Model:
    weights: np.ndarray  # (C, 2**hash_bits)
    bias: np.ndarray     # (C,)
    num_classes: int
    hyperparams: Hyperparams
    trained_on: str = ""
    epoch_losses: tuple[float, ...] = ()


@dataclass(frozen=True)
class EvalReport:
    accuracy: float
    precision_micro: float
    recall_micro: float
    f1_micro: float
    per_class_counts: tuple[tuple[int, int, int], ...]  # (tp, fp, fn) per class


# ---------------------------------------------------------------------------
# featurization

def _hash_bucket(salt: bytes, gram: str, mask: int) -> int:
    return zlib.crc32(salt + gram.encode("utf-8")) & mask


def featurize(premise: str, hypothesis: str, hash_bits: int = 16,
              ngram_orders=(1, 2, 3)) -> dict[int, float]:
    """Sparse count vector of hashed character n-grams of both fields.

    Premise and hypothesis n-grams are salted differently so the same
    substring lands in different buckets per field. Empty texts yield the
    empty vector.
    """
    mask = (1 << hash_bits) - 1
    out: dict[int, float] = {}
    for text, salt in ((premise, _FIELD_SALTS["premise"]),
                       (hypothesis, _FIELD_SALTS["hypothesis"])):
        for order in ngram_orders:
            for i in range(len(text) - order + 1):
                bucket = _hash_bucket(salt, text[i:i + order], mask)
                out[bucket] = out.get(bucket, 0.0) + 1.0
    return out


def feature_matrix(dataset: Dataset, hp: Hyperparams) -> sp.csr_matrix:
    """CSR matrix of featurize() applied to every instance, in dataset order."""
    indptr = [0]
    indices: list[int] = []
    data: list[float] = []
    for inst in dataset:
        vec = featurize(inst.premise, inst.hypothesis, hp.hash_bits, hp.ngram_orders)
        for bucket in sorted(vec):
            indices.append(bucket)
            data.append(vec[bucket])
        indptr.append(len(indices))
    return sp.csr_matrix(
        (np.array(data, dtype=np.float64), np.array(indices, dtype=np.int64),
         np.array(indptr, dtype=np.int64)),
        shape=(len(dataset), hp.dim))


# ---------------------------------------------------------------------------
# loss / training

def _softmax(logits: np.ndarray) -> np.ndarray:
    z = logits - logits.max(axis=-1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=-1, keepdims=True)


def loss_and_grad(weights: np.ndarray, bias: np.ndarray, X: sp.csr_matrix,
                  y: np.ndarray, l2: float = 0.0):
    """Mean cross-entropy (plus optional L2 on weights) and its gradient."""
    n = X.shape[0]
    probs = _softmax(X @ weights.T + bias)
    p_true = probs[np.arange(n), y]
    loss = -np.mean(np.log(np.clip(p_true, 1e-300, None)))
    loss += 0.5 * l2 * float(np.sum(weights * weights))
    delta = probs.copy()
    delta[np.arange(n), y] -= 1.0
    delta /= n
    grad_w = np.asarray(X.T @ delta).T + l2 * weights
    grad_b = delta.sum(axis=0)
    return loss, grad_w, grad_b


def train(dataset: Dataset, hp: Hyperparams, features: sp.csr_matrix | None = None) -> Model:
    """Mini-batch gradient descent on mean cross-entropy.

    Batches are drawn from a fresh seeded shuffle each epoch, unless
    hp.preserve_order is set, in which case the dataset's given order is
    consumed as-is (curriculum training relies on this).
    """
    m = len(dataset)
    if m == 0:
        raise ValueError("cannot train on an empty dataset")
    X = feature_matrix(dataset, hp) if features is None else features
    y = dataset.labels()
    C = dataset.num_classes
    W = np.zeros((C, hp.dim))
    b = np.zeros(C)
    rng = np.random.default_rng(hp.seed)
    epoch_losses = []
    batches_per_epoch = (m + hp.batch_size - 1) // hp.batch_size
    total_steps = hp.epochs * batches_per_epoch
    step = 0
    for _ in range(hp.epochs):
        order = np.arange(m) if hp.preserve_order else rng.permutation(m)
        total = 0.0
        for start in range(0, m, hp.batch_size):
            idx = order[start:start + hp.batch_size]
            loss, gw, gb = loss_and_grad(W, b, X[idx], y[idx], hp.l2)
            if hp.lr_schedule == "linear":
                lr = hp.learning_rate * (1.0 - step / total_steps)
            else:
                lr = hp.learning_rate
            W -= lr * gw
            b -= lr * gb
            total += loss * len(idx)
            step += 1
        epoch_losses.append(total / m)
    return Model(W, b, C, hp, dataset.provenance_tag, tuple(epoch_losses))


def training_order(m: int, hp: Hyperparams):
    """Instance order consumed per epoch by train() for a size-m dataset."""
    rng = np.random.default_rng(hp.seed)
    return [np.arange(m) if hp.preserve_order else rng.permutation(m)
            for _ in range(hp.epochs)]


# ---------------------------------------------------------------------------
# prediction / evaluation

def predict_dist_matrix(model: Model, X: sp.csr_matrix) -> np.ndarray:
    return _softmax(X @ model.weights.T + model.bias)


def predict_dist(model: Model, premise: str, hypothesis: str) -> np.ndarray:
    hp = model.hyperparams
    vec = featurize(premise, hypothesis, hp.hash_bits, hp.ngram_orders)
    logits = model.bias.copy()
    for bucket, weight in vec.items():
        logits += weight * model.weights[:, bucket]
    return _softmax(logits)


def log2_prob(model: Model, premise: str, hypothesis: str, label: int) -> float:
    """log2 of the model's probability of the gold label, floored at prob_floor."""
    if not 0 <= label < model.num_classes:
        raise ValueError(f"label {label} out of range")
    p = predict_dist(model, premise, hypothesis)[label]
    return math.log2(max(float(p), model.hyperparams.prob_floor))


def constant_predictor(dist, hp: Hyperparams | None = None) -> Model:
    """Family member that outputs `dist` for every input, null input included.

    Witnesses the closure property of the family: any reachable output
    distribution is realized by a constant member (zero weights, log-dist bias).
    """
    hp = hp or Hyperparams()
    dist = np.asarray(dist, dtype=np.float64)
    if np.any(dist <= 0):
        raise ValueError("distribution entries must be > 0")
    if abs(float(dist.sum()) - 1.0) > 1e-9:
        raise ValueError(f"distribution must sum to 1, got {dist.sum()}")
    C = dist.shape[0]
    return Model(np.zeros((C, hp.dim)), np.log(dist), C, hp, "constant")


def evaluate(model: Model, dataset: Dataset, features: sp.csr_matrix | None = None) -> EvalReport:
    """Accuracy and micro-averaged P/R/F1; argmax ties break to the lowest class."""
    if len(dataset) == 0:
        raise ValueError("cannot evaluate on an empty dataset")
    X = feature_matrix(dataset, model.hyperparams) if features is None else features
    probs = predict_dist_matrix(model, X)
    preds = probs.argmax(axis=1)
    y = dataset.labels()
    counts = []
    tp_total = fp_total = fn_total = 0
    for c in range(model.num_classes):
        tp = int(np.sum((preds == c) & (y == c)))
        fp = int(np.sum((preds == c) & (y != c)))
        fn = int(np.sum((preds != c) & (y == c)))
        counts.append((tp, fp, fn))
        tp_total += tp
        fp_total += fp
        fn_total += fn
    precision = tp_total / (tp_total + fp_total) if tp_total + fp_total else 0.0
    recall = tp_total / (tp_total + fn_total) if tp_total + fn_total else 0.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
    accuracy = float(np.mean(preds == y))
    return EvalReport(accuracy, precision, recall, f1, tuple(counts))


# ---------------------------------------------------------------------------
# serialization

_FORMAT_VERSION = 1


def _f17(x: float) -> str:
    return format(float(x), ".17g")


def save_model(model: Model, path) -> None:
    """Versioned JSON dump; floats at 17 significant digits round-trip exactly."""
    hp = model.hyperparams
    nz = np.nonzero(model.weights)
    payload = {
        "format_version": _FORMAT_VERSION,
        "hash_bits": hp.hash_bits,
        "ngram_orders": list(hp.ngram_orders),
        "num_classes": model.num_classes,
        "prob_floor": _f17(hp.prob_floor),
        "trained_on": model.trained_on,
        "bias": [_f17(v) for v in model.bias],
        "weights": [[int(c), int(j), _f17(model.weights[c, j])]
                    for c, j in zip(*nz)],
        "epoch_losses": [_f17(v) for v in model.epoch_losses],
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh)


def load_model(path) -> Model:
    with open(path, encoding="utf-8") as fh:
        payload = json.load(fh)
    if payload.get("format_version") != _FORMAT_VERSION:
        raise ValueError(f"unsupported model format version {payload.get('format_version')}")
    hp = Hyperparams(hash_bits=payload["hash_bits"],
                     ngram_orders=tuple(payload["ngram_orders"]),
                     prob_floor=float(payload["prob_floor"]))
    C = payload["num_classes"]
    W = np.zeros((C, hp.dim))
    for c, j, v in payload["weights"]:
        W[c, j] = float(v)
    bias = np.array([float(v) for v in payload["bias"]])
    losses = tuple(float(v) for v in payload["epoch_losses"])
    return Model(W, bias, C, hp, payload.get("trained_on", ""), losses)
