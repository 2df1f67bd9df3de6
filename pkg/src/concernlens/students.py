"""Lightweight student classifiers distilled from teacher labels.

A student is a bank of independent per-label linear heads over hashed
n-gram features: scores = sigmoid(W x + b), one decision threshold per
label. Training minimizes binary cross-entropy with an optional positive
weight per class to counter label imbalance; the weight is a function of
the negative:positive count ratio (clamped or log-scaled variants).
"""

from __future__ import annotations

import hashlib
import json
import re
from dataclasses import dataclass, field, replace
from importlib import resources
from typing import Sequence

import numpy as np
from scipy import sparse
from scipy.special import expit

from .errors import (
    AlignmentError,
    IntegrityError,
    ModelFormatError,
    TrainingDivergedError,
    VersionMismatchError,
)
from .features import FeaturizerConfig, featurize_all

MODEL_FORMAT_VERSION = 1

CLAMP_RE = re.compile(r"^clamp\(?([0-9]+(?:\.[0-9]+)?)\)?$")


@dataclass(frozen=True)
class WeightingScheme:
    """Positive-class loss weighting derived from the neg/pos count ratio."""

    kind: str  # "baseline" | "clamp" | "no_clamp" | "log1p"
    k: float | None = None

    def __post_init__(self) -> None:
        if self.kind not in ("baseline", "clamp", "no_clamp", "log1p"):
            raise ValueError(f"unknown weighting scheme {self.kind!r}")
        if self.kind == "clamp":
            if self.k is None or self.k <= 0:
                raise ValueError("clamp requires k > 0")
        elif self.k is not None:
            raise ValueError(f"scheme {self.kind!r} takes no k")

    @classmethod
    def parse(cls, name: str) -> "WeightingScheme":
        name = name.strip().lower()
        if name in ("baseline", "no_clamp", "log1p"):
            return cls(kind=name)
        m = CLAMP_RE.match(name) or re.match(r"^clamp[_ ]?([0-9.]+)$", name)
        if m:
            return cls(kind="clamp", k=float(m.group(1)))
        raise ValueError(f"cannot parse weighting scheme {name!r}")

    def __str__(self) -> str:
        return f"clamp({self.k:g})" if self.kind == "clamp" else self.kind


def class_weights(
    pos_counts: Sequence[int],
    neg_counts: Sequence[int],
    scheme: WeightingScheme,
) -> tuple[np.ndarray, np.ndarray]:
    """Per-label positive weights plus a degenerate-class flag array.

    Raw ratio w = neg/pos. baseline -> 1; clamp(k) -> min(w, k) (clamps
    above only); no_clamp -> w; log1p -> ln(1 + w). Labels with zero
    positives get weight 1 and are flagged.
    """
    pos = np.asarray(pos_counts, dtype=np.float64)
    neg = np.asarray(neg_counts, dtype=np.float64)
    if pos.shape != neg.shape:
        raise AlignmentError("pos_counts and neg_counts lengths differ")
    if (pos < 0).any() or (neg < 0).any():
        raise ValueError("counts must be >= 0")
    degenerate = pos == 0
    safe_pos = np.where(degenerate, 1.0, pos)
    raw = neg / safe_pos
    if scheme.kind == "baseline":
        weights = np.ones_like(raw)
    elif scheme.kind == "clamp":
        weights = np.minimum(raw, scheme.k)
    elif scheme.kind == "no_clamp":
        weights = raw
    else:  # log1p
        weights = np.log1p(raw)
    weights = np.where(degenerate, 1.0, weights)
    return weights, degenerate


def weighted_bce_loss_grad(
    W: np.ndarray,
    b: np.ndarray,
    X,
    Y: np.ndarray,
    pos_weights: np.ndarray,
    l2: float = 0.0,
) -> tuple[float, np.ndarray, np.ndarray]:
    """Loss and analytic gradients of the weighted BCE objective.

    L = -sum_samples sum_c [ w_c * y * log sigmoid(s) +
                             (1 - y) * log(1 - sigmoid(s)) ] + l2 * ||W||^2
    with s = X W^T + b. Summed (not averaged) over samples, so finite
    differences of this exact function match the returned gradients.
    """
    S = X @ W.T + b  # [n, L]
    if sparse.issparse(S):  # pragma: no cover - X dense keeps S dense
        S = np.asarray(S.todense())
    P = expit(S)
    log_sig = -np.logaddexp(0.0, -S)
    log_one_minus = -np.logaddexp(0.0, S)
    with np.errstate(over="ignore"):  # inf loss is caught by the caller
        loss = -(pos_weights * Y * log_sig + (1.0 - Y) * log_one_minus).sum()
        loss += l2 * float((W * W).sum())
    G = (1.0 - Y) * P - pos_weights * Y * (1.0 - P)  # dL/dS
    if sparse.issparse(X):
        grad_W = np.asarray((X.T @ G).T) + 2.0 * l2 * W
    else:
        grad_W = G.T @ X + 2.0 * l2 * W
    grad_b = G.sum(axis=0)
    return float(loss), grad_W, grad_b


@dataclass(frozen=True)
class StudentModel:
    featurizer: FeaturizerConfig
    weights: np.ndarray  # [num_labels, hash_dims]
    biases: np.ndarray  # [num_labels]
    thresholds: np.ndarray  # [num_labels], each in (0, 1)
    taxonomy_version: str
    training_meta: dict = field(default_factory=dict)
    threshold_flags: tuple[bool, ...] = ()
    idf_weights: np.ndarray | None = None

    @property
    def num_labels(self) -> int:
        return self.weights.shape[0]

    def __post_init__(self) -> None:
        if self.weights.ndim != 2:
            raise ModelFormatError("weights must be 2-D")
        n_labels, dims = self.weights.shape
        if dims != self.featurizer.hash_dims:
            raise ModelFormatError("weights width does not match hash_dims")
        if self.biases.shape != (n_labels,) or self.thresholds.shape != (n_labels,):
            raise ModelFormatError("biases/thresholds misaligned with weights")
        if not np.isfinite(self.weights).all() or not np.isfinite(self.biases).all():
            raise ModelFormatError("model parameters contain NaN/Inf")
        if ((self.thresholds <= 0) | (self.thresholds >= 1)).any():
            raise ModelFormatError("thresholds must lie strictly inside (0, 1)")


def train(
    X,
    Y: np.ndarray,
    scheme: WeightingScheme,
    *,
    featurizer: FeaturizerConfig,
    taxonomy_version: str,
    lr: float = 0.1,
    epochs: int = 10,
    batch_size: int = 64,
    seed: int = 0,
    l2: float = 1e-6,
    idf_weights: np.ndarray | None = None,
) -> StudentModel:
    """Mini-batch gradient descent on the weighted BCE objective.

    Deterministic for a fixed seed: epoch shuffles come from a dedicated
    Generator and all math is float64. Updates use the batch-mean data
    gradient (the objective's sum gradient scaled by 1/batch) so the
    learning rate is insensitive to batch size.
    """
    Y = np.asarray(Y, dtype=np.float64)
    if Y.ndim == 1:
        Y = Y.reshape(-1, 1)
    n, num_labels = Y.shape
    if n == 0:
        raise ValueError("empty training set")
    if X.shape[0] != n:
        raise AlignmentError("features and labels have different sample counts")

    pos_counts = Y.sum(axis=0).astype(np.int64)
    neg_counts = (n - pos_counts).astype(np.int64)
    pos_weights, degenerate = class_weights(pos_counts, neg_counts, scheme)
    all_positive = pos_counts == n
    one_class = degenerate | all_positive

    rng = np.random.default_rng(seed)
    W = np.zeros((num_labels, X.shape[1]), dtype=np.float64)
    b = np.zeros(num_labels, dtype=np.float64)

    for epoch in range(epochs):
        order = rng.permutation(n)
        for lo in range(0, n, batch_size):
            idx = order[lo : lo + batch_size]
            Xb = X[idx]
            Yb = Y[idx]
            loss, grad_W, grad_b = weighted_bce_loss_grad(W, b, Xb, Yb, pos_weights, l2=0.0)
            if not np.isfinite(loss):
                raise TrainingDivergedError(
                    f"non-finite loss at epoch {epoch}, batch offset {lo} "
                    f"(lr={lr}, batch={batch_size}); lower the learning rate"
                )
            m = len(idx)
            W -= lr * (grad_W / m + 2.0 * l2 * W)
            b -= lr * (grad_b / m)

    meta = {
        "scheme": str(scheme),
        "epochs": epochs,
        "lr": lr,
        "batch_size": batch_size,
        "seed": seed,
        "l2": l2,
        "samples": n,
        "pos_counts": pos_counts.tolist(),
        "one_class_labels": [int(i) for i in np.flatnonzero(one_class)],
    }
    return StudentModel(
        featurizer=featurizer,
        weights=W,
        biases=b,
        thresholds=np.full(num_labels, 0.5),
        taxonomy_version=taxonomy_version,
        training_meta=meta,
        threshold_flags=(False,) * num_labels,
        idf_weights=idf_weights,
    )


def train_on_texts(
    texts: Sequence[str],
    Y: np.ndarray,
    scheme: WeightingScheme,
    *,
    featurizer: FeaturizerConfig,
    taxonomy_version: str,
    **hyper,
) -> StudentModel:
    X = featurize_all(texts, featurizer)
    return train(
        X, Y, scheme, featurizer=featurizer, taxonomy_version=taxonomy_version, **hyper
    )


def predict_scores(model: StudentModel, texts: Sequence[str]) -> np.ndarray:
    """Sigmoid scores, [n, num_labels]. Empty text scores sigmoid(bias)."""
    X = featurize_all(texts, model.featurizer, idf_weights=model.idf_weights)
    S = X @ model.weights.T + model.biases
    return expit(np.asarray(S))


def predict_batch(
    model: StudentModel, texts: Sequence[str], taxonomy_version: str | None = None
) -> tuple[np.ndarray, np.ndarray]:
    """Scores and thresholded binary labels for a batch of texts."""
    if taxonomy_version is not None and taxonomy_version != model.taxonomy_version:
        raise VersionMismatchError(
            f"model was built for taxonomy {model.taxonomy_version!r}, "
            f"active taxonomy is {taxonomy_version!r}"
        )
    scores = predict_scores(model, texts)
    labels = (scores >= model.thresholds).astype(np.int64)
    return scores, labels


def predict(
    model: StudentModel, text: str, taxonomy_version: str | None = None
) -> tuple[np.ndarray, np.ndarray]:
    scores, labels = predict_batch(model, [text], taxonomy_version)
    return scores[0], labels[0]


def _f1_from_counts(tp: int, fp: int, fn: int) -> float:
    denom = 2 * tp + fp + fn
    return 2 * tp / denom if denom else 0.0


def select_thresholds(
    model: StudentModel, texts: Sequence[str], gold: np.ndarray
) -> StudentModel:
    """Tune each label's threshold to maximize F1 on a validation set.

    Candidates are the distinct predicted probabilities plus 0.5; a label is
    predicted positive when score >= threshold. Ties resolve to the lowest
    threshold (favoring recall). Labels without validation positives keep
    0.5 and are flagged.
    """
    gold = np.asarray(gold, dtype=np.int64)
    if gold.ndim == 1:
        gold = gold.reshape(-1, 1)
    if len(texts) == 0:
        raise ValueError("validation set is empty")
    if gold.shape != (len(texts), model.num_labels):
        raise AlignmentError("validation labels misaligned with model")
    scores = predict_scores(model, texts)
    thresholds = model.thresholds.copy()
    flags = list(model.threshold_flags or (False,) * model.num_labels)
    for c in range(model.num_labels):
        y = gold[:, c]
        if y.sum() == 0:
            thresholds[c] = 0.5
            flags[c] = True
            continue
        p = scores[:, c]
        candidates = np.unique(np.append(p, 0.5))
        best_f1, best_t = -1.0, 0.5
        for t in candidates:  # ascending, so ties keep the lowest t
            pred = p >= t
            tp = int((pred & (y == 1)).sum())
            fp = int((pred & (y == 0)).sum())
            fn = int((~pred & (y == 1)).sum())
            f1 = _f1_from_counts(tp, fp, fn)
            if f1 > best_f1:
                best_f1, best_t = f1, float(t)
        thresholds[c] = best_t
        flags[c] = False
    return replace(model, thresholds=thresholds, threshold_flags=tuple(flags))


# --- keyword baseline ---------------------------------------------------------

def keyword_relevance(text: str, keyword_list: Sequence[str]) -> bool:
    """True iff any keyword stem occurs starting at a word boundary.

    Stems match prefixes ("vaccin" hits "vaccination"), which is the whole
    point of the baseline; it cannot see vaccine-related text that avoids
    its keywords.
    """
    if not keyword_list:
        raise ValueError("keyword_list must be non-empty")
    for kw in keyword_list:
        if not kw or kw != kw.lower():
            raise ValueError(f"keywords must be non-empty lowercase, got {kw!r}")
    pattern = r"\b(?:" + "|".join(re.escape(k) for k in keyword_list) + r")"
    return re.search(pattern, text, flags=re.IGNORECASE) is not None


def default_vaccine_keywords() -> list[str]:
    text = resources.files("concernlens.data").joinpath("vaccine_keywords.txt").read_text("utf-8")
    return [line.strip() for line in text.splitlines() if line.strip()]


# --- serialization ------------------------------------------------------------

def save_model(model: StudentModel) -> bytes:
    """Binary container: one JSON header line, then little-endian float64
    payload (weight rows, biases, thresholds, optional idf vector) with a
    SHA-256 checksum recorded in the header."""
    payload_parts = [
        np.ascontiguousarray(model.weights, dtype="<f8").tobytes(),
        np.ascontiguousarray(model.biases, dtype="<f8").tobytes(),
        np.ascontiguousarray(model.thresholds, dtype="<f8").tobytes(),
    ]
    if model.idf_weights is not None:
        payload_parts.append(np.ascontiguousarray(model.idf_weights, dtype="<f8").tobytes())
    payload = b"".join(payload_parts)
    header = {
        "format_version": MODEL_FORMAT_VERSION,
        "taxonomy_version": model.taxonomy_version,
        "num_labels": model.num_labels,
        "hash_dims": model.featurizer.hash_dims,
        "hash_seed": model.featurizer.hash_seed,
        "featurizer": model.featurizer.to_dict(),
        "training_meta": model.training_meta,
        "threshold_flags": list(model.threshold_flags),
        "has_idf": model.idf_weights is not None,
        "dtype": "<f8",
        "payload_sha256": hashlib.sha256(payload).hexdigest(),
    }
    return json.dumps(header, sort_keys=True).encode("utf-8") + b"\n" + payload


def load_model(data: bytes, active_taxonomy_version: str | None = None) -> StudentModel:
    """Inverse of save_model; verifies checksum and format/taxonomy versions."""
    newline = data.find(b"\n")
    if newline < 0:
        raise ModelFormatError("model container has no header line")
    try:
        header = json.loads(data[:newline].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise ModelFormatError(f"model header is not valid JSON: {exc}")
    if header.get("format_version") != MODEL_FORMAT_VERSION:
        raise ModelFormatError(
            f"unsupported model format version {header.get('format_version')!r}"
        )
    payload = data[newline + 1 :]
    if hashlib.sha256(payload).hexdigest() != header.get("payload_sha256"):
        raise IntegrityError("model payload fails its checksum")
    if active_taxonomy_version is not None and header["taxonomy_version"] != active_taxonomy_version:
        raise VersionMismatchError(
            f"model taxonomy {header['taxonomy_version']!r} does not match "
            f"active taxonomy {active_taxonomy_version!r}"
        )
    cfg = FeaturizerConfig.from_dict(header["featurizer"])
    L, D = header["num_labels"], cfg.hash_dims
    expected = L * D + L + L + (D if header.get("has_idf") else 0)
    arr = np.frombuffer(payload, dtype="<f8")
    if arr.size != expected:
        raise ModelFormatError(
            f"model payload holds {arr.size} floats, expected {expected}"
        )
    weights = arr[: L * D].reshape(L, D).copy()
    biases = arr[L * D : L * D + L].copy()
    thresholds = arr[L * D + L : L * D + 2 * L].copy()
    idf = arr[L * D + 2 * L :].copy() if header.get("has_idf") else None
    return StudentModel(
        featurizer=cfg,
        weights=weights,
        biases=biases,
        thresholds=thresholds,
        taxonomy_version=header["taxonomy_version"],
        training_meta=header.get("training_meta", {}),
        threshold_flags=tuple(bool(f) for f in header.get("threshold_flags", [])),
        idf_weights=idf,
    )
