"""Hashed n-gram text features.

The featurizer is stateless: a token's column is a seeded hash of its
bytes, so unseen text always lands in the same space and no vocabulary
needs to ship with a model. Only the small config (dims, seed, n-gram
range, tf mode) travels with trained weights.
"""

from __future__ import annotations

import hashlib
import re
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np
from scipy import sparse

DEFAULT_HASH_DIMS = 2**18
DEFAULT_TOKEN_PATTERN = r"[a-z0-9][a-z0-9']*"


@dataclass(frozen=True)
class FeaturizerConfig:
    n_gram_range: tuple[int, int] = (1, 2)
    hash_dims: int = DEFAULT_HASH_DIMS
    hash_seed: int = 0
    tf_mode: str = "binary"  # "binary" | "sublinear_tf"
    idf: bool = False
    lowercase: bool = True
    token_pattern: str = DEFAULT_TOKEN_PATTERN

    def __post_init__(self) -> None:
        if self.hash_dims < 2 or self.hash_dims & (self.hash_dims - 1):
            raise ValueError("hash_dims must be a power of two >= 2")
        lo, hi = self.n_gram_range
        if not (1 <= lo <= hi):
            raise ValueError("invalid n_gram_range")
        if self.tf_mode not in ("binary", "sublinear_tf"):
            raise ValueError(f"unknown tf_mode {self.tf_mode!r}")

    def to_dict(self) -> dict:
        return {
            "n_gram_range": list(self.n_gram_range),
            "hash_dims": self.hash_dims,
            "hash_seed": self.hash_seed,
            "tf_mode": self.tf_mode,
            "idf": self.idf,
            "lowercase": self.lowercase,
            "token_pattern": self.token_pattern,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "FeaturizerConfig":
        return cls(
            n_gram_range=tuple(d["n_gram_range"]),
            hash_dims=d["hash_dims"],
            hash_seed=d["hash_seed"],
            tf_mode=d["tf_mode"],
            idf=d["idf"],
            lowercase=d["lowercase"],
            token_pattern=d["token_pattern"],
        )


def hash_feature(feature: str, cfg: FeaturizerConfig) -> int:
    """Column index for one n-gram: seeded blake2b, folded into hash_dims."""
    key = cfg.hash_seed.to_bytes(8, "little", signed=True)
    digest = hashlib.blake2b(feature.encode("utf-8"), digest_size=8, key=key).digest()
    return int.from_bytes(digest, "little") % cfg.hash_dims


def tokenize(text: str, cfg: FeaturizerConfig) -> list[str]:
    if cfg.lowercase:
        text = text.lower()
    return re.findall(cfg.token_pattern, text)


def ngrams(tokens: Sequence[str], cfg: FeaturizerConfig) -> Iterable[str]:
    lo, hi = cfg.n_gram_range
    for n in range(lo, hi + 1):
        for i in range(len(tokens) - n + 1):
            yield " ".join(tokens[i : i + n])


def _counts(text: str, cfg: FeaturizerConfig) -> dict[int, int]:
    counts: dict[int, int] = {}
    for gram in ngrams(tokenize(text, cfg), cfg):
        col = hash_feature(gram, cfg)
        counts[col] = counts.get(col, 0) + 1
    return counts


def _tf_values(counts: dict[int, int], cfg: FeaturizerConfig) -> tuple[list[int], list[float]]:
    cols = sorted(counts)
    if cfg.tf_mode == "binary":
        vals = [1.0] * len(cols)
    else:
        vals = [1.0 + float(np.log(counts[c])) for c in cols]
    return cols, vals


def featurize(
    text: str, cfg: FeaturizerConfig, idf_weights: np.ndarray | None = None
) -> sparse.csr_matrix:
    """One text -> 1 x hash_dims sparse row. Empty text -> empty row."""
    return featurize_all([text], cfg, idf_weights=idf_weights)


def featurize_all(
    texts: Sequence[str],
    cfg: FeaturizerConfig,
    idf_weights: np.ndarray | None = None,
) -> sparse.csr_matrix:
    """Batch featurization; row i corresponds to texts[i]."""
    if cfg.idf and idf_weights is None:
        raise ValueError("config has idf=True but no idf_weights were supplied")
    indptr = [0]
    indices: list[int] = []
    data: list[float] = []
    for text in texts:
        cols, vals = _tf_values(_counts(text, cfg), cfg)
        indices.extend(cols)
        data.extend(vals)
        indptr.append(len(indices))
    mat = sparse.csr_matrix(
        (np.asarray(data, dtype=np.float64), np.asarray(indices, dtype=np.int64), np.asarray(indptr, dtype=np.int64)),
        shape=(len(texts), cfg.hash_dims),
    )
    if cfg.idf and idf_weights is not None:
        mat = mat.multiply(sparse.csr_matrix(idf_weights.reshape(1, -1))).tocsr()
    return mat


def fit_idf(texts: Sequence[str], cfg: FeaturizerConfig) -> np.ndarray:
    """Smoothed idf over hashed columns: ln((1 + n) / (1 + df)) + 1."""
    df = np.zeros(cfg.hash_dims, dtype=np.int64)
    for text in texts:
        for col in _counts(text, cfg):
            df[col] += 1
    n = len(texts)
    return np.log((1.0 + n) / (1.0 + df)) + 1.0
