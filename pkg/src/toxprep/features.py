"""Bag-of-n-grams features and the naive-Bayes log-count-ratio scaling.

Features are binarized presence indicators (the strongest variant reported
for NB/SVM hybrids on short texts). Vocabularies are built strictly from
training-fold documents; vectorizing unseen text never grows them.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np
from scipy import sparse

__all__ = [
    "Vocabulary",
    "SparseVector",
    "LogCountRatio",
    "ngrams",
    "build_vocabulary",
    "vectorize",
    "stack",
    "nb_ratios",
    "scale",
    "dump_vocabulary",
]

NGRAM_JOIN = "_"


def ngrams(tokens: Sequence[str], lo: int, hi: int) -> Iterable[str]:
    """All n-grams of tokens for n in [lo, hi], joined with '_'."""
    for n in range(lo, hi + 1):
        if n == 1:
            yield from tokens
        else:
            for i in range(len(tokens) - n + 1):
                yield NGRAM_JOIN.join(tokens[i : i + n])


@dataclass(frozen=True)
class SparseVector:
    """(index, value) pairs with strictly increasing indices."""

    indices: np.ndarray  # int32, sorted ascending, unique
    values: np.ndarray  # float64

    @property
    def nnz(self) -> int:
        return len(self.indices)

    def pairs(self) -> list[tuple[int, float]]:
        return [(int(i), float(v)) for i, v in zip(self.indices, self.values)]


def _empty_vector() -> SparseVector:
    return SparseVector(np.empty(0, dtype=np.int32), np.empty(0, dtype=np.float64))


@dataclass(frozen=True)
class Vocabulary:
    """Term -> column map built from training documents only."""

    index: Mapping[str, int]
    doc_freq: Mapping[str, int]
    ngram_range: tuple[int, int]
    min_df: int
    built_on: str  # fingerprint of the training documents

    def __len__(self) -> int:
        return len(self.index)


def _fingerprint(docs: Sequence[Sequence[str]]) -> str:
    h = hashlib.sha256()
    for tokens in docs:
        h.update("\x1f".join(tokens).encode("utf-8"))
        h.update(b"\x1e")
    return h.hexdigest()[:16]


def build_vocabulary(
    train_docs: Sequence[Sequence[str]],
    ngram_range: tuple[int, int] = (1, 2),
    min_df: int = 2,
) -> Vocabulary:
    """Vocabulary of n-grams appearing in at least `min_df` training docs.

    Index assignment is by sorted term order, so identical inputs give an
    identical map regardless of document iteration details.
    """
    if not train_docs:
        raise ValueError("cannot build a vocabulary from zero documents")
    lo, hi = ngram_range
    if lo != 1 and lo > hi:
        raise ValueError(f"bad ngram_range {ngram_range}")
    df: dict[str, int] = {}
    for tokens in train_docs:
        for term in set(ngrams(tokens, lo, hi)):
            df[term] = df.get(term, 0) + 1
    kept = sorted(t for t, c in df.items() if c >= min_df)
    if not kept:
        raise ValueError(
            f"vocabulary empty after min_df={min_df} filtering "
            f"({len(df)} raw terms)"
        )
    return Vocabulary(
        index={t: i for i, t in enumerate(kept)},
        doc_freq={t: df[t] for t in kept},
        ngram_range=(lo, hi),
        min_df=min_df,
        built_on=_fingerprint(train_docs),
    )


def vectorize(tokens: Sequence[str], vocab: Vocabulary) -> SparseVector:
    """Binarized presence vector; out-of-vocabulary terms are ignored."""
    lo, hi = vocab.ngram_range
    cols = {vocab.index[t] for t in ngrams(tokens, lo, hi) if t in vocab.index}
    if not cols:
        return _empty_vector()
    idx = np.array(sorted(cols), dtype=np.int32)
    return SparseVector(idx, np.ones(len(idx), dtype=np.float64))


def stack(vectors: Sequence[SparseVector], width: int) -> sparse.csr_matrix:
    """Stack per-document vectors into one CSR matrix of the given width."""
    indptr = np.zeros(len(vectors) + 1, dtype=np.int64)
    for i, v in enumerate(vectors):
        indptr[i + 1] = indptr[i] + v.nnz
    if len(vectors):
        indices = np.concatenate([v.indices for v in vectors]).astype(np.int32)
        values = np.concatenate([v.values for v in vectors])
    else:
        indices = np.empty(0, dtype=np.int32)
        values = np.empty(0, dtype=np.float64)
    return sparse.csr_matrix((values, indices, indptr), shape=(len(vectors), width))


@dataclass(frozen=True)
class LogCountRatio:
    """Componentwise log of normalized positive vs negative feature mass."""

    r: np.ndarray  # float64, length V
    alpha: float


def nb_ratios(X, y, alpha: float = 1.0) -> LogCountRatio:
    """Smoothed log-count ratios r = log((p/|p|_1) / (q/|q|_1)).

    p and q are alpha-smoothed per-class feature sums over the training
    vectors. Requires both classes present.
    """
    y = np.asarray(y, dtype=np.int8)
    if not isinstance(X, sparse.spmatrix):
        widths = [int(v.indices[-1]) + 1 for v in X if v.nnz]
        X = stack(X, max(widths) if widths else 1)
    if y.min() == y.max():
        raise ValueError("nb_ratios needs both classes present in y")
    if X.nnz and X.data.min() < 0:
        raise ValueError("nb_ratios expects nonnegative (count/presence) features")
    pos = np.asarray(X[y == 1].sum(axis=0)).ravel()
    neg = np.asarray(X[y == 0].sum(axis=0)).ravel()
    p = alpha + pos
    q = alpha + neg
    r = np.log(p / p.sum()) - np.log(q / q.sum())
    return LogCountRatio(r=r, alpha=alpha)


def scale(x: SparseVector, ratio: LogCountRatio) -> SparseVector:
    """Elementwise product with r; zero products keep their slot."""
    if x.nnz == 0:
        return x
    if int(x.indices[-1]) >= len(ratio.r):
        raise ValueError("vector index out of range for ratio vector")
    return SparseVector(x.indices, x.values * ratio.r[x.indices])


def dump_vocabulary(vocab: Vocabulary, path) -> None:
    """TSV dump `term<TAB>index<TAB>doc_freq` for audits and golden tests."""
    with open(path, "w", encoding="utf-8") as fh:
        for term in sorted(vocab.index, key=vocab.index.get):
            fh.write(f"{term}\t{vocab.index[term]}\t{vocab.doc_freq[term]}\n")
