"""Stratified k-fold cross-validation, the benchmark metric suite, and the
transformation-by-model experiment grid.

Fold hygiene: everything derived from data (frequency tables, frequent-word
lexicons, vocabularies) is rebuilt from the nine training folds of each
split, so held-out text never leaks into fitted resources.
"""

from __future__ import annotations

import hashlib
import json
import math
import os
import time
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Mapping, Optional, Sequence, Union

import numpy as np

from . import textops
from .corpus import Document, word_frequencies
from .features import build_vocabulary, stack, vectorize
from .lexicons import LexiconSet
from .models import Hyper, predict_many, train_logit, train_nbsvm

__all__ = [
    "MODEL_KINDS",
    "CellError",
    "FoldAssignment",
    "MetricSet",
    "FoldReport",
    "GridCell",
    "subseed",
    "stratified_folds",
    "compute_metrics",
    "subsample",
    "corpus_fingerprint",
    "run_cell",
    "run_grid",
    "comparison_table",
    "write_report_csv",
    "write_comparison_json",
    "render_table",
    "atomic_write",
]

MODEL_KINDS = ("logit", "nbsvm")

_TRAINERS = {"logit": train_logit, "nbsvm": train_nbsvm}


class CellError(RuntimeError):
    """A grid cell failed; carries (fold, stage) context in the message."""


def subseed(seed: int, *tags) -> int:
    """Stable named sub-seed so components can be tested in isolation."""
    text = f"{seed}:" + ":".join(str(t) for t in tags)
    digest = hashlib.sha256(text.encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "big") >> 1


@dataclass(frozen=True)
class FoldAssignment:
    k: int
    fold_of: np.ndarray  # document index -> fold id
    seed: int

    def test_indices(self, fold: int) -> np.ndarray:
        return np.where(self.fold_of == fold)[0]

    def train_indices(self, fold: int) -> np.ndarray:
        return np.where(self.fold_of != fold)[0]


def stratified_folds(labels: Sequence[int], k: int = 10, seed: int = 0) -> FoldAssignment:
    """Seeded stratified fold assignment.

    Within each class the (shuffled) members are dealt round-robin; each
    class starts dealing where the previous one stopped, so total fold sizes
    also differ by at most one.
    """
    labels = np.asarray(labels)
    if k < 2:
        raise ValueError("k must be >= 2")
    fold_of = np.full(len(labels), -1, dtype=np.int32)
    rng = np.random.default_rng(seed)
    offset = 0
    for cls in np.unique(labels):
        members = np.where(labels == cls)[0]
        if len(members) < k:
            raise ValueError(
                f"class {cls!r} has {len(members)} members, fewer than k={k}"
            )
        order = rng.permutation(len(members))
        for t, pos in enumerate(order):
            fold_of[members[pos]] = (offset + t) % k
        offset = (offset + len(members)) % k
    return FoldAssignment(k=k, fold_of=fold_of, seed=seed)


@dataclass(frozen=True)
class MetricSet:
    """The benchmark metric suite at a fixed decision threshold."""

    accuracy: float
    f1_pos: float
    f1_neg: float
    logloss: float
    misclassified: int
    precision_neg: float
    recall_neg: float
    threshold: float
    n: int

    def to_dict(self) -> dict:
        return {
            "accuracy": self.accuracy,
            "f1_pos": self.f1_pos,
            "f1_neg": self.f1_neg,
            "logloss": self.logloss,
            "misclassified": self.misclassified,
            "precision_neg": self.precision_neg,
            "recall_neg": self.recall_neg,
            "threshold": self.threshold,
            "n": self.n,
        }

    @classmethod
    def from_dict(cls, d: Mapping) -> "MetricSet":
        return cls(**d)


def _prf(tp: int, fp: int, fn: int) -> tuple[float, float, float]:
    precision = tp / (tp + fp) if tp + fp else 0.0
    recall = tp / (tp + fn) if tp + fn else 0.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
    return precision, recall, f1


def compute_metrics(probs: Sequence[float], labels: Sequence[int], threshold: float = 0.5) -> MetricSet:
    """Accuracy, per-class F1, logloss, misclassified count, and the
    negative-class precision/recall the benchmark focuses on."""
    probs = np.asarray(probs, dtype=np.float64)
    labels = np.asarray(labels)
    if len(probs) == 0:
        raise ValueError("compute_metrics needs at least one prediction")
    if len(probs) != len(labels):
        raise ValueError("probs and labels must have equal length")
    n = len(probs)
    pred = probs >= threshold
    truth = labels == 1
    mis = int((pred != truth).sum())

    tp = int((pred & truth).sum())
    fp = int((pred & ~truth).sum())
    fn = int((~pred & truth).sum())
    tn = n - tp - fp - fn
    _, _, f1_pos = _prf(tp, fp, fn)
    precision_neg, recall_neg, f1_neg = _prf(tn, fn, fp)

    clipped = np.clip(probs, 1e-15, 1.0 - 1e-15)
    y = truth.astype(np.float64)
    logloss = float(-np.mean(y * np.log(clipped) + (1.0 - y) * np.log(1.0 - clipped)))

    return MetricSet(
        accuracy=1.0 - mis / n,
        f1_pos=f1_pos,
        f1_neg=f1_neg,
        logloss=logloss,
        misclassified=mis,
        precision_neg=precision_neg,
        recall_neg=recall_neg,
        threshold=threshold,
        n=n,
    )


@dataclass
class FoldReport:
    """Per-fold and aggregated out-of-fold metrics for one grid cell.

    The aggregate misclassified count is the sum over folds (a corpus-level
    count); every other aggregate field is the unweighted mean over folds.
    """

    pipeline_id: str
    model_kind: str
    folds: list[MetricSet]
    aggregate: MetricSet
    train_vocab_sizes: list[int]
    wall_time_s: Optional[float] = None
    oof: Optional[np.ndarray] = None  # in-memory only

    def to_dict(self) -> dict:
        return {
            "pipeline": self.pipeline_id,
            "model": self.model_kind,
            "folds": [m.to_dict() for m in self.folds],
            "aggregate": self.aggregate.to_dict(),
            "train_vocab_sizes": self.train_vocab_sizes,
        }

    @classmethod
    def from_dict(cls, d: Mapping) -> "FoldReport":
        return cls(
            pipeline_id=d["pipeline"],
            model_kind=d["model"],
            folds=[MetricSet.from_dict(m) for m in d["folds"]],
            aggregate=MetricSet.from_dict(d["aggregate"]),
            train_vocab_sizes=list(d["train_vocab_sizes"]),
        )


def _aggregate(folds: list[MetricSet]) -> MetricSet:
    k = len(folds)
    return MetricSet(
        accuracy=sum(m.accuracy for m in folds) / k,
        f1_pos=sum(m.f1_pos for m in folds) / k,
        f1_neg=sum(m.f1_neg for m in folds) / k,
        logloss=sum(m.logloss for m in folds) / k,
        misclassified=sum(m.misclassified for m in folds),
        precision_neg=sum(m.precision_neg for m in folds) / k,
        recall_neg=sum(m.recall_neg for m in folds) / k,
        threshold=folds[0].threshold,
        n=sum(m.n for m in folds),
    )


def subsample(docs: Sequence[Document], n: int, seed: int = 0) -> list[Document]:
    """Seeded stratified subsample preserving the class ratio within one
    document; original corpus order is kept."""
    if n < 2:
        raise ValueError("subsample size must be >= 2")
    if n > len(docs):
        raise ValueError(f"subsample size {n} exceeds corpus size {len(docs)}")
    labels = np.array([d.label for d in docs])
    pos = np.where(labels == 1)[0]
    neg = np.where(labels == 0)[0]
    n_pos = int(round(n * len(pos) / len(docs)))
    n_neg = n - n_pos
    if n_pos < 1 or n_neg < 1 or n_pos > len(pos) or n_neg > len(neg):
        raise ValueError("subsample would produce a single-class corpus")
    rng = np.random.default_rng(seed)
    chosen = np.concatenate([
        rng.choice(pos, size=n_pos, replace=False),
        rng.choice(neg, size=n_neg, replace=False),
    ])
    chosen.sort()
    return [docs[i] for i in chosen]


def corpus_fingerprint(docs: Sequence[Document]) -> str:
    h = hashlib.sha256()
    for d in docs:
        h.update(f"{d.id}\x1f{d.text}\x1f{d.label}\x1e".encode("utf-8"))
    return h.hexdigest()[:20]


PipelineArg = Union[None, str, textops.PipelineSpec]


def _resolve(pipeline: PipelineArg) -> tuple[str, Optional[textops.PipelineSpec]]:
    if pipeline is None:
        return textops.RAW_PIPELINE_ID, None
    if isinstance(pipeline, textops.PipelineSpec):
        return pipeline.id, pipeline
    return pipeline, textops.resolve_pipeline(pipeline)


def run_cell(
    docs: Sequence[Document],
    pipeline: PipelineArg,
    model_kind: str,
    k: int = 10,
    seed: int = 0,
    lexicons: Optional[LexiconSet] = None,
    hyper: Hyper = Hyper(),
    ngram_range: tuple[int, int] = (1, 2),
    min_df: int = 2,
    min_frequency: int = 100,
    shared: Optional[dict] = None,
) -> FoldReport:
    """One (pipeline, model) cell: transform per fold, train on nine folds,
    score the held-out tenth, aggregate.

    `shared` memoizes per-fold contexts and transformed texts across cells
    of one grid run (same corpus, k, and seed).
    """
    pid, spec = _resolve(pipeline)
    if model_kind not in _TRAINERS:
        raise ValueError(f"unknown model kind {model_kind!r}; known: {MODEL_KINDS}")
    if spec is not None and lexicons is None:
        raise ValueError("transforming pipelines need a lexicon set")
    tokenizer = textops.WHITESPACE_TOKENIZER
    labels = np.array([d.label for d in docs])
    texts = [d.text for d in docs]
    assign = stratified_folds(labels, k=k, seed=subseed(seed, "folds"))
    shared = shared if shared is not None else {}

    started = time.perf_counter()
    fold_metrics: list[MetricSet] = []
    vocab_sizes: list[int] = []
    oof = np.full(len(docs), np.nan)

    for fold in range(k):
        stage = "split"
        try:
            train_idx = assign.train_indices(fold)
            test_idx = assign.test_indices(fold)

            stage = "transform"
            if spec is None:
                train_texts = [texts[i] for i in train_idx]
                test_texts = [texts[i] for i in test_idx]
            else:
                key = (pid, fold)
                if key not in shared:
                    ctx_key = ("ctx", fold)
                    if ctx_key not in shared:
                        fold_docs = [docs[i] for i in train_idx]
                        freq = word_frequencies(fold_docs, tokenizer)
                        shared[ctx_key] = textops.TransformContext.build(
                            lexicons, freq, min_frequency=min_frequency,
                            tokenizer=tokenizer,
                        )
                    ctx = shared[ctx_key]
                    shared[key] = (
                        [textops.apply_pipeline(texts[i], spec, ctx) for i in train_idx],
                        [textops.apply_pipeline(texts[i], spec, ctx) for i in test_idx],
                    )
                train_texts, test_texts = shared[key]

            stage = "vocabulary"
            train_tokens = [tokenizer.tokenize(t) for t in train_texts]
            test_tokens = [tokenizer.tokenize(t) for t in test_texts]
            vocab = build_vocabulary(train_tokens, ngram_range, min_df)
            width = len(vocab)
            x_train = stack([vectorize(t, vocab) for t in train_tokens], width)
            x_test = stack([vectorize(t, vocab) for t in test_tokens], width)

            stage = "train"
            fold_hyper = replace(hyper, seed=subseed(seed, pid, model_kind, fold))
            model = _TRAINERS[model_kind](x_train, labels[train_idx], fold_hyper)

            stage = "score"
            probs = predict_many(model, x_test)
            oof[test_idx] = probs
            fold_metrics.append(compute_metrics(probs, labels[test_idx]))
            vocab_sizes.append(width)
        except Exception as exc:
            raise CellError(
                f"cell ({pid}, {model_kind}) fold {fold} stage {stage}: {exc}"
            ) from exc

    return FoldReport(
        pipeline_id=pid,
        model_kind=model_kind,
        folds=fold_metrics,
        aggregate=_aggregate(fold_metrics),
        train_vocab_sizes=vocab_sizes,
        wall_time_s=time.perf_counter() - started,
        oof=oof,
    )


@dataclass
class GridCell:
    pipeline_id: str
    model_kind: str
    report: Optional[FoldReport]
    error: Optional[str] = None
    cached: bool = False


def _cell_cache_path(cache_dir: Path, pid: str, model: str, k: int, seed: int, fp: str) -> Path:
    key = hashlib.sha256(f"{pid}|{model}|{k}|{seed}|{fp}".encode()).hexdigest()[:20]
    return cache_dir / f"cell_{key}.json"


def atomic_write(path: Path, data: str) -> None:
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(data, encoding="utf-8")
    os.replace(tmp, path)


def run_grid(
    docs: Sequence[Document],
    pipelines: Sequence[PipelineArg],
    models: Sequence[str],
    k: int = 10,
    seed: int = 0,
    lexicons: Optional[LexiconSet] = None,
    cache_dir=None,
    hyper: Hyper = Hyper(),
    min_df: int = 2,
    min_frequency: int = 100,
    progress=None,
) -> list[GridCell]:
    """Every (pipeline, model) cell; individual failures are recorded and
    the rest of the grid continues. Completed cells are cached by
    (pipeline, model, k, seed, corpus fingerprint) so reruns resume."""
    fp = corpus_fingerprint(docs)
    cache = Path(cache_dir) if cache_dir is not None else None
    if cache is not None:
        cache.mkdir(parents=True, exist_ok=True)
    shared: dict = {}
    cells: list[GridCell] = []
    for pipeline in pipelines:
        pid, _ = _resolve(pipeline)
        for model in models:
            path = _cell_cache_path(cache, pid, model, k, seed, fp) if cache else None
            if path is not None and path.exists():
                report = FoldReport.from_dict(json.loads(path.read_text("utf-8")))
                cells.append(GridCell(pid, model, report, cached=True))
                if progress:
                    progress(f"cell ({pid}, {model}): cached")
                continue
            try:
                report = run_cell(
                    docs, pipeline, model, k=k, seed=seed, lexicons=lexicons,
                    hyper=hyper, min_df=min_df, min_frequency=min_frequency,
                    shared=shared,
                )
            except Exception as exc:
                cells.append(GridCell(pid, model, None, error=str(exc)))
                if progress:
                    progress(f"cell ({pid}, {model}): FAILED: {exc}")
                continue
            if path is not None:
                atomic_write(path, json.dumps(report.to_dict(), sort_keys=True))
            cells.append(GridCell(pid, model, report))
            if progress:
                progress(
                    f"cell ({pid}, {model}): logloss={report.aggregate.logloss:.4f} "
                    f"({report.wall_time_s:.1f}s)"
                )
    return cells


_DELTA_FIELDS = ("accuracy", "f1_pos", "f1_neg", "logloss", "misclassified")


def comparison_table(cells: Sequence[GridCell]) -> list[dict]:
    """One row per completed cell with deltas against the same model's Raw
    baseline; sorted by logloss within each model."""
    baselines = {
        c.model_kind: c.report.aggregate
        for c in cells
        if c.report is not None and c.pipeline_id == textops.RAW_PIPELINE_ID
    }
    rows = []
    for c in cells:
        if c.report is None:
            continue
        agg = c.report.aggregate
        row = {"pipeline": c.pipeline_id, "model": c.model_kind}
        row.update(agg.to_dict())
        base = baselines.get(c.model_kind)
        for fname in _DELTA_FIELDS:
            row[f"delta_{fname}"] = (
                getattr(agg, fname) - getattr(base, fname) if base else None
            )
        rows.append(row)
    rows.sort(key=lambda r: (r["model"], r["logloss"], r["pipeline"]))
    return rows


_CSV_FIELDS = (
    "accuracy", "f1_pos", "f1_neg", "logloss",
    "misclassified", "precision_neg", "recall_neg",
)


def _fmt(value) -> str:
    if isinstance(value, float):
        return repr(value)
    return str(value)


def write_report_csv(cells: Sequence[GridCell], path) -> None:
    """Per-fold rows plus an `aggregate` pseudo-fold row for each cell."""
    lines = ["pipeline,model,fold," + ",".join(_CSV_FIELDS)]
    for c in cells:
        if c.report is None:
            continue
        for fold, m in enumerate(c.report.folds):
            vals = ",".join(_fmt(getattr(m, f)) for f in _CSV_FIELDS)
            lines.append(f"{c.pipeline_id},{c.model_kind},{fold},{vals}")
        agg = c.report.aggregate
        vals = ",".join(_fmt(getattr(agg, f)) for f in _CSV_FIELDS)
        lines.append(f"{c.pipeline_id},{c.model_kind},aggregate,{vals}")
    atomic_write(Path(path), "\n".join(lines) + "\n")


def write_comparison_json(cells: Sequence[GridCell], path) -> None:
    payload = {
        "table": comparison_table(cells),
        "failures": [
            {"pipeline": c.pipeline_id, "model": c.model_kind, "error": c.error}
            for c in cells
            if c.report is None
        ],
    }
    atomic_write(Path(path), json.dumps(payload, sort_keys=True, indent=2) + "\n")


def render_table(cells: Sequence[GridCell]) -> str:
    """Ranked text table for terminal output."""
    rows = comparison_table(cells)
    if not rows:
        return "(no completed cells)"
    header = f"{'pipeline':<32} {'model':<6} {'logloss':>9} {'accuracy':>9} {'f1_pos':>8} {'f1_neg':>8} {'mis':>6} {'d_logloss':>10}"
    out = [header, "-" * len(header)]
    for r in rows:
        delta = r["delta_logloss"]
        out.append(
            f"{r['pipeline']:<32} {r['model']:<6} {r['logloss']:>9.4f} "
            f"{r['accuracy']:>9.4f} {r['f1_pos']:>8.4f} {r['f1_neg']:>8.4f} "
            f"{r['misclassified']:>6d} "
            + (f"{delta:>+10.4f}" if delta is not None else f"{'n/a':>10}")
        )
    return "\n".join(out)
