"""Comment-corpus ingestion and corpus-level vocabulary statistics.

The input format is the labeled comment CSV with header
``id,comment_text,toxic,severe_toxic,obscene,threat,insult,identity_hate``
(RFC-4180 quoting, multi-line comments allowed). The six per-category flags
collapse into a single binary "abusive" label: 1 iff any flag is set.
"""

from __future__ import annotations

import csv
import json
from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Iterator, Optional, Sequence

__all__ = [
    "CorpusFormatError",
    "RawRecord",
    "Document",
    "FrequencyTable",
    "EXPECTED_HEADER",
    "load_corpus",
    "iter_raw_records",
    "binarize",
    "write_corpus_csv",
    "word_frequencies",
    "frequency_stats",
    "count_histogram",
    "stats_json",
]

EXPECTED_HEADER = (
    "id",
    "comment_text",
    "toxic",
    "severe_toxic",
    "obscene",
    "threat",
    "insult",
    "identity_hate",
)

LABEL_COLUMNS = EXPECTED_HEADER[2:]


class CorpusFormatError(ValueError):
    """Raised for malformed corpus files (bad header, bad row)."""


@dataclass(frozen=True)
class RawRecord:
    """One CSV row: comment text plus the six source toxicity flags."""

    id: str
    text: str
    toxic: int
    severe_toxic: int
    obscene: int
    threat: int
    insult: int
    identity_hate: int

    @property
    def flags(self) -> tuple[int, int, int, int, int, int]:
        return (
            self.toxic,
            self.severe_toxic,
            self.obscene,
            self.threat,
            self.insult,
            self.identity_hate,
        )


@dataclass(frozen=True)
class Document:
    """One comment with its collapsed binary label (1 = abusive)."""

    id: str
    text: str
    label: int


def binarize(record: RawRecord) -> Document:
    """Collapse the six flags into one label: abusive iff any flag is set."""
    return Document(id=record.id, text=record.text, label=int(any(record.flags)))


def _parse_flag(value: str, column: str, row_number: int) -> int:
    v = value.strip()
    if v not in ("0", "1"):
        raise CorpusFormatError(
            f"row {row_number}: column {column!r} must be 0 or 1, got {value!r}"
        )
    return int(v)


def iter_raw_records(path, limit: Optional[int] = None) -> Iterator[RawRecord]:
    """Stream RawRecords from a corpus CSV.

    Invalid UTF-8 bytes are replaced rather than rejected; scraped comment
    data contains mojibake and loading must be total. Row numbers in errors
    count data rows from 1 (embedded newlines make file line numbers
    ambiguous).
    """
    path = Path(path)
    with open(path, encoding="utf-8", errors="replace", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise CorpusFormatError(f"{path}: empty file, expected header row") from None
        if tuple(h.strip() for h in header) != EXPECTED_HEADER:
            raise CorpusFormatError(
                f"{path}: unknown header layout {header!r}; "
                f"expected columns {','.join(EXPECTED_HEADER)}"
            )
        for row_number, row in enumerate(reader, start=1):
            if limit is not None and row_number > limit:
                return
            if len(row) != len(EXPECTED_HEADER):
                raise CorpusFormatError(
                    f"row {row_number}: expected {len(EXPECTED_HEADER)} fields, got {len(row)}"
                )
            rec_id = row[0]
            if not rec_id:
                raise CorpusFormatError(f"row {row_number}: empty id")
            flags = [
                _parse_flag(row[i + 2], LABEL_COLUMNS[i], row_number)
                for i in range(6)
            ]
            yield RawRecord(rec_id, row[1], *flags)


def load_corpus(path, limit: Optional[int] = None) -> list[Document]:
    """Load the corpus with labels binarized; row order preserved.

    `limit` takes the first N rows (a prefix, for determinism); seeded
    subsampling lives in the evaluation module.
    """
    return [binarize(rec) for rec in iter_raw_records(path, limit=limit)]


def write_corpus_csv(records: Iterable[RawRecord], path) -> int:
    """Write RawRecords back out in the corpus CSV format; returns row count."""
    n = 0
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(EXPECTED_HEADER)
        for rec in records:
            writer.writerow([rec.id, rec.text, *rec.flags])
            n += 1
    return n


@dataclass(frozen=True)
class FrequencyTable:
    """Whole-corpus word counts under a fixed tokenizer."""

    counts: dict[str, int]
    total_tokens: int
    vocab_size: int

    def frequency(self, word: str) -> int:
        return self.counts.get(word, 0)


def word_frequencies(docs: Sequence[Document], tokenizer) -> FrequencyTable:
    """Aggregate token counts over all documents.

    Deterministic for a fixed tokenizer and invariant to document order.
    """
    counts: Counter[str] = Counter()
    for doc in docs:
        counts.update(tokenizer.tokenize(doc.text))
    return FrequencyTable(
        counts=dict(counts),
        total_tokens=sum(counts.values()),
        vocab_size=len(counts),
    )


def frequency_stats(table: FrequencyTable, top_k: int = 20) -> dict:
    """Summary of the count distribution: how many words are rare, and which
    words dominate. Fractions are over vocabulary entries (word types)."""
    if table.vocab_size == 0:
        return {
            "singleton_fraction": 0.0,
            "le5_fraction": 0.0,
            "vocab_size": 0,
            "total_tokens": 0,
            "top_k": [],
        }
    singletons = sum(1 for c in table.counts.values() if c == 1)
    le5 = sum(1 for c in table.counts.values() if c <= 5)
    top = sorted(table.counts.items(), key=lambda kv: (-kv[1], kv[0]))[:top_k]
    return {
        "singleton_fraction": singletons / table.vocab_size,
        "le5_fraction": le5 / table.vocab_size,
        "vocab_size": table.vocab_size,
        "total_tokens": table.total_tokens,
        "top_k": [{"word": w, "count": c} for w, c in top],
    }


def count_histogram(table: FrequencyTable) -> list[tuple[int, int]]:
    """Count-of-counts rows (occurrence_count, num_words), ascending."""
    hist: Counter[int] = Counter(table.counts.values())
    return sorted(hist.items())


def stats_json(table: FrequencyTable, top_k: int = 20) -> str:
    """Deterministic JSON rendering of frequency_stats."""
    return json.dumps(frequency_stats(table, top_k=top_k), sort_keys=True, ensure_ascii=False)
