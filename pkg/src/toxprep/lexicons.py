"""Word lists and replacement maps backing the text transformations.

Set lexicons are one entry per line; map lexicons are `key<TAB>value` per
line. Both allow `#` comments and blank lines. The package ships curated
defaults under ``toxprep/data`` so everything runs hermetically; any
directory with the same file layout can replace them.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping, Optional, Union

__all__ = [
    "LexiconFormatError",
    "SET_KINDS",
    "MAP_KINDS",
    "NAME_CATEGORIES",
    "Lexicon",
    "FrequentWordLexicon",
    "ProperNameLexicon",
    "load_lexicon",
    "load_word_map",
    "load_proper_names",
    "build_frequent_words",
    "default_lexicon_dir",
    "LexiconSet",
    "load_lexicon_set",
]

SET_KINDS = frozenset({"blacklist", "stopwords", "proper_names", "frequent_words"})
MAP_KINDS = frozenset({"acronym_map", "contraction_map"})

# fixed precedence used when one name appears in several lists
NAME_CATEGORIES = ("cities", "countries", "nationalities", "ethnicities", "person_names")


class LexiconFormatError(ValueError):
    """Raised for malformed lexicon files."""


@dataclass(frozen=True)
class Lexicon:
    """A named word list or word->replacement map.

    Set entries are casefolded except for proper names, which keep their
    given form (matching is case-insensitive regardless). Map keys are
    casefolded; replacements are kept as written.
    """

    kind: str
    entries: Union[frozenset, Mapping[str, str]]
    source_path: str
    duplicates_collapsed: int = 0

    def __contains__(self, word: str) -> bool:
        if isinstance(self.entries, Mapping):
            return word.casefold() in self.entries
        return word.casefold() in self.entries

    def lookup(self, word: str) -> Optional[str]:
        if not isinstance(self.entries, Mapping):
            raise TypeError(f"{self.kind} lexicon is a set, not a map")
        return self.entries.get(word.casefold())

    def __len__(self) -> int:
        return len(self.entries)


def _iter_lines(path):
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.rstrip("\n").rstrip("\r")
            if not line.strip() or line.lstrip().startswith("#"):
                continue
            yield lineno, line


def load_lexicon(path, kind: str) -> Lexicon:
    """Load and validate one lexicon file of the given kind."""
    if kind not in SET_KINDS | MAP_KINDS:
        raise ValueError(f"unknown lexicon kind {kind!r}")
    path = Path(path)
    if kind in MAP_KINDS:
        entries: dict[str, str] = {}
        dupes = 0
        for lineno, line in _iter_lines(path):
            if "\t" not in line:
                raise LexiconFormatError(
                    f"{path}: line {lineno}: map entry needs key<TAB>value"
                )
            key, value = line.split("\t", 1)
            key = key.strip().casefold()
            value = value.strip()
            if not key or not value:
                raise LexiconFormatError(
                    f"{path}: line {lineno}: empty key or replacement"
                )
            if key in entries:
                dupes += 1
            entries[key] = value
        if not entries:
            raise LexiconFormatError(f"{path}: empty lexicon file")
        return Lexicon(kind, entries, str(path), dupes)

    seen: set[str] = set()
    kept: list[str] = []
    dupes = 0
    for lineno, line in _iter_lines(path):
        word = line.strip()
        folded = word.casefold()
        if folded in seen:
            dupes += 1
            continue
        seen.add(folded)
        kept.append(word if kind == "proper_names" else folded)
    if not kept:
        raise LexiconFormatError(f"{path}: empty lexicon file")
    return Lexicon(kind, frozenset(kept), str(path), dupes)


def load_word_map(path) -> dict[str, str]:
    """Plain key->value map file (used for lemma dictionaries)."""
    return dict(load_lexicon(path, "contraction_map").entries)


@dataclass(frozen=True)
class FrequentWordLexicon:
    """Corpus words above a count threshold, normalized to alphanumerics."""

    words: frozenset[str]
    min_frequency: int

    def __contains__(self, word: str) -> bool:
        return word.casefold() in self.words

    def __len__(self) -> int:
        return len(self.words)


def build_frequent_words(table, min_frequency: int = 100) -> FrequentWordLexicon:
    """Frequent-word lexicon from a FrequencyTable.

    Keeps words occurring strictly more than `min_frequency` times, strips
    every non-alphanumeric character, lowercases, drops empties, dedupes.
    """
    if min_frequency < 1:
        raise ValueError("min_frequency must be >= 1")
    words: set[str] = set()
    for word, count in table.counts.items():
        if count > min_frequency:
            normalized = "".join(ch for ch in word.casefold() if ch.isalnum())
            if normalized:
                words.add(normalized)
    return FrequentWordLexicon(frozenset(words), min_frequency)


class ProperNameLexicon:
    """Merged name lists (cities, countries, nationalities, ethnicities,
    person names) with one category tag per entry.

    When a name appears in several lists the first category in
    NAME_CATEGORIES order wins.
    """

    def __init__(self, category_map: dict[str, str], source_path: str = ""):
        self._categories = dict(category_map)
        self.source_path = source_path

    def __len__(self) -> int:
        return len(self._categories)

    def __contains__(self, word: str) -> bool:
        return word.casefold() in self._categories

    def category_of(self, word: str) -> Optional[str]:
        return self._categories.get(word.casefold())


def load_proper_names(directory) -> ProperNameLexicon:
    """Build the merged proper-name lexicon from `<category>.txt` files."""
    directory = Path(directory)
    merged: dict[str, str] = {}
    for category in NAME_CATEGORIES:
        path = directory / f"{category}.txt"
        lex = load_lexicon(path, "proper_names")
        for name in lex.entries:
            merged.setdefault(name.casefold(), category)
    return ProperNameLexicon(merged, str(directory))


def default_lexicon_dir() -> Path:
    """Directory with the shipped lexicon data files."""
    return Path(__file__).parent / "data"


@dataclass(frozen=True)
class LexiconSet:
    """Everything the transformation layer needs, loaded from one directory."""

    contractions: Lexicon
    acronyms: Lexicon
    stopwords: Lexicon
    blacklist: Lexicon
    proper_names: ProperNameLexicon
    lemmas: Mapping[str, str]
    source_dir: str


def load_lexicon_set(directory=None) -> LexiconSet:
    """Load the full lexicon bundle from `directory` (default: shipped data)."""
    directory = Path(directory) if directory is not None else default_lexicon_dir()
    return LexiconSet(
        contractions=load_lexicon(directory / "contractions.tsv", "contraction_map"),
        acronyms=load_lexicon(directory / "acronyms.tsv", "acronym_map"),
        stopwords=load_lexicon(directory / "stopwords.txt", "stopwords"),
        blacklist=load_lexicon(directory / "blacklist.txt", "blacklist"),
        proper_names=load_proper_names(directory / "names"),
        lemmas=load_word_map(directory / "lemmas.tsv"),
        source_dir=str(directory),
    )
