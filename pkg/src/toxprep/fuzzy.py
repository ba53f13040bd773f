"""Fuzzy word matching: edit distance, indexed nearest-word lookup, and
obfuscation-aware blacklist matching.

Three matchers live here:

* :class:`FuzzyIndex` + :func:`best_match` — nearest frequent-word lookup
  under the length-dependent similarity threshold (1 - len/50, floored).
* :class:`ObfuscationMatcher` + :func:`profane_match` — wildcard/leet
  structural matching, repeated-character collapse, and guarded fuzzy
  matching against a profanity blacklist.
* :func:`proper_name_check` — membership lookup against merged name lists.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, NamedTuple, Optional

import numpy as np

from . import _fastlev

__all__ = [
    "levenshtein",
    "similarity",
    "threshold_for",
    "MatchPolicy",
    "DEFAULT_POLICY",
    "Match",
    "FuzzyIndex",
    "best_match",
    "best_match_scan",
    "collapse_runs",
    "ObfuscationMatcher",
    "wildcard_match",
    "profane_match",
    "proper_name_check",
    "load_leet_map",
    "default_leet_map",
]


def levenshtein(a: str, b: str) -> int:
    """Unit-cost edit distance (insert/delete/substitute) between two words."""
    if a == b:
        return 0
    if not a:
        return len(b)
    if not b:
        return len(a)
    return int(_fastlev.lev_distance(_fastlev.encode(a), _fastlev.encode(b)))


@dataclass(frozen=True)
class MatchPolicy:
    """Length-dependent acceptance threshold for fuzzy word matching.

    A query of length L must reach similarity 1 - L/length_scale; the
    threshold never drops below `floor` (long words would otherwise get a
    negative bound).
    """

    length_scale: float = 50.0
    floor: float = 0.5

    def threshold(self, word: str) -> float:
        return max(1.0 - len(word) / self.length_scale, self.floor)

    def similarity(self, a: str, b: str) -> float:
        return similarity(a, b)


DEFAULT_POLICY = MatchPolicy()


def similarity(a: str, b: str) -> float:
    """Normalized edit similarity 1 - d/max(len), case-insensitive.

    Two empty words are defined to be identical (1.0).
    """
    a = a.casefold()
    b = b.casefold()
    if a == b:
        return 1.0
    longest = max(len(a), len(b))
    if longest == 0:
        return 1.0
    return 1.0 - levenshtein(a, b) / longest


def threshold_for(word: str, policy: MatchPolicy = DEFAULT_POLICY) -> float:
    """Minimum similarity a candidate must reach to match `word`."""
    return policy.threshold(word)


class Match(NamedTuple):
    word: str
    similarity: float
    distance: int


class FuzzyIndex:
    """BK-tree over a fixed word set.

    Words are casefolded and deduplicated at build time; insertion order is
    sorted so the tree shape (and therefore traversal order) is
    deterministic. Queries return exactly what a linear scan over the same
    words would return.
    """

    def __init__(self, words: list[str], mat, lens, edge_start, edge_end, edge_dist, edge_child):
        self.words = words
        self._mat = mat
        self._lens = lens
        self._edge_start = edge_start
        self._edge_end = edge_end
        self._edge_dist = edge_dist
        self._edge_child = edge_child
        self._member = frozenset(words)
        self.last_visited = 0  # nodes touched by the most recent tree query

    def __len__(self) -> int:
        return len(self.words)

    def __contains__(self, word: str) -> bool:
        return word.casefold() in self._member

    @classmethod
    def build(cls, words: Iterable[str]) -> "FuzzyIndex":
        vocab = sorted({w.casefold() for w in words if w})
        if not vocab:
            raise ValueError("cannot build a fuzzy index over an empty word set")
        mat, lens = _fastlev.pack_words(vocab)
        encoded = [mat[i, : lens[i]] for i in range(len(vocab))]
        children: list[dict[int, int]] = [dict() for _ in vocab]
        for i in range(1, len(vocab)):
            node = 0
            while True:
                d = int(_fastlev.lev_distance(encoded[i], encoded[node]))
                nxt = children[node].get(d)
                if nxt is None:
                    children[node][d] = i
                    break
                node = nxt
        # flatten child dicts into edge arrays for the jitted search
        counts = [len(c) for c in children]
        total = sum(counts)
        edge_start = np.zeros(len(vocab), dtype=np.int32)
        edge_end = np.zeros(len(vocab), dtype=np.int32)
        edge_dist = np.zeros(max(total, 1), dtype=np.int32)
        edge_child = np.zeros(max(total, 1), dtype=np.int32)
        pos = 0
        for node, cdict in enumerate(children):
            edge_start[node] = pos
            for d in sorted(cdict):
                edge_dist[pos] = d
                edge_child[pos] = cdict[d]
                pos += 1
            edge_end[node] = pos
        return cls(vocab, mat, lens, edge_start, edge_end, edge_dist, edge_child)

    def candidates_within(self, query: str, radius: int) -> list[tuple[str, int]]:
        """All (word, distance) pairs with distance <= radius."""
        q = _fastlev.encode(query.casefold())
        hits, dists, nhits, visited = _fastlev.tree_range_search(
            q, radius, self._mat, self._lens,
            self._edge_start, self._edge_end, self._edge_dist, self._edge_child,
        )
        self.last_visited = int(visited)
        return [(self.words[hits[i]], int(dists[i])) for i in range(nhits)]

    def scan_distances(self, query: str) -> np.ndarray:
        """Distance from query to every indexed word (linear scan, no tree)."""
        q = _fastlev.encode(query.casefold())
        return _fastlev.scan_distances(q, self._mat, self._lens)


def _search_radius(query_len: int, tau: float) -> int:
    # any candidate c with sim >= tau has d <= (1-tau)*max(|q|,|c|)
    # and max(|q|,|c|) <= |q| + d, so d <= (1-tau)*|q|/tau
    return math.floor((1.0 - tau) * query_len / tau)


def _pick_best(pairs: list[tuple[str, int]], query_len: int, tau: float) -> Optional[Match]:
    best: Optional[Match] = None
    for word, dist in pairs:
        longest = max(query_len, len(word))
        sim = 1.0 if longest == 0 else 1.0 - dist / longest
        if sim < tau:
            continue
        if (
            best is None
            or sim > best.similarity
            or (sim == best.similarity and (dist, word) < (best.distance, best.word))
        ):
            best = Match(word, sim, dist)
    return best


def best_match(index: FuzzyIndex, word: str, policy: MatchPolicy = DEFAULT_POLICY) -> Optional[Match]:
    """Closest indexed word, if it clears the policy threshold.

    Ties at equal similarity break toward smaller edit distance, then the
    lexicographically smallest candidate.
    """
    q = word.casefold()
    tau = policy.threshold(q)
    if q in index._member:
        return Match(q, 1.0, 0)
    radius = _search_radius(len(q), tau)
    if radius < 0:
        return None
    return _pick_best(index.candidates_within(q, radius), len(q), tau)


def best_match_scan(index: FuzzyIndex, word: str, policy: MatchPolicy = DEFAULT_POLICY) -> Optional[Match]:
    """Linear-scan reference path: same contract as :func:`best_match`."""
    q = word.casefold()
    tau = policy.threshold(q)
    dists = index.scan_distances(q)
    pairs = [(index.words[i], int(dists[i])) for i in range(len(index.words))]
    return _pick_best(pairs, len(q), tau)


_RUN = re.compile(r"(.)\1+")


def collapse_runs(word: str) -> str:
    """Squeeze runs of a repeated character down to a single occurrence."""
    return _RUN.sub(r"\1", word)


def load_leet_map(path) -> dict[str, frozenset[str]]:
    """Parse a `char<TAB>substitutes` file into a substitution table."""
    table: dict[str, frozenset[str]] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line.strip() or line.lstrip().startswith("#"):
                continue
            if "\t" not in line:
                raise ValueError(f"{path}: line {lineno}: expected char<TAB>substitutes")
            ch, subs = line.split("\t", 1)
            if len(ch) != 1 or not subs:
                raise ValueError(f"{path}: line {lineno}: malformed leet entry")
            table[ch] = frozenset(subs)
    return table


_DEFAULT_LEET: dict[str, frozenset[str]] | None = None


def default_leet_map() -> dict[str, frozenset[str]]:
    global _DEFAULT_LEET
    if _DEFAULT_LEET is None:
        _DEFAULT_LEET = load_leet_map(Path(__file__).parent / "data" / "leet_map.tsv")
    return dict(_DEFAULT_LEET)


@dataclass
class ObfuscationMatcher:
    """Blacklist matcher that sees through wildcards, leetspeak, repeated
    characters, and near-miss spellings.

    `guard` holds frequent corpus words; a purely fuzzy hit is rejected when
    the token itself is a frequent word, which keeps common words like
    "ship" or "shot" from collapsing into profanity.
    """

    blacklist: tuple[str, ...]
    leet: dict[str, frozenset[str]]
    guard: frozenset[str] = frozenset()
    min_similarity: float = 0.75
    max_distance: int = 2
    _blackset: frozenset[str] = field(init=False, repr=False)
    _mat: np.ndarray = field(init=False, repr=False)
    _lens: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        self._blackset = frozenset(self.blacklist)
        self._mat, self._lens = _fastlev.pack_words(list(self.blacklist))

    @classmethod
    def build(
        cls,
        blacklist: Iterable[str],
        leet: dict[str, frozenset[str]] | None = None,
        guard: Iterable[str] = (),
        min_similarity: float = 0.75,
        max_distance: int = 2,
    ) -> "ObfuscationMatcher":
        words = tuple(sorted({w.casefold() for w in blacklist if w}))
        if not words:
            raise ValueError("blacklist must not be empty")
        guard_set = frozenset(g.casefold() for g in guard) - frozenset(words)
        return cls(
            blacklist=words,
            leet=default_leet_map() if leet is None else leet,
            guard=guard_set,
            min_similarity=min_similarity,
            max_distance=max_distance,
        )

    def clean(self, token: str) -> str:
        """Casefold and strip trailing junk (emoticons, punctuation) that is
        neither alphanumeric, a wildcard, nor a leet character."""
        t = token.casefold()
        keep = self.leet
        while t and not (t[-1].isalnum() or t[-1] == "*" or t[-1] in keep):
            t = t[:-1]
        return t


def _wildcard_positional(token: str, word: str, leet: dict[str, frozenset[str]], flex: int, span: int) -> bool:
    # non-star chars map 1:1; every star consumes one word char except the
    # flexible one, which consumes `span` chars (0..3)
    wi = 0
    for ti, ch in enumerate(token):
        if ch == "*":
            wi += span if ti == flex else 1
            if wi > len(word):
                return False
        else:
            if wi >= len(word):
                return False
            target = word[wi]
            if ch != target and target not in leet.get(ch, ()):
                return False
            wi += 1
    return wi == len(word)


def wildcard_match(token: str, matcher: ObfuscationMatcher) -> Optional[str]:
    """Structural blacklist match: '*' wildcards plus leet substitutions.

    One star may stretch (cover up to 3 canonical chars) or collapse (cover
    none), absorbing a length difference of up to 2; all other stars and
    every literal char map positionally. Tokens made only of wildcards never
    match.
    """
    t = matcher.clean(token)
    if not t or set(t) == {"*"}:
        return None
    stars = [i for i, ch in enumerate(t) if ch == "*"]
    for word in matcher.blacklist:
        diff = len(word) - len(t)
        if diff == 0:
            if _wildcard_positional(t, word, matcher.leet, -1, 1):
                return word
        elif stars and -1 <= diff <= 2:
            span = 1 + diff
            for flex in stars:
                if _wildcard_positional(t, word, matcher.leet, flex, span):
                    return word
    return None


def _fuzzy_blacklist(matcher: ObfuscationMatcher, query: str) -> Optional[str]:
    if not query:
        return None
    dists = _fastlev.scan_distances(_fastlev.encode(query), matcher._mat, matcher._lens)
    best: Optional[tuple[float, int, str]] = None
    for i, word in enumerate(matcher.blacklist):
        d = int(dists[i])
        if d > matcher.max_distance:
            continue
        sim = 1.0 - d / max(len(query), len(word))
        if sim < matcher.min_similarity:
            continue
        if best is None or (-sim, d, word) < (-best[0], best[1], best[2]):
            best = (sim, d, word)
    return best[2] if best else None


def profane_match(
    token: str,
    matcher: ObfuscationMatcher,
    policy: MatchPolicy = DEFAULT_POLICY,
) -> Optional[str]:
    """Map an obfuscated token to its canonical blacklist word, if any.

    Three attempts, first hit wins:

    1. wildcard/leet structural match,
    2. repeated-character collapse then exact blacklist lookup,
    3. fuzzy match against the blacklist (similarity >= min_similarity and
       edit distance <= max_distance), tried on the raw token and then on
       its run-collapsed form, skipped entirely for guarded frequent words.
    """
    t = matcher.clean(token)
    if not t:
        return None
    hit = wildcard_match(t, matcher)
    if hit is not None:
        return hit
    collapsed = collapse_runs(t)
    if collapsed in matcher._blackset:
        return collapsed
    if t in matcher.guard or collapsed in matcher.guard:
        return None
    if "*" in t:
        return None
    hit = _fuzzy_blacklist(matcher, t)
    if hit is None and collapsed != t:
        hit = _fuzzy_blacklist(matcher, collapsed)
    return hit


def proper_name_check(word: str, names) -> Optional[str]:
    """Category tag for a proper name, or None.

    `names` is a lexicon exposing `category_of(word)` (case-insensitive,
    first category in the lexicon's fixed order wins).
    """
    return names.category_of(word)
