"""Deterministic synthetic comment corpus in the ingestion CSV format.

Keeps demos and the test suite hermetic: the generated corpus has the same
shape as real comment data (skewed labels, typos, obfuscated profanity,
contractions, acronyms, names, mojibake, multi-line comments) without
shipping any real comments.
"""

from __future__ import annotations

import numpy as np

from .corpus import Document, RawRecord, binarize

__all__ = ["make_raw_records", "make_corpus"]

_COMMON = (
    "the be to of and a in that have i it for not on with he as you do at this "
    "but his by from they we say her she or an will my one all would there their "
    "what so up out if about who get which go me when make can like time no just "
    "him know take person into year your good some could them see other than then "
    "now look only come its over think also back after use two how our work first "
    "well way even new want because any these give day most us page article talk "
    "edit wiki user please stop read write source link block delete revert change "
    "section title comment discussion admin editor reference note thanks help "
    "question answer agree point view fact history entry list add remove keep "
    "find show call place case part group problem right left line word name "
    "world school state never really thing old tell try leave put mean become "
    "need feel three high too seem last long great little own old big different "
    "small large next early young important few public bad same able best better "
    "sure free real full whole clear actual possible recent final original "
    "ship shot shift spit suit shut shout short sheet shirt chat coat city "
    "stupid wrong nonsense garbage rubbish terrible awful horrible ridiculous "
    "pathetic useless worthless annoying boring lame dumb crazy insane weird"
).split()

_TOXIC_PHRASES = (
    "you are a",
    "what a",
    "this is complete",
    "stop being such a",
    "shut up you",
    "nobody cares you",
    "get lost you",
    "go away",
)

_PROFANE = ("shit", "fuck", "bitch", "ass", "bastard", "crap", "moron", "idiot")

_ACCENTED = ("café", "naïve", "résumé", "señor", "über", "пример", "日本語")

_CONTRACTIONS = ("can't", "don't", "won't", "it's", "you're", "isn't", "i'm")

_ACRONYMS = ("lol", "omg", "wtf", "btw", "imo", "smh", "idk")

_NAMES = ("London", "Paris", "Germany", "Maria", "Ahmed", "Tokyo", "Brazil")


def _obfuscate(word: str, rng: np.random.Generator) -> str:
    style = rng.integers(0, 4)
    if style == 0:  # elongate a vowel
        for i, ch in enumerate(word):
            if ch in "aeiou":
                return word[: i + 1] + ch * int(rng.integers(1, 9)) + word[i + 1 :]
        return word + word[-1] * 3
    if style == 1:  # leetspeak
        table = {"i": "1", "s": "$", "a": "@", "t": "+", "e": "3", "o": "0"}
        out = [table.get(ch, ch) if rng.random() < 0.7 else ch for ch in word]
        return "".join(out)
    if style == 2:  # star out the middle
        if len(word) <= 2:
            return word
        inner = max(1, len(word) - 2)
        return word[0] + "*" * inner + word[-1]
    return word.upper()  # shouting


def _clean_sentence(rng: np.random.Generator, zipf_p: np.ndarray) -> str:
    n = int(rng.integers(4, 28))
    words = list(rng.choice(_COMMON, size=n, p=zipf_p))
    roll = rng.random()
    if roll < 0.12:
        words.insert(int(rng.integers(0, len(words))), str(rng.choice(_CONTRACTIONS)))
    elif roll < 0.2:
        words.insert(int(rng.integers(0, len(words))), str(rng.choice(_ACRONYMS)))
    elif roll < 0.25:
        words.insert(int(rng.integers(0, len(words))), str(rng.choice(_NAMES)))
    elif roll < 0.28:
        words.insert(int(rng.integers(0, len(words))), str(rng.choice(_ACCENTED)))
    return " ".join(words)


def _toxic_sentence(rng: np.random.Generator, zipf_p: np.ndarray) -> str:
    base = _clean_sentence(rng, zipf_p)
    phrase = str(rng.choice(_TOXIC_PHRASES))
    word = str(rng.choice(_PROFANE))
    if rng.random() < 0.6:
        word = _obfuscate(word, rng)
    return f"{base} {phrase} {word}"


def make_raw_records(n: int, seed: int = 0, positive_rate: float = 0.10) -> list[RawRecord]:
    """Generate `n` records; about `positive_rate` of them are abusive."""
    rng = np.random.default_rng(seed)
    ranks = np.arange(1, len(_COMMON) + 1, dtype=np.float64)
    zipf_p = (1.0 / ranks) / (1.0 / ranks).sum()
    records = []
    for i in range(n):
        toxic = rng.random() < positive_rate
        if toxic:
            text = _toxic_sentence(rng, zipf_p)
            flags = [1, 0, 0, 0, 0, 0]
            for j in range(1, 6):
                if rng.random() < 0.2:
                    flags[j] = 1
        else:
            text = _clean_sentence(rng, zipf_p)
            flags = [0, 0, 0, 0, 0, 0]
        quirk = rng.random()
        if quirk < 0.02:
            text = text[: len(text) // 2] + "\n" + text[len(text) // 2 :]
        elif quirk < 0.03:
            text = text + " \x07\x7f"
        elif quirk < 0.04:
            text = text.replace(" ", ", ", 1)
        elif quirk < 0.045:
            text = ""
        elif quirk < 0.05:
            text = text + " " + "x" * int(rng.integers(31, 60))
        records.append(RawRecord(f"doc{i:06d}", text, *flags))
    return records


def make_corpus(n: int, seed: int = 0, positive_rate: float = 0.10) -> list[Document]:
    return [binarize(r) for r in make_raw_records(n, seed, positive_rate)]
