"""The reference tokenizer, the atomic text transformations, and the
composite pipelines built from them.

Every transform is a pure function of (text, immutable context); token-level
transforms tokenize on whitespace, map or filter tokens, and re-join with
single spaces.
"""

from __future__ import annotations

import re
import unicodedata
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Mapping, Optional, Sequence

from . import fuzzy
from .lexicons import FrequentWordLexicon, LexiconSet, build_frequent_words
from .stemmer import porter_stem

__all__ = [
    "Tokenizer",
    "WHITESPACE_TOKENIZER",
    "TransformError",
    "PipelineFormatError",
    "TransformSpec",
    "PipelineSpec",
    "TransformContext",
    "apply_transform",
    "apply_pipeline",
    "atomic_transform_names",
    "builtin_pipelines",
    "registry",
    "resolve_pipeline",
    "parse_pipelines",
    "serialize_pipelines",
    "RAW_PIPELINE_ID",
]

RAW_PIPELINE_ID = "Raw"


@dataclass(frozen=True)
class Tokenizer:
    """Whitespace tokenizer: tokens are maximal runs of non-whitespace.

    Punctuation stays inside tokens so obfuscations like "s**t" survive for
    the matching stages. Tokenize-join-tokenize is stable by construction.
    """

    mode: str = "whitespace"

    def tokenize(self, text: str) -> list[str]:
        return text.split()


WHITESPACE_TOKENIZER = Tokenizer()


class TransformError(ValueError):
    """A transform could not run (missing context resource, bad params)."""


class PipelineFormatError(ValueError):
    """Malformed pipeline spec file or invalid pipeline definition."""


@dataclass(frozen=True)
class TransformSpec:
    """A named atomic transformation plus its parameters."""

    name: str
    params: Mapping[str, object] = field(default_factory=dict)

    def __post_init__(self):
        defn = _TRANSFORMS.get(self.name)
        if defn is None:
            raise TransformError(
                f"unknown transform {self.name!r}; known: {', '.join(_TRANSFORMS)}"
            )
        unknown = set(self.params) - set(defn.defaults)
        if unknown:
            raise TransformError(
                f"transform {self.name!r} got unknown params {sorted(unknown)}"
            )


@dataclass(frozen=True)
class PipelineSpec:
    """An ordered, non-empty sequence of transform stages."""

    id: str
    stages: tuple[TransformSpec, ...]

    def __post_init__(self):
        if not self.id:
            raise PipelineFormatError("pipeline id must be non-empty")
        if not self.stages:
            raise PipelineFormatError(f"pipeline {self.id!r} has no stages")


@dataclass
class TransformContext:
    """Immutable resources the transforms draw on.

    Frequency-derived members (frequency table, frequent words, matcher,
    common-word index) are fold-local during cross-validation; the lexicon
    set is corpus-independent.
    """

    lexicons: Optional[LexiconSet] = None
    frequency: object = None  # corpus.FrequencyTable
    frequent_words: Optional[FrequentWordLexicon] = None
    matcher: Optional[fuzzy.ObfuscationMatcher] = None
    common_index: Optional[fuzzy.FuzzyIndex] = None
    policy: fuzzy.MatchPolicy = fuzzy.DEFAULT_POLICY
    tokenizer: Tokenizer = WHITESPACE_TOKENIZER

    @classmethod
    def build(
        cls,
        lexicons: LexiconSet,
        frequency=None,
        min_frequency: int = 100,
        policy: fuzzy.MatchPolicy = fuzzy.DEFAULT_POLICY,
        tokenizer: Tokenizer = WHITESPACE_TOKENIZER,
    ) -> "TransformContext":
        """Wire up the matching engines from a lexicon set and an optional
        corpus frequency table (fold-local when used inside CV)."""
        frequent = None
        common_index = None
        guard: Sequence[str] = ()
        if frequency is not None:
            frequent = build_frequent_words(frequency, min_frequency)
            if len(frequent):
                common_index = fuzzy.FuzzyIndex.build(frequent.words)
                guard = frequent.words
        matcher = fuzzy.ObfuscationMatcher.build(
            lexicons.blacklist.entries, guard=guard
        )
        return cls(
            lexicons=lexicons,
            frequency=frequency,
            frequent_words=frequent,
            matcher=matcher,
            common_index=common_index,
            policy=policy,
            tokenizer=tokenizer,
        )

    def _require(self, transform: str, resource: str):
        obj = self
        for part in resource.split("."):
            obj = getattr(obj, part, None)
            if obj is None:
                raise TransformError(
                    f"transform {transform!r} requires context resource {resource!r}"
                )
        return obj


_WS = re.compile(r"\s+")


def _map_tokens(text: str, fn: Callable[[str], Optional[str]]) -> str:
    out = []
    for token in text.split():
        mapped = fn(token)
        if mapped:
            out.append(mapped)
    return " ".join(out)


def _t_to_lower(text, ctx, params):
    return text.lower()


def _t_collapse_whitespace(text, ctx, params):
    return _WS.sub(" ", text).strip()


def _t_trim_word_len(text, ctx, params):
    limit = int(params["max_len"])
    if limit < 1:
        raise TransformError("trim_word_len: max_len must be >= 1")
    return _map_tokens(text, lambda t: t[:limit])


def _keep_char(ch: str) -> bool:
    if ch in "\n\t":
        return True
    return unicodedata.category(ch) not in ("Cc", "Cf")


def _t_remove_non_printable(text, ctx, params):
    return "".join(ch for ch in text if _keep_char(ch))


def _t_replace_contractions(text, ctx, params):
    lex = ctx._require("replace_contractions", "lexicons.contractions")
    return _map_tokens(text, lambda t: lex.lookup(t) or t)


def _t_replace_acronyms(text, ctx, params):
    lex = ctx._require("replace_acronyms", "lexicons.acronyms")
    return _map_tokens(text, lambda t: lex.lookup(t) or t)


def _t_remove_stopwords(text, ctx, params):
    lex = ctx._require("remove_stopwords", "lexicons.stopwords")
    return _map_tokens(text, lambda t: None if t in lex else t)


def _t_remove_rare_words(text, ctx, params):
    table = ctx._require("remove_rare_words", "frequency")
    min_count = int(params["min_count"])
    return _map_tokens(
        text, lambda t: t if table.frequency(t) >= min_count else None
    )


def _is_alpha(token: str, ascii_only: bool) -> bool:
    if ascii_only:
        return all("a" <= c <= "z" or "A" <= c <= "Z" for c in token)
    return token.isalpha()


def _t_remove_words_non_alpha(text, ctx, params):
    ascii_only = bool(params["ascii_only"])
    return _map_tokens(text, lambda t: t if _is_alpha(t, ascii_only) else None)


def _t_strip_non_alphabet_chars(text, ctx, params):
    ascii_only = bool(params["ascii_only"])

    def keep(ch: str) -> bool:
        if ch.isspace():
            return True
        return _is_alpha(ch, ascii_only)

    stripped = "".join(ch for ch in text if keep(ch))
    return _WS.sub(" ", stripped).strip()


def _t_stem(text, ctx, params):
    return _map_tokens(text, porter_stem)


def _t_lemmatize(text, ctx, params):
    lemmas = ctx._require("lemmatize", "lexicons.lemmas")
    return _map_tokens(text, lambda t: lemmas.get(t.casefold(), t))


def _t_blacklist_regex(text, ctx, params):
    matcher = ctx._require("blacklist_regex", "matcher")
    return _map_tokens(text, lambda t: fuzzy.wildcard_match(t, matcher) or t)


def _t_profane_fuzzy(text, ctx, params):
    matcher = ctx._require("profane_fuzzy", "matcher")
    return _map_tokens(
        text, lambda t: fuzzy.profane_match(t, matcher, ctx.policy) or t
    )


def _t_common_fuzzy(text, ctx, params):
    index = ctx._require("common_fuzzy", "common_index")

    def remap(token: str) -> str:
        hit = fuzzy.best_match(index, token, ctx.policy)
        return hit.word if hit else token

    return _map_tokens(text, remap)


def _t_tag_proper_names(text, ctx, params):
    names = ctx._require("tag_proper_names", "lexicons.proper_names")
    placeholder = str(params["placeholder"])
    return _map_tokens(
        text,
        lambda t: placeholder if fuzzy.proper_name_check(t, names) else t,
    )


@dataclass(frozen=True)
class _TransformDef:
    fn: Callable
    defaults: Mapping[str, object]


_TRANSFORMS: dict[str, _TransformDef] = {
    "to_lower": _TransformDef(_t_to_lower, {}),
    "collapse_whitespace": _TransformDef(_t_collapse_whitespace, {}),
    "trim_word_len": _TransformDef(_t_trim_word_len, {"max_len": 30}),
    "remove_non_printable": _TransformDef(_t_remove_non_printable, {}),
    "replace_contractions": _TransformDef(_t_replace_contractions, {}),
    "replace_acronyms": _TransformDef(_t_replace_acronyms, {}),
    "remove_stopwords": _TransformDef(_t_remove_stopwords, {}),
    "remove_rare_words": _TransformDef(_t_remove_rare_words, {"min_count": 2}),
    "remove_words_non_alpha": _TransformDef(_t_remove_words_non_alpha, {"ascii_only": False}),
    "strip_non_alphabet_chars": _TransformDef(_t_strip_non_alphabet_chars, {"ascii_only": False}),
    "stem": _TransformDef(_t_stem, {}),
    "lemmatize": _TransformDef(_t_lemmatize, {}),
    "blacklist_regex": _TransformDef(_t_blacklist_regex, {}),
    "profane_fuzzy": _TransformDef(_t_profane_fuzzy, {}),
    "common_fuzzy": _TransformDef(_t_common_fuzzy, {}),
    "tag_proper_names": _TransformDef(_t_tag_proper_names, {"placeholder": "NAME"}),
}


def atomic_transform_names() -> tuple[str, ...]:
    return tuple(_TRANSFORMS)


def apply_transform(text: str, spec: TransformSpec, ctx: TransformContext) -> str:
    """Run one atomic transformation; deterministic, total on valid input."""
    defn = _TRANSFORMS[spec.name]
    params = dict(defn.defaults)
    params.update(spec.params)
    return defn.fn(text, ctx, params)


def apply_pipeline(text: str, pipeline: PipelineSpec, ctx: TransformContext) -> str:
    """Left-to-right fold of apply_transform over the pipeline stages."""
    for i, spec in enumerate(pipeline.stages):
        try:
            text = apply_transform(text, spec, ctx)
        except TransformError as exc:
            raise TransformError(
                f"pipeline {pipeline.id!r} stage {i} ({spec.name}): {exc}"
            ) from exc
    return text


def _parse_value(raw: str):
    try:
        return int(raw)
    except ValueError:
        pass
    try:
        return float(raw)
    except ValueError:
        return raw


def _format_value(value) -> str:
    if isinstance(value, bool):
        return str(int(value))
    if isinstance(value, float):
        return repr(value)
    text = str(value)
    if not text or any(c.isspace() for c in text):
        raise PipelineFormatError(f"param value {value!r} not serializable")
    return text


def parse_pipelines(text: str, source: str = "<string>") -> list[PipelineSpec]:
    """Parse pipeline blocks: `id <pipeline-id>` then `stage <name> [k=v ...]`."""
    pipelines: list[PipelineSpec] = []
    cur_id: Optional[str] = None
    cur_stages: list[TransformSpec] = []

    def flush():
        nonlocal cur_id, cur_stages
        if cur_id is not None:
            pipelines.append(PipelineSpec(cur_id, tuple(cur_stages)))
        cur_id, cur_stages = None, []

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if parts[0] == "id":
            if len(parts) != 2:
                raise PipelineFormatError(f"{source}: line {lineno}: expected `id <pipeline-id>`")
            flush()
            cur_id = parts[1]
        elif parts[0] == "stage":
            if cur_id is None:
                raise PipelineFormatError(f"{source}: line {lineno}: stage before any id")
            if len(parts) < 2:
                raise PipelineFormatError(f"{source}: line {lineno}: expected `stage <name>`")
            params = {}
            for kv in parts[2:]:
                if "=" not in kv:
                    raise PipelineFormatError(
                        f"{source}: line {lineno}: expected key=value, got {kv!r}"
                    )
                key, val = kv.split("=", 1)
                params[key] = _parse_value(val)
            try:
                cur_stages.append(TransformSpec(parts[1], params))
            except TransformError as exc:
                raise PipelineFormatError(f"{source}: line {lineno}: {exc}") from exc
        else:
            raise PipelineFormatError(
                f"{source}: line {lineno}: unknown directive {parts[0]!r}"
            )
    flush()
    if not pipelines:
        raise PipelineFormatError(f"{source}: no pipelines defined")
    return pipelines


def serialize_pipelines(pipelines: Sequence[PipelineSpec]) -> str:
    """Canonical text form; parse(serialize(p)) == p, bit-exact thereafter."""
    blocks = []
    for p in pipelines:
        lines = [f"id {p.id}"]
        for spec in p.stages:
            parts = [f"stage {spec.name}"]
            for key, value in spec.params.items():
                parts.append(f"{key}={_format_value(value)}")
            lines.append(" ".join(parts))
        blocks.append("\n".join(lines))
    return "\n\n".join(blocks) + "\n"


_BUILTIN: Optional[dict[str, PipelineSpec]] = None


def builtin_pipelines() -> dict[str, PipelineSpec]:
    """The 15 shipped composite pipelines, keyed by id."""
    global _BUILTIN
    if _BUILTIN is None:
        path = Path(__file__).parent / "data" / "pipelines.txt"
        _BUILTIN = {p.id: p for p in parse_pipelines(path.read_text("utf-8"), "pipelines.txt")}
    return dict(_BUILTIN)


@dataclass(frozen=True)
class Registry:
    atomic: tuple[str, ...]
    pipelines: Mapping[str, PipelineSpec]

    def all_ids(self) -> list[str]:
        return [RAW_PIPELINE_ID, *self.atomic, *self.pipelines]


def registry() -> Registry:
    """Stable listing of every transform name and built-in pipeline."""
    return Registry(atomic=atomic_transform_names(), pipelines=builtin_pipelines())


def resolve_pipeline(name: str, extra: Optional[Mapping[str, PipelineSpec]] = None) -> Optional[PipelineSpec]:
    """Resolve a pipeline id, an atomic transform name (as a one-stage
    pipeline), or the literal "Raw" (None = no transformation)."""
    if name == RAW_PIPELINE_ID:
        return None
    if extra and name in extra:
        return extra[name]
    pipes = builtin_pipelines()
    if name in pipes:
        return pipes[name]
    if name in _TRANSFORMS:
        return PipelineSpec(name, (TransformSpec(name),))
    known = [RAW_PIPELINE_ID, *_TRANSFORMS, *pipes]
    if extra:
        known.extend(extra)
    raise PipelineFormatError(
        f"unknown pipeline {name!r}; registered: {', '.join(known)}"
    )
