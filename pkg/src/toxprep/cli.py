"""Command-line entry point: corpus stats, one-off transformation, the
benchmark grid, and report re-rendering.

Exit codes: 0 success, 1 usage/config error, 2 data error, 3 every grid
cell failed. All randomness flows from the single --seed via named
sub-seeds, so identical configs produce byte-identical outputs.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

from . import evaluation, textops
from .corpus import (
    CorpusFormatError,
    count_histogram,
    load_corpus,
    stats_json,
    word_frequencies,
)
from .lexicons import LexiconFormatError, load_lexicon_set
from .models import Hyper

LEXICON_DIR_ENV = "TOXPREP_LEXICON_DIR"

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_DATA = 2
EXIT_ALL_FAILED = 3


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    corpus: Optional[str] = None
    lexicon_dir: Optional[str] = None
    pipeline_file: Optional[str] = None
    models: Optional[list[str]] = None
    pipelines: Optional[list[str]] = None
    k: int = 10
    seed: Optional[int] = None
    subsample: Optional[int] = None
    out: Optional[str] = None
    limit: Optional[int] = None
    min_df: int = 2
    min_frequency: int = 100
    epochs: int = 30

    @classmethod
    def from_args(cls, args) -> "RunConfig":
        """Config file first, then flags override whatever they set."""
        cfg = cls()
        if getattr(args, "config", None):
            path = Path(args.config)
            if not path.exists():
                raise ConfigError(f"config file not found: {path}")
            try:
                loaded = json.loads(path.read_text("utf-8"))
            except json.JSONDecodeError as exc:
                raise ConfigError(f"config file {path}: {exc}") from exc
            unknown = set(loaded) - set(cfg.__dict__)
            if unknown:
                raise ConfigError(f"config file {path}: unknown keys {sorted(unknown)}")
            for key, value in loaded.items():
                setattr(cfg, key, value)
        for key in cfg.__dict__:
            value = getattr(args, key, None)
            if value is not None:
                setattr(cfg, key, value)
        if cfg.lexicon_dir is None:
            cfg.lexicon_dir = os.environ.get(LEXICON_DIR_ENV)
        return cfg

    def resolved_lexicons(self):
        return load_lexicon_set(self.lexicon_dir)

    def extra_pipelines(self) -> dict[str, textops.PipelineSpec]:
        if not self.pipeline_file:
            return {}
        path = Path(self.pipeline_file)
        if not path.exists():
            raise ConfigError(f"pipeline file not found: {path}")
        parsed = textops.parse_pipelines(path.read_text("utf-8"), str(path))
        return {p.id: p for p in parsed}


def _require(cfg: RunConfig, field: str):
    value = getattr(cfg, field)
    if value is None:
        raise ConfigError(f"missing required setting --{field.replace('_', '-')}")
    return value


def _out_dir(cfg: RunConfig) -> Path:
    out = Path(_require(cfg, "out"))
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_stats(cfg: RunConfig) -> int:
    corpus_path = _require(cfg, "corpus")
    docs = load_corpus(corpus_path, limit=cfg.limit)
    if not docs:
        raise CorpusFormatError(f"{corpus_path}: corpus has no documents")
    table = word_frequencies(docs, textops.WHITESPACE_TOKENIZER)
    payload = stats_json(table)
    print(payload)
    if cfg.out:
        out = _out_dir(cfg)
        evaluation.atomic_write(out / "stats.json", payload + "\n")
        rows = ["occurrence_count,num_words"]
        rows += [f"{count},{num}" for count, num in count_histogram(table)]
        evaluation.atomic_write(out / "histogram.csv", "\n".join(rows) + "\n")
    return EXIT_OK


def cmd_transform(cfg: RunConfig, pipeline_id: str, text: Optional[str], input_path: Optional[str]) -> int:
    extra = cfg.extra_pipelines()
    spec = textops.resolve_pipeline(pipeline_id, extra)
    lexicons = cfg.resolved_lexicons()
    docs = None
    if input_path:
        docs = load_corpus(input_path, limit=cfg.limit)
    # standalone use: frequency-derived resources come from the given corpus
    freq = None
    if docs:
        freq = word_frequencies(docs, textops.WHITESPACE_TOKENIZER)
    elif cfg.corpus:
        freq = word_frequencies(
            load_corpus(cfg.corpus, limit=cfg.limit), textops.WHITESPACE_TOKENIZER
        )
    ctx = textops.TransformContext.build(
        lexicons, freq, min_frequency=cfg.min_frequency
    )
    if text is not None:
        result = text if spec is None else textops.apply_pipeline(text, spec, ctx)
        print(result)
        return EXIT_OK
    if docs is None:
        raise ConfigError("transform needs --text or --input")
    lines = []
    for doc in docs:
        result = doc.text if spec is None else textops.apply_pipeline(doc.text, spec, ctx)
        lines.append(f"{doc.id}\t{result}")
    output = "\n".join(lines)
    print(output)
    if cfg.out:
        evaluation.atomic_write(_out_dir(cfg) / "transformed.tsv", output + "\n")
    return EXIT_OK


def cmd_bench(cfg: RunConfig) -> int:
    corpus_path = _require(cfg, "corpus")
    seed = _require(cfg, "seed")
    out = _out_dir(cfg)
    if not cfg.models:
        raise ConfigError("bench needs at least one model (--models logit,nbsvm)")
    for model in cfg.models:
        if model not in evaluation.MODEL_KINDS:
            raise ConfigError(
                f"unknown model {model!r}; known: {', '.join(evaluation.MODEL_KINDS)}"
            )
    if not cfg.pipelines:
        raise ConfigError("bench needs at least one pipeline (--pipelines Raw,PPO-11-...)")
    if cfg.k < 2:
        raise ConfigError("k must be >= 2")
    extra = cfg.extra_pipelines()
    resolved = [
        p if p == textops.RAW_PIPELINE_ID else textops.resolve_pipeline(p, extra)
        for p in cfg.pipelines
    ]
    docs = load_corpus(corpus_path, limit=cfg.limit)
    if cfg.subsample:
        docs = evaluation.subsample(docs, cfg.subsample, seed=evaluation.subseed(seed, "subsample"))
    lexicons = cfg.resolved_lexicons()
    cells = evaluation.run_grid(
        docs,
        resolved,
        cfg.models,
        k=cfg.k,
        seed=seed,
        lexicons=lexicons,
        cache_dir=out / "cells",
        hyper=Hyper(epochs=cfg.epochs),
        min_df=cfg.min_df,
        min_frequency=cfg.min_frequency,
        progress=lambda msg: print(msg, file=sys.stderr),
    )
    evaluation.write_report_csv(cells, out / "report.csv")
    evaluation.write_comparison_json(cells, out / "comparison.json")
    print(evaluation.render_table(cells))
    if all(c.report is None for c in cells):
        return EXIT_ALL_FAILED
    return EXIT_OK


def cmd_report(cfg: RunConfig) -> int:
    out = _out_dir(cfg)
    cell_dir = out / "cells"
    if not cell_dir.is_dir():
        raise ConfigError(f"no cached cells under {cell_dir}")
    cells = []
    for path in sorted(cell_dir.glob("cell_*.json")):
        report = evaluation.FoldReport.from_dict(json.loads(path.read_text("utf-8")))
        cells.append(
            evaluation.GridCell(report.pipeline_id, report.model_kind, report, cached=True)
        )
    if not cells:
        raise ConfigError(f"no cached cells under {cell_dir}")
    evaluation.write_report_csv(cells, out / "report.csv")
    evaluation.write_comparison_json(cells, out / "comparison.json")
    print(evaluation.render_table(cells))
    return EXIT_OK


def _csv_list(value: str) -> list[str]:
    return [v for v in value.split(",") if v]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="toxprep",
        description="Text transformations and classifier benchmarks for toxic-comment data.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="JSON config file; flags override its values")
        p.add_argument("--corpus", help="corpus CSV path")
        p.add_argument("--lexicon-dir", dest="lexicon_dir",
                       help=f"lexicon directory (default shipped; env {LEXICON_DIR_ENV})")
        p.add_argument("--pipeline-file", dest="pipeline_file",
                       help="extra pipeline definitions to register")
        p.add_argument("--limit", type=int, help="load only the first N rows")
        p.add_argument("--out", help="output directory")

    p_stats = sub.add_parser("stats", help="corpus frequency statistics")
    common(p_stats)

    p_tr = sub.add_parser("transform", help="apply a pipeline to text or a corpus file")
    common(p_tr)
    p_tr.add_argument("--pipeline", required=True, help="pipeline id or atomic transform name")
    p_tr.add_argument("--text", help="transform this literal text")
    p_tr.add_argument("--input", help="transform every document of this corpus CSV")
    p_tr.add_argument("--min-frequency", dest="min_frequency", type=int)

    p_bench = sub.add_parser("bench", help="run the (pipeline x model) benchmark grid")
    common(p_bench)
    p_bench.add_argument("--pipelines", type=_csv_list, help="comma-separated pipeline ids")
    p_bench.add_argument("--models", type=_csv_list, help="comma-separated: logit,nbsvm")
    p_bench.add_argument("--k", type=int, help="fold count (default 10)")
    p_bench.add_argument("--seed", type=int, help="master seed (required)")
    p_bench.add_argument("--subsample", type=int, help="stratified subsample size")
    p_bench.add_argument("--min-df", dest="min_df", type=int)
    p_bench.add_argument("--min-frequency", dest="min_frequency", type=int)
    p_bench.add_argument("--epochs", type=int)

    p_rep = sub.add_parser("report", help="re-render cached grid cells")
    common(p_rep)

    return parser


def main(argv: Optional[list[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code in (0, None) else EXIT_CONFIG
    try:
        cfg = RunConfig.from_args(args)
        if args.command == "stats":
            return cmd_stats(cfg)
        if args.command == "transform":
            return cmd_transform(cfg, args.pipeline, args.text, args.input)
        if args.command == "bench":
            return cmd_bench(cfg)
        if args.command == "report":
            return cmd_report(cfg)
        raise ConfigError(f"unknown command {args.command!r}")
    except (ConfigError, textops.PipelineFormatError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (CorpusFormatError, LexiconFormatError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
