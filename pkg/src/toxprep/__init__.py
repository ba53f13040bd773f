"""toxprep: preprocessing transformations and classifier benchmarks for
toxic-comment corpora."""

from .corpus import (
    Document,
    FrequencyTable,
    RawRecord,
    frequency_stats,
    load_corpus,
    word_frequencies,
)
from .evaluation import (
    FoldReport,
    MetricSet,
    compute_metrics,
    run_cell,
    run_grid,
    stratified_folds,
    subsample,
)
from .features import build_vocabulary, nb_ratios, scale, vectorize
from .fuzzy import (
    FuzzyIndex,
    MatchPolicy,
    ObfuscationMatcher,
    best_match,
    levenshtein,
    profane_match,
    proper_name_check,
    similarity,
    threshold_for,
    wildcard_match,
)
from .lexicons import (
    FrequentWordLexicon,
    Lexicon,
    build_frequent_words,
    load_lexicon,
    load_lexicon_set,
    load_proper_names,
)
from .models import Hyper, LinearModel, gradient_check, predict_proba, train_logit, train_nbsvm
from .stemmer import porter_stem
from .textops import (
    PipelineSpec,
    Tokenizer,
    TransformContext,
    TransformSpec,
    apply_pipeline,
    apply_transform,
    registry,
    resolve_pipeline,
)

__version__ = "0.1.0"
