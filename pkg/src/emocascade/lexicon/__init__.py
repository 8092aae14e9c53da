"""Embedding-based emotion lexicon construction and validation."""

from .embeddings import EmbeddingStore, cosine_similarity, nearest_words
from .entries import Lexicon, LexiconEntry
from .expansion import (
    ExpansionParams,
    LexiconExpander,
    eo_sd,
    estimate_intensities,
    expand_lexicon,
    mean_absolute_error,
    random_search,
    validate_holdout,
)

__all__ = [
    "EmbeddingStore",
    "ExpansionParams",
    "Lexicon",
    "LexiconEntry",
    "LexiconExpander",
    "cosine_similarity",
    "eo_sd",
    "estimate_intensities",
    "expand_lexicon",
    "mean_absolute_error",
    "nearest_words",
    "random_search",
    "validate_holdout",
]
