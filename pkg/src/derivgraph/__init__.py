"""Toolkit for equation derivation graphs in STEM articles.

Parses article HTML into key equations and text windows, extracts the
derivation DAG with citation-, similarity-, classifier-, and chat-model-
based algorithms, scores predictions against a hand-labeled corpus, and
ranks each article's most important equation by weight propagation.
"""

from .analytic import (MathMLError, OpTree, TokenSimParams, brute_force,
                       build_optree, common_substring_extract, lcs_rating,
                       segmentation, subtree_extract, subtree_fingerprints,
                       subtree_similarity, token_containments,
                       token_similarity_extract, tokenize_alttext)
from .bayes import (NBModel, PairSample, build_pairs, nb_extract,
                    pair_feature_text, split_entries, train, vectorize)
from .corpus import (CorpusLoadError, CorpusValidationError, GroundTruthEntry,
                     corpus_stats, entry_to_record, load_corpus, save_corpus,
                     truth_graph, validate_entry)
from .evaluate import (ConfusionCounts, EvaluationReport, MetricsReport,
                       SeedReport, SweepRow, confusion, evaluate_corpus,
                       evaluate_predictions, evaluate_seed, metrics,
                       sweep_token_similarity)
from .graph import (DerivationGraph, GraphCycleError, UnknownNodeError,
                    find_cycle)
from .ingest import (ArticleParseError, KeyEquation, ParsedArticle,
                     TextSegment, find_equation_references, parse_article,
                     placeholder, segment_text, split_sentences)
from .llm import (HttpTransport, LlmExtractionError, LlmTransport,
                  MockTransport, ResponseParseError, TransportError,
                  build_prompt, extract_via_llm, parse_response,
                  render_response)
from .seed import (WeightMap, initialize_weights, likelihoods,
                   most_important, seed_bfs, seed_candidates, seed_dfs,
                   update_weights)

__version__ = "0.1.0"

__all__ = [
    "ArticleParseError", "ConfusionCounts", "CorpusLoadError",
    "CorpusValidationError", "DerivationGraph", "EvaluationReport",
    "GraphCycleError", "GroundTruthEntry", "HttpTransport", "KeyEquation",
    "LlmExtractionError", "LlmTransport", "MathMLError", "MetricsReport",
    "MockTransport", "NBModel", "OpTree", "PairSample", "ParsedArticle",
    "ResponseParseError", "SeedReport", "SweepRow", "TextSegment",
    "TokenSimParams", "TransportError", "UnknownNodeError", "WeightMap",
    "brute_force", "build_optree", "build_pairs", "build_prompt",
    "common_substring_extract", "confusion", "corpus_stats",
    "entry_to_record", "evaluate_corpus", "evaluate_predictions",
    "evaluate_seed", "extract_via_llm", "find_cycle",
    "find_equation_references", "initialize_weights", "lcs_rating",
    "likelihoods", "load_corpus", "metrics", "most_important", "nb_extract",
    "pair_feature_text", "parse_article", "parse_response", "placeholder",
    "render_response",
    "save_corpus", "seed_bfs", "seed_candidates", "seed_dfs", "segment_text",
    "segmentation", "split_entries", "split_sentences", "subtree_extract",
    "subtree_fingerprints", "subtree_similarity", "sweep_token_similarity",
    "token_containments", "token_similarity_extract",
    "tokenize_alttext", "train", "truth_graph", "update_weights",
    "validate_entry", "vectorize",
]
