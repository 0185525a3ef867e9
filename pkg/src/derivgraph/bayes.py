"""Derivation extraction as three-way pair classification.

Every document-ordered equation pair (i, j), i before j, becomes one
sample: label +1 when the labeled graph has i -> j, -1 for j -> i, 0 for no
edge. The feature text is the first equation's alttext, the article text
lying between the two equations (equation placeholders excluded), and the
second equation's alttext, joined by single spaces. A hand-rolled
multinomial naive Bayes with Laplace smoothing classifies unseen pairs; an
article with n equations consumes exactly n*(n-1)/2 predictions, pairs in
lexicographic order.
"""

from __future__ import annotations

import json
import random
import re
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .corpus import GroundTruthEntry
from .graph import DerivationGraph
from .ingest import ParsedArticle, placeholder

_WORD_RE = re.compile(r"[a-z0-9]+")

LABELS = (-1, 0, 1)


@dataclass(frozen=True)
class PairSample:
    article_id: str
    first_id: str
    second_id: str
    feature_text: str
    label: int


def tokenize_feature(text: str) -> list[str]:
    """Lowercased maximal alphanumeric runs; everything else is a separator."""
    return _WORD_RE.findall(text.lower())


def pair_feature_text(article: ParsedArticle, i: int, j: int) -> str:
    """Feature text for the pair of equations with ordinals i < j."""
    if not 0 <= i < j < len(article.equations):
        raise ValueError(f"bad pair ordinals ({i}, {j})")
    eqs = article.equations
    gaps = []
    for k in range(i + 1, j + 1):
        prev = eqs[k - 1]
        gap = article.text[prev.position + len(placeholder(prev.eq_id)):
                           eqs[k].position]
        gap = gap.strip()
        if gap:
            gaps.append(gap)
    parts = [eqs[i].alttext, *gaps, eqs[j].alttext]
    return " ".join(parts)


def build_pairs(article: ParsedArticle,
                truth: GroundTruthEntry) -> list[PairSample]:
    """Labeled samples for every pair of the article's equations.

    The article's equation IDs must match the labeled entry's, in order.
    """
    article_ids = [eq.eq_id for eq in article.equations]
    if article_ids != list(truth.equation_ids):
        raise ValueError(
            f"{article.article_id}: article equations {article_ids} do not "
            f"match labeled equations {list(truth.equation_ids)}")
    edges = {(u, v) for u, targets in truth.adjacency.items() for v in targets}
    samples = []
    n = len(article_ids)
    for i in range(n):
        for j in range(i + 1, n):
            first, second = article_ids[i], article_ids[j]
            if (first, second) in edges:
                label = 1
            elif (second, first) in edges:
                label = -1
            else:
                label = 0
            samples.append(PairSample(
                article_id=article.article_id,
                first_id=first,
                second_id=second,
                feature_text=pair_feature_text(article, i, j),
                label=label,
            ))
    return samples


def vectorize(texts: list[str]) -> tuple[dict[str, int], np.ndarray]:
    """Bag-of-words counts with the vocabulary ordered by first appearance."""
    vocabulary: dict[str, int] = {}
    tokenized = []
    for text in texts:
        tokens = tokenize_feature(text)
        tokenized.append(tokens)
        for token in tokens:
            if token not in vocabulary:
                vocabulary[token] = len(vocabulary)
    counts = np.zeros((len(texts), len(vocabulary)), dtype=np.int64)
    for row, tokens in enumerate(tokenized):
        for token in tokens:
            counts[row, vocabulary[token]] += 1
    return vocabulary, counts


@dataclass
class NBModel:
    """Multinomial naive Bayes over pair feature text.

    Stores log priors and Laplace-smoothed log likelihoods per class.
    Tokens outside the training vocabulary are ignored at prediction time;
    exact score ties resolve to the numerically smallest label.
    """

    vocabulary: dict[str, int]
    classes: list[int]
    log_priors: np.ndarray
    log_likelihoods: np.ndarray
    alpha: float

    def _count_vector(self, text: str) -> np.ndarray:
        counts = np.zeros(len(self.vocabulary), dtype=np.int64)
        for token in tokenize_feature(text):
            index = self.vocabulary.get(token)
            if index is not None:
                counts[index] += 1
        return counts

    def scores(self, text: str) -> np.ndarray:
        """Log joint probability of the text under each class."""
        counts = self._count_vector(text)
        if len(self.vocabulary):
            return self.log_priors + self.log_likelihoods @ counts
        return self.log_priors.copy()

    def posteriors(self, text: str) -> dict[int, float]:
        scores = self.scores(text)
        shifted = np.exp(scores - scores.max())
        normalized = shifted / shifted.sum()
        return {label: float(p) for label, p in zip(self.classes, normalized)}

    def predict(self, text: str) -> int:
        return self.classes[int(np.argmax(self.scores(text)))]

    def to_json(self) -> dict:
        tokens = [""] * len(self.vocabulary)
        for token, index in self.vocabulary.items():
            tokens[index] = token
        return {
            "vocabulary": tokens,
            "classes": list(self.classes),
            "log_priors": self.log_priors.tolist(),
            "log_likelihoods": self.log_likelihoods.tolist(),
            "alpha": self.alpha,
        }

    @classmethod
    def from_json(cls, payload: dict) -> "NBModel":
        return cls(
            vocabulary={t: i for i, t in enumerate(payload["vocabulary"])},
            classes=[int(c) for c in payload["classes"]],
            log_priors=np.asarray(payload["log_priors"], dtype=float),
            log_likelihoods=np.asarray(payload["log_likelihoods"], dtype=float),
            alpha=float(payload["alpha"]),
        )

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_json(), indent=2) + "\n",
                              encoding="utf-8")

    @classmethod
    def load(cls, path: str | Path) -> "NBModel":
        return cls.from_json(json.loads(Path(path).read_text(encoding="utf-8")))


def train(samples: list[PairSample], alpha: float = 1.0) -> NBModel:
    """Fit the classifier; only classes present in the samples are learned."""
    if not samples:
        raise ValueError("no training samples")
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    vocabulary, counts = vectorize([s.feature_text for s in samples])
    labels = np.asarray([s.label for s in samples])
    classes = sorted(set(int(l) for l in labels))
    vocab_size = len(vocabulary)
    log_priors = np.zeros(len(classes))
    log_likelihoods = np.zeros((len(classes), vocab_size))
    for row, cls in enumerate(classes):
        mask = labels == cls
        log_priors[row] = np.log(mask.sum() / len(samples))
        token_counts = counts[mask].sum(axis=0)
        denom = token_counts.sum() + alpha * vocab_size
        if vocab_size:
            log_likelihoods[row] = np.log((token_counts + alpha) / denom)
    return NBModel(vocabulary=vocabulary, classes=classes,
                   log_priors=log_priors, log_likelihoods=log_likelihoods,
                   alpha=alpha)


def nb_extract(article: ParsedArticle, model: NBModel) -> DerivationGraph:
    """Classify every pair and keep the predicted edges acyclic in pair order."""
    graph = DerivationGraph([eq.eq_id for eq in article.equations])
    n = len(article.equations)
    for i in range(n):
        for j in range(i + 1, n):
            label = model.predict(pair_feature_text(article, i, j))
            first = article.equations[i].eq_id
            second = article.equations[j].eq_id
            if label == 1:
                graph.add_edge(first, second)
            elif label == -1:
                graph.add_edge(second, first)
    return graph


def split_entries(entries: list[GroundTruthEntry], train_fraction: float,
                  seed: int) -> tuple[list[GroundTruthEntry], list[GroundTruthEntry]]:
    """Article-level train/test split via a seeded shuffle.

    Both sides stay nonempty whenever a proper split (fraction < 1) of two
    or more articles is requested, so a 90/10 split of a tiny corpus still
    yields something to train on and something to score.
    """
    if not 0.0 < train_fraction <= 1.0:
        raise ValueError("train fraction must lie in (0, 1]")
    shuffled = list(entries)
    random.Random(seed).shuffle(shuffled)
    cut = int(round(len(shuffled) * train_fraction))
    cut = max(1, min(cut, len(shuffled))) if shuffled else 0
    if train_fraction < 1.0 and len(shuffled) >= 2:
        cut = min(cut, len(shuffled) - 1)
    return shuffled[:cut], shuffled[cut:]
