"""Scoring predicted derivation graphs against the labeled corpus.

A prediction for an article with n equations is judged over the universe
of the n*(n-1) ordered equation pairs: tp/fp/fn from the edge sets, tn as
the remainder. Metrics whose denominator is empty are reported as an
undefined marker (None in memory, null in JSON, "NA" in CSV), never as 0,
and are excluded from macro averages. Micro metrics come from summed
counts. Published corpus-level results for the 107-article dataset are
attached to every report as reference metadata; they are not reproducible
from the shipped fixtures, which exist to exercise the pipeline.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from typing import Callable, Mapping

from .analytic import TokenSimParams, token_similarity_extract
from .corpus import GroundTruthEntry, truth_graph
from .graph import DerivationGraph
from .ingest import ParsedArticle
from .seed import seed_candidates

REFERENCE_ROWS = [
    {"method": "Brute Force", "accuracy": 0.913, "precision": 0.484,
     "recall": 0.492, "f1": 0.488},
    {"method": "Token String Similarity (2, greater, 98%)", "accuracy": 0.899,
     "precision": 0.404, "recall": 0.365, "f1": 0.384},
    {"method": "Naive Bayes (90%)", "accuracy": 0.894, "precision": 0.462,
     "recall": 0.449, "f1": 0.455},
    {"method": "Gemini LLM", "accuracy": 0.907, "precision": 0.464,
     "recall": 0.503, "f1": 0.483},
]

SEED_REFERENCE_ROW = {
    "method": "Most Important Equation", "accuracy": 0.371,
    "precision": 0.397, "recall": 0.850, "f1": 0.542,
}

EVAL_CSV_COLUMNS = ["article_id", "tp", "fp", "fn", "tn",
                    "accuracy", "precision", "recall", "f1"]
SWEEP_CSV_COLUMNS = ["strictness", "direction", "threshold", "tp", "fp",
                     "fn", "tn", "accuracy", "precision", "recall", "f1"]
UNDEFINED_MARKER = "NA"


@dataclass(frozen=True)
class ConfusionCounts:
    tp: int
    fp: int
    fn: int
    tn: int

    def __add__(self, other: "ConfusionCounts") -> "ConfusionCounts":
        return ConfusionCounts(self.tp + other.tp, self.fp + other.fp,
                               self.fn + other.fn, self.tn + other.tn)

    def total(self) -> int:
        return self.tp + self.fp + self.fn + self.tn


@dataclass(frozen=True)
class MetricsReport:
    """accuracy/precision/recall/f1; None marks an undefined 0/0 value."""

    accuracy: float | None
    precision: float | None
    recall: float | None
    f1: float | None

    def as_dict(self) -> dict[str, float | None]:
        return {"accuracy": self.accuracy, "precision": self.precision,
                "recall": self.recall, "f1": self.f1}


def confusion(predicted: DerivationGraph,
              truth: DerivationGraph) -> ConfusionCounts:
    """Confusion counts over ordered node pairs (u, v), u != v.

    Both graphs must cover the same node set; the counts always sum to
    n*(n-1).
    """
    if set(predicted.nodes) != set(truth.nodes):
        only_predicted = sorted(set(predicted.nodes) - set(truth.nodes))
        only_truth = sorted(set(truth.nodes) - set(predicted.nodes))
        raise ValueError(
            f"node sets differ (only in prediction: {only_predicted}, "
            f"only in truth: {only_truth})")
    predicted_edges = predicted.edge_set()
    truth_edges = truth.edge_set()
    n = len(truth.nodes)
    tp = len(predicted_edges & truth_edges)
    fp = len(predicted_edges - truth_edges)
    fn = len(truth_edges - predicted_edges)
    tn = n * (n - 1) - tp - fp - fn
    counts = ConfusionCounts(tp, fp, fn, tn)
    if counts.total() != n * (n - 1):
        raise AssertionError("confusion counts do not cover the pair universe")
    return counts


def _ratio(num: int, den: int) -> float | None:
    return num / den if den else None


def metrics(counts: ConfusionCounts) -> MetricsReport:
    """Standard derived metrics with explicit undefined handling."""
    precision = _ratio(counts.tp, counts.tp + counts.fp)
    recall = _ratio(counts.tp, counts.tp + counts.fn)
    accuracy = _ratio(counts.tp + counts.tn, counts.total())
    if precision is None or recall is None or precision + recall == 0:
        f1 = None
    else:
        f1 = 2 * precision * recall / (precision + recall)
    return MetricsReport(accuracy, precision, recall, f1)


@dataclass(frozen=True)
class ArticleScore:
    article_id: str
    counts: ConfusionCounts
    metrics: MetricsReport


@dataclass
class EvaluationReport:
    rows: list[ArticleScore]
    micro_counts: ConfusionCounts
    micro: MetricsReport
    macro: MetricsReport
    skipped: list[tuple[str, str]]

    @property
    def reference(self) -> list[dict]:
        return REFERENCE_ROWS


def _macro(rows: list[ArticleScore]) -> MetricsReport:
    values: dict[str, float | None] = {}
    for name in ("accuracy", "precision", "recall", "f1"):
        defined = [getattr(r.metrics, name) for r in rows
                   if getattr(r.metrics, name) is not None]
        values[name] = sum(defined) / len(defined) if defined else None
    return MetricsReport(**values)


def evaluate_predictions(entries: list[GroundTruthEntry],
                         predictions: Mapping[str, DerivationGraph],
                         ) -> EvaluationReport:
    """Score per-article predictions against labeled entries.

    Entries without a prediction are skipped with a reason, never silently;
    so are predictions whose node set does not match the labels.
    """
    rows = []
    skipped = []
    zero = ConfusionCounts(0, 0, 0, 0)
    total = zero
    for entry in entries:
        predicted = predictions.get(entry.article_id)
        if predicted is None:
            skipped.append((entry.article_id, "no prediction"))
            continue
        try:
            counts = confusion(predicted, truth_graph(entry))
        except ValueError as exc:
            skipped.append((entry.article_id, str(exc)))
            continue
        rows.append(ArticleScore(entry.article_id, counts, metrics(counts)))
        total = total + counts
    return EvaluationReport(rows=rows, micro_counts=total,
                            micro=metrics(total), macro=_macro(rows),
                            skipped=skipped)


def evaluate_corpus(extractor: Callable[[ParsedArticle], DerivationGraph],
                    entries: list[GroundTruthEntry],
                    articles: Mapping[str, ParsedArticle],
                    ) -> EvaluationReport:
    """Run an extractor over the articles and score it in one pass."""
    predictions: dict[str, DerivationGraph] = {}
    for entry in entries:
        article = articles.get(entry.article_id)
        if article is not None:
            predictions[entry.article_id] = extractor(article)
    return evaluate_predictions(entries, predictions)


@dataclass(frozen=True)
class SweepRow:
    strictness: int
    direction: str
    threshold: float
    counts: ConfusionCounts
    metrics: MetricsReport


def sweep_token_similarity(entries: list[GroundTruthEntry],
                           articles: Mapping[str, ParsedArticle],
                           thresholds: list[float],
                           strictness_levels: list[int] = (0, 1, 2),
                           directions: list[str] = ("greater", "lesser"),
                           ) -> list[SweepRow]:
    """Micro confusion counts for every hyper-parameter triple, sorted by
    (strictness, direction, threshold)."""
    rows = []
    for strictness in sorted(strictness_levels):
        for direction in sorted(directions):
            for threshold in sorted(thresholds):
                params = TokenSimParams(strictness=strictness,
                                        direction=direction,
                                        threshold=threshold)
                report = evaluate_corpus(
                    lambda a, p=params: token_similarity_extract(a, p),
                    entries, articles)
                rows.append(SweepRow(strictness, direction, threshold,
                                     report.micro_counts, report.micro))
    return rows


@dataclass(frozen=True)
class SeedScore:
    article_id: str
    candidates: list[str]
    labeled: str | None
    hit: bool


@dataclass
class SeedReport:
    rows: list[SeedScore]
    precision: float | None
    recall: float | None
    f1: float | None
    skipped: list[tuple[str, str]]

    @property
    def reference(self) -> dict:
        return SEED_REFERENCE_ROW


def evaluate_seed(entries: list[GroundTruthEntry],
                  graphs: Mapping[str, DerivationGraph] | None = None,
                  ) -> SeedReport:
    """Score seed candidates against the labeled most important equation.

    By default candidates are computed on each entry's labeled graph; pass
    predicted graphs to score the full extraction + ranking pipeline. Per
    article tp is 1 when the labeled seed appears among the candidates,
    fp counts the remaining candidates, fn is 1 - tp; the report carries
    micro precision/recall/F1 over those counts.
    """
    rows = []
    skipped = []
    tp = fp = fn = 0
    for entry in entries:
        if graphs is None:
            graph = truth_graph(entry)
        else:
            maybe = graphs.get(entry.article_id)
            if maybe is None:
                skipped.append((entry.article_id, "no prediction"))
                continue
            graph = maybe
        if entry.most_important is None:
            skipped.append((entry.article_id, "no labeled seed"))
            continue
        candidates = seed_candidates(graph)
        hit = entry.most_important in candidates
        rows.append(SeedScore(entry.article_id, candidates,
                              entry.most_important, hit))
        tp += 1 if hit else 0
        fp += len(candidates) - (1 if hit else 0)
        fn += 0 if hit else 1
    precision = _ratio(tp, tp + fp)
    recall = _ratio(tp, tp + fn)
    if precision is None or recall is None or precision + recall == 0:
        f1 = None
    else:
        f1 = 2 * precision * recall / (precision + recall)
    return SeedReport(rows=rows, precision=precision, recall=recall, f1=f1,
                      skipped=skipped)


def _format_metric(value: float | None) -> str:
    return UNDEFINED_MARKER if value is None else f"{value:.6f}"


def _metric_cells(report: MetricsReport) -> list[str]:
    return [_format_metric(report.accuracy), _format_metric(report.precision),
            _format_metric(report.recall), _format_metric(report.f1)]


def report_to_csv(report: EvaluationReport) -> str:
    """Deterministic CSV: one row per article plus micro and macro rows."""
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(EVAL_CSV_COLUMNS)
    for row in report.rows:
        writer.writerow([row.article_id, row.counts.tp, row.counts.fp,
                         row.counts.fn, row.counts.tn,
                         *_metric_cells(row.metrics)])
    c = report.micro_counts
    writer.writerow(["micro", c.tp, c.fp, c.fn, c.tn,
                     *_metric_cells(report.micro)])
    writer.writerow(["macro", "", "", "", "", *_metric_cells(report.macro)])
    return out.getvalue()


def report_to_json(report: EvaluationReport) -> dict:
    c = report.micro_counts
    return {
        "articles": [
            {"article_id": row.article_id,
             "counts": {"tp": row.counts.tp, "fp": row.counts.fp,
                        "fn": row.counts.fn, "tn": row.counts.tn},
             "metrics": row.metrics.as_dict()}
            for row in report.rows
        ],
        "micro": {"counts": {"tp": c.tp, "fp": c.fp, "fn": c.fn, "tn": c.tn},
                  "metrics": report.micro.as_dict()},
        "macro": report.macro.as_dict(),
        "skipped": [{"article_id": a, "reason": r} for a, r in report.skipped],
        "reference": REFERENCE_ROWS,
    }


def sweep_to_csv(rows: list[SweepRow]) -> str:
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(SWEEP_CSV_COLUMNS)
    for row in rows:
        writer.writerow([row.strictness, row.direction,
                         f"{row.threshold:.6f}", row.counts.tp, row.counts.fp,
                         row.counts.fn, row.counts.tn,
                         *_metric_cells(row.metrics)])
    return out.getvalue()


def sweep_to_json(rows: list[SweepRow]) -> dict:
    return {
        "rows": [
            {"strictness": row.strictness, "direction": row.direction,
             "threshold": row.threshold,
             "counts": {"tp": row.counts.tp, "fp": row.counts.fp,
                        "fn": row.counts.fn, "tn": row.counts.tn},
             "metrics": row.metrics.as_dict()}
            for row in rows
        ],
        "reference": REFERENCE_ROWS,
    }


def seed_report_to_csv(report: SeedReport) -> str:
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["article_id", "labeled", "candidates", "hit"])
    for row in report.rows:
        writer.writerow([row.article_id, row.labeled or "",
                         " ".join(row.candidates), int(row.hit)])
    writer.writerow(["micro", "", "", ""])
    writer.writerow(["precision", _format_metric(report.precision), "", ""])
    writer.writerow(["recall", _format_metric(report.recall), "", ""])
    writer.writerow(["f1", _format_metric(report.f1), "", ""])
    return out.getvalue()


def seed_report_to_json(report: SeedReport) -> dict:
    return {
        "articles": [
            {"article_id": row.article_id, "labeled": row.labeled,
             "candidates": row.candidates, "hit": row.hit}
            for row in report.rows
        ],
        "micro": {"precision": report.precision, "recall": report.recall,
                  "f1": report.f1},
        "skipped": [{"article_id": a, "reason": r} for a, r in report.skipped],
        "reference": SEED_REFERENCE_ROW,
    }
