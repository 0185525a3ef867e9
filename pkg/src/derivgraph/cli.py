"""Command-line interface.

Subcommands cover the pipeline end to end: validate a labeled corpus,
parse one article for inspection, extract predicted graphs to
corpus-schema JSON files, score prediction files against the corpus,
sweep token-similarity hyper-parameters, and rank seed equations. Report
commands write CSV and JSON plus rendered figures next to them (disable
with --no-figures). Exit codes: 0 clean, 1 finished with findings
(validation failures or skipped articles), 2 usage or I/O errors.
"""

from __future__ import annotations

import argparse
import json
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from . import analytic, bayes, llm, viz
from .corpus import (CorpusLoadError, CorpusValidationError, GroundTruthEntry,
                     corpus_stats, entry_to_record, load_corpus, save_corpus,
                     truth_graph, validate_entry)
from .evaluate import (evaluate_predictions, evaluate_seed, report_to_csv,
                       report_to_json, seed_report_to_csv,
                       seed_report_to_json, sweep_to_csv, sweep_to_json,
                       sweep_token_similarity)
from .graph import DerivationGraph
from .ingest import ArticleParseError, ParsedArticle, parse_article
from .llm import HttpTransport, LlmExtractionError, TransportError
from .seed import likelihoods, most_important, seed_bfs, seed_candidates, seed_dfs

METHODS = ("brute-force", "segmentation", "common-substring", "subtree",
           "token-similarity", "naive-bayes", "llm")


def _read_article(path: Path, article_id: str) -> ParsedArticle:
    return parse_article(path.read_bytes(), article_id)


def _article_paths(articles_dir: Path,
                   entries: list[GroundTruthEntry] | None) -> list[tuple[str, Path]]:
    """Pair article IDs with their HTML files (<articles>/<id>.html)."""
    if entries is not None:
        return [(e.article_id, articles_dir / f"{e.article_id}.html")
                for e in entries]
    return [(p.stem, p) for p in sorted(articles_dir.glob("*.html"))]


def _parse_articles(pairs: list[tuple[str, Path]], jobs: int,
                    ) -> tuple[dict[str, ParsedArticle], list[tuple[str, str]]]:
    """Parse articles (optionally in parallel); returns articles + failures."""
    articles: dict[str, ParsedArticle] = {}
    failures: list[tuple[str, str]] = []

    def parse_one(item: tuple[str, Path]):
        article_id, path = item
        if not path.is_file():
            return article_id, None, f"missing file {path}"
        try:
            return article_id, _read_article(path, article_id), None
        except ArticleParseError as exc:
            return article_id, None, str(exc)

    if jobs > 1 and len(pairs) > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(parse_one, pairs))
    else:
        results = [parse_one(item) for item in pairs]
    for article_id, article, error in results:
        if article is None:
            failures.append((article_id, error))
        else:
            articles[article_id] = article
    return articles, failures


def _prediction_entry(article: ParsedArticle,
                      graph: DerivationGraph) -> GroundTruthEntry:
    """Package a predicted graph in the corpus schema; the most important
    equation is filled in from the breadth-first weight ranking."""
    seed = None
    if graph.nodes:
        seed = most_important(seed_bfs(graph), graph.nodes)
    return GroundTruthEntry(
        article_id=article.article_id,
        equation_ids=list(graph.nodes),
        adjacency={n: list(ts) for n, ts in graph.adjacency.items()},
        equation_numbers={eq.eq_id: eq.number_label
                          for eq in article.equations},
        most_important=seed,
    )


def _float_list(raw: str) -> list[float]:
    return [float(x) for x in raw.split(",") if x.strip() != ""]


def _int_list(raw: str) -> list[int]:
    return [int(x) for x in raw.split(",") if x.strip() != ""]


def _str_list(raw: str) -> list[str]:
    return [x.strip() for x in raw.split(",") if x.strip() != ""]


def cmd_validate(args: argparse.Namespace) -> int:
    try:
        entries = load_corpus(args.corpus)
    except CorpusValidationError as exc:
        for violation in exc.violations:
            print(violation, file=sys.stderr)
        print(f"invalid: {len(exc.violations)} violation(s)", file=sys.stderr)
        return 1
    stats = corpus_stats(entries)
    for entry in entries:
        problems = validate_entry(entry)
        status = "ok" if not problems else "; ".join(problems)
        print(f"{entry.article_id}: {status} "
              f"({len(entry.equation_ids)} equations)")
    print(f"valid: {stats['articles']} articles, {stats['equations']} "
          f"equations, {stats['edges']} edges")
    return 0


def cmd_parse(args: argparse.Namespace) -> int:
    path = Path(args.article)
    article_id = args.article_id or path.stem
    article = _read_article(path, article_id)
    payload = {
        "article_id": article.article_id,
        "text": article.text,
        "equations": [
            {"eq_id": eq.eq_id, "number_label": eq.number_label,
             "alttext": eq.alttext, "mathml": eq.mathml,
             "position": eq.position, "ordinal": eq.ordinal}
            for eq in article.equations
        ],
        "segments": {
            eq_id: {
                "paragraph_before": list(seg.paragraph_before),
                "sentence_after": list(seg.sentence_after),
                "containing_sentence": list(seg.containing_sentence),
                "paragraph_before_text": article.span_text(seg.paragraph_before),
                "sentence_after_text": article.span_text(seg.sentence_after),
                "containing_sentence_text":
                    article.span_text(seg.containing_sentence),
            }
            for eq_id, seg in article.segments.items()
        },
    }
    text = json.dumps(payload, indent=2, ensure_ascii=False) + "\n"
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return 0


def _build_extractor(args: argparse.Namespace,
                     entries: list[GroundTruthEntry] | None,
                     articles: dict[str, ParsedArticle], out_dir: Path):
    """Return (extract(article) -> graph, ids to predict, findings)."""
    findings: list[tuple[str, str]] = []
    method = args.method
    predict_ids = sorted(articles)

    if method == "brute-force":
        return analytic.brute_force, predict_ids, findings
    if method == "segmentation":
        return analytic.segmentation, predict_ids, findings
    if method == "common-substring":
        threshold = args.threshold if args.threshold is not None else 0.9
        return (lambda a: analytic.common_substring_extract(a, threshold),
                predict_ids, findings)
    if method == "subtree":
        threshold = args.threshold if args.threshold is not None else 0.9
        return (lambda a: analytic.subtree_extract(a, threshold),
                predict_ids, findings)
    if method == "token-similarity":
        params = analytic.TokenSimParams(
            strictness=args.strictness,
            direction=args.direction,
            threshold=args.threshold if args.threshold is not None else 0.98)
        return (lambda a: analytic.token_similarity_extract(a, params),
                predict_ids, findings)
    if method == "naive-bayes":
        if entries is None:
            raise SystemExit("naive-bayes requires --corpus for training labels")
        train_entries, test_entries = bayes.split_entries(
            entries, args.train_split, args.seed)
        samples = []
        for entry in train_entries:
            article = articles.get(entry.article_id)
            if article is None:
                findings.append((entry.article_id, "training article missing"))
                continue
            samples.append((entry, article))
        pairs = []
        for entry, article in samples:
            pairs.extend(bayes.build_pairs(article, entry))
        if not pairs:
            raise SystemExit("no training pairs; check --articles and --corpus")
        model = bayes.train(pairs)
        model.save(out_dir / "model.json")
        test_ids = [e.article_id for e in test_entries if e.article_id in articles]
        return (lambda a: bayes.nb_extract(a, model), test_ids, findings)
    if method == "llm":
        if args.mock_llm:
            fixture = llm.load_mock_fixture(args.mock_llm)

            def run(article: ParsedArticle) -> DerivationGraph:
                transport = llm.mock_for_article(fixture, article.article_id)
                return llm.extract_via_llm(transport, article,
                                           retries=args.retries)
        else:
            transport = HttpTransport(endpoint=args.llm_endpoint,
                                      model=args.llm_model)

            def run(article: ParsedArticle) -> DerivationGraph:
                return llm.extract_via_llm(transport, article,
                                           retries=args.retries)
        return run, predict_ids, findings
    raise SystemExit(f"unknown method {method!r}")


def cmd_extract(args: argparse.Namespace) -> int:
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    entries = load_corpus(args.corpus) if args.corpus else None
    pairs = _article_paths(Path(args.articles), entries)
    articles, findings = _parse_articles(pairs, args.jobs)

    extract, predict_ids, more = _build_extractor(args, entries, articles,
                                                  out_dir)
    findings.extend(more)

    def run_one(article_id: str):
        try:
            return article_id, extract(articles[article_id]), None
        except (LlmExtractionError, TransportError, ValueError) as exc:
            return article_id, None, str(exc)

    if args.jobs > 1 and len(predict_ids) > 1:
        with ThreadPoolExecutor(max_workers=args.jobs) as pool:
            results = list(pool.map(run_one, predict_ids))
    else:
        results = [run_one(article_id) for article_id in predict_ids]

    written = 0
    for article_id, graph, error in results:
        if graph is None:
            findings.append((article_id, error))
            continue
        article = articles[article_id]
        entry = _prediction_entry(article, graph)
        save_corpus([entry], out_dir / f"{article_id}.json")
        if args.dot:
            labels = {eq.eq_id: eq.number_label for eq in article.equations}
            (out_dir / f"{article_id}.dot").write_text(
                graph.to_dot(labels=labels), encoding="utf-8")
        for notice in graph.notices:
            print(f"{article_id}: {notice}", file=sys.stderr)
        written += 1

    print(f"wrote {written} prediction file(s) to {out_dir}")
    for article_id, reason in findings:
        print(f"skipped {article_id}: {reason}", file=sys.stderr)
    return 1 if findings else 0


def _load_predictions(entries: list[GroundTruthEntry], predictions_dir: Path,
                      ) -> tuple[dict[str, DerivationGraph], list[tuple[str, str]]]:
    graphs: dict[str, DerivationGraph] = {}
    failures: list[tuple[str, str]] = []
    for entry in entries:
        path = predictions_dir / f"{entry.article_id}.json"
        if not path.is_file():
            failures.append((entry.article_id, f"missing prediction {path}"))
            continue
        try:
            predicted = load_corpus(path)
        except (CorpusLoadError, CorpusValidationError) as exc:
            failures.append((entry.article_id, str(exc)))
            continue
        if len(predicted) != 1:
            failures.append((entry.article_id,
                             f"{path} holds {len(predicted)} records"))
            continue
        graphs[entry.article_id] = truth_graph(predicted[0])
    return graphs, failures


def cmd_eval(args: argparse.Namespace) -> int:
    entries = load_corpus(args.corpus)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    graphs, failures = _load_predictions(entries, Path(args.predictions))
    report = evaluate_predictions(entries, graphs)
    report.skipped.extend(failures)
    (out_dir / "eval.csv").write_text(report_to_csv(report), encoding="utf-8")
    (out_dir / "eval.json").write_text(
        json.dumps(report_to_json(report), indent=2) + "\n", encoding="utf-8")
    if args.figures and report.rows:
        viz.save_eval_figure(report, out_dir / "eval.png")
    for article_id, reason in report.skipped:
        print(f"skipped {article_id}: {reason}", file=sys.stderr)
    micro = report.micro.as_dict()
    shown = {k: ("NA" if v is None else f"{v:.4f}") for k, v in micro.items()}
    print(f"micro: accuracy={shown['accuracy']} precision={shown['precision']} "
          f"recall={shown['recall']} f1={shown['f1']}")
    return 1 if report.skipped else 0


def cmd_sweep(args: argparse.Namespace) -> int:
    entries = load_corpus(args.corpus)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    pairs = _article_paths(Path(args.articles), entries)
    articles, failures = _parse_articles(pairs, args.jobs)
    rows = sweep_token_similarity(
        entries, articles,
        thresholds=_float_list(args.threshold),
        strictness_levels=_int_list(args.strictness),
        directions=_str_list(args.direction))
    (out_dir / "sweep.csv").write_text(sweep_to_csv(rows), encoding="utf-8")
    (out_dir / "sweep.json").write_text(
        json.dumps(sweep_to_json(rows), indent=2) + "\n", encoding="utf-8")
    if args.figures:
        viz.save_sweep_figures(rows, out_dir)
    for article_id, reason in failures:
        print(f"skipped {article_id}: {reason}", file=sys.stderr)
    print(f"wrote {len(rows)} sweep row(s) to {out_dir}")
    return 1 if failures else 0


def cmd_seed(args: argparse.Namespace) -> int:
    entries = load_corpus(args.corpus)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    graphs = None
    failures: list[tuple[str, str]] = []
    if args.predictions:
        graphs, failures = _load_predictions(entries, Path(args.predictions))
    report = evaluate_seed(entries, graphs)
    report.skipped.extend(failures)
    (out_dir / "seed.csv").write_text(seed_report_to_csv(report),
                                      encoding="utf-8")
    (out_dir / "seed.json").write_text(
        json.dumps(seed_report_to_json(report), indent=2) + "\n",
        encoding="utf-8")

    by_id = {entry.article_id: entry for entry in entries}
    detail_ids = [args.article] if args.article else []
    for article_id in detail_ids:
        entry = by_id.get(article_id)
        if entry is None:
            print(f"unknown article {article_id!r}", file=sys.stderr)
            return 2
        graph = graphs.get(article_id) if graphs else truth_graph(entry)
        if graph is None:
            continue
        bfs = seed_bfs(graph)
        dfs = seed_dfs(graph)
        ratios = likelihoods(bfs) if graph.nodes else {}
        print(f"article {article_id}")
        for node in graph.nodes:
            print(f"  {node}: bfs={bfs.weights[node]:.4f} "
                  f"dfs={dfs.weights[node]:.4f} "
                  f"likelihood={ratios.get(node, 0.0):.4f}")
        if graph.nodes:
            print(f"  candidates: {', '.join(seed_candidates(graph))}")
            print(f"  most important: {most_important(bfs, graph.nodes)}")

    for entry in entries:
        graph = graphs.get(entry.article_id) if graphs else truth_graph(entry)
        if graph is None or not graph.nodes:
            continue
        weights = seed_bfs(graph)
        labels = {eq_id: entry.equation_numbers.get(eq_id, "")
                  for eq_id in entry.equation_ids}
        if args.dot:
            (out_dir / f"{entry.article_id}.dot").write_text(
                graph.to_dot(labels=labels, weights=weights.weights),
                encoding="utf-8")
        if args.figures:
            viz.save_graph_figure(
                graph, out_dir / "figures" / f"{entry.article_id}.png",
                labels=labels, weights=weights.weights,
                title=entry.article_id)

    hits = sum(1 for row in report.rows if row.hit)
    print(f"seed hits: {hits}/{len(report.rows)}")
    return 1 if report.skipped else 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="derivgraph",
        description="Extract, evaluate, and rank equation derivation graphs "
                    "from STEM articles in HTML form.")
    sub = parser.add_subparsers(dest="command", required=True)

    p_validate = sub.add_parser("validate", help="check a labeled corpus")
    p_validate.add_argument("--corpus", required=True)
    p_validate.set_defaults(func=cmd_validate)

    p_parse = sub.add_parser("parse", help="dump one parsed article as JSON")
    p_parse.add_argument("--article", required=True, help="HTML file")
    p_parse.add_argument("--article-id", default=None)
    p_parse.add_argument("--out", default=None)
    p_parse.set_defaults(func=cmd_parse)

    p_extract = sub.add_parser("extract",
                               help="write predicted graphs as JSON files")
    p_extract.add_argument("--articles", required=True,
                           help="directory of <article id>.html files")
    p_extract.add_argument("--corpus", default=None,
                           help="labeled corpus (restricts and, for "
                                "naive-bayes, trains)")
    p_extract.add_argument("--method", required=True, choices=METHODS)
    p_extract.add_argument("--out", required=True)
    p_extract.add_argument("--threshold", type=float, default=None)
    p_extract.add_argument("--strictness", type=int, default=2,
                           choices=(0, 1, 2))
    p_extract.add_argument("--direction", default="greater",
                           choices=("greater", "lesser"))
    p_extract.add_argument("--train-split", type=float, default=0.9)
    p_extract.add_argument("--seed", type=int, default=0)
    p_extract.add_argument("--llm-endpoint", default=None,
                           help=f"chat endpoint (or {llm.ENV_ENDPOINT})")
    p_extract.add_argument("--llm-model", default=None)
    p_extract.add_argument("--mock-llm", default=None,
                           help="recorded-response fixture JSON")
    p_extract.add_argument("--retries", type=int, default=2)
    p_extract.add_argument("--jobs", type=int, default=1)
    p_extract.add_argument("--dot", action="store_true")
    p_extract.set_defaults(func=cmd_extract)

    p_eval = sub.add_parser("eval", help="score prediction files")
    p_eval.add_argument("--corpus", required=True)
    p_eval.add_argument("--predictions", required=True)
    p_eval.add_argument("--out", required=True)
    p_eval.add_argument("--no-figures", dest="figures", action="store_false")
    p_eval.set_defaults(func=cmd_eval)

    p_sweep = sub.add_parser("sweep",
                             help="grid-search token similarity settings")
    p_sweep.add_argument("--corpus", required=True)
    p_sweep.add_argument("--articles", required=True)
    p_sweep.add_argument("--out", required=True)
    p_sweep.add_argument("--threshold", default="0.5,0.7,0.9,0.98",
                         help="comma-separated thresholds")
    p_sweep.add_argument("--strictness", default="0,1,2",
                         help="comma-separated levels")
    p_sweep.add_argument("--direction", default="greater,lesser",
                         help="comma-separated directions")
    p_sweep.add_argument("--jobs", type=int, default=1)
    p_sweep.add_argument("--no-figures", dest="figures", action="store_false")
    p_sweep.set_defaults(func=cmd_sweep)

    p_seed = sub.add_parser("seed", help="rank seed equations")
    p_seed.add_argument("--corpus", required=True)
    p_seed.add_argument("--out", required=True)
    p_seed.add_argument("--predictions", default=None,
                        help="rank predicted graphs instead of labeled ones")
    p_seed.add_argument("--article", default=None,
                        help="print per-node weights for one article")
    p_seed.add_argument("--dot", action="store_true")
    p_seed.add_argument("--no-figures", dest="figures", action="store_false")
    p_seed.set_defaults(func=cmd_seed)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CorpusValidationError as exc:
        for violation in exc.violations:
            print(violation, file=sys.stderr)
        return 1
    except (CorpusLoadError, ArticleParseError, TransportError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except SystemExit as exc:
        if isinstance(exc.code, str):
            print(f"error: {exc.code}", file=sys.stderr)
            return 2
        raise


if __name__ == "__main__":
    sys.exit(main())
