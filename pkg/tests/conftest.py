"""Shared fixtures: the bundled sample corpus and two hand-checked graphs."""

from __future__ import annotations

import html as html_escape
import json
from pathlib import Path

import pytest

from derivgraph import (DerivationGraph, GroundTruthEntry, ParsedArticle,
                        load_corpus, parse_article)

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"
ARTICLE_IDS = ("fx.0001", "fx.0002", "fx.0003")

# Seven-equation graph whose propagated weights are known by hand:
# E3/E4/E7 are roots at 23.33 each; E2 collects both root shares (46.66)
# and splits 1:2 over E1/E5; E6 ends highest at 54.44.
WEIGHT_GRAPH_NODES = ["S2.E1", "S2.E2", "S2.E3", "S2.E4",
                      "S3.E5", "S3.E6", "S3.E7"]
WEIGHT_GRAPH_EDGES = [("S2.E2", "S2.E1"), ("S2.E2", "S3.E5"),
                      ("S2.E4", "S2.E2"), ("S2.E3", "S2.E2"),
                      ("S3.E5", "S3.E6"), ("S3.E7", "S3.E6")]
WEIGHT_GRAPH_BFS = {"S2.E1": 15.5556, "S2.E2": 46.6667, "S2.E3": 23.3333,
                    "S2.E4": 23.3333, "S3.E5": 31.1111, "S3.E6": 54.4444,
                    "S3.E7": 23.3333}

# Ten-equation graph with every level from 1 to 4 populated.
LEVEL_GRAPH_NODES = [f"S2.E{k}" for k in range(1, 11)]
LEVEL_GRAPH_EDGES = [("S2.E1", "S2.E2"), ("S2.E2", "S2.E5"),
                     ("S2.E1", "S2.E10"), ("S2.E7", "S2.E8"),
                     ("S2.E8", "S2.E9"), ("S2.E9", "S2.E10"),
                     ("S2.E3", "S2.E10"), ("S2.E3", "S2.E4"),
                     ("S2.E4", "S2.E6")]
LEVEL_GRAPH_LEVELS = {"S2.E1": 1, "S2.E2": 2, "S2.E3": 1, "S2.E4": 2,
                      "S2.E5": 3, "S2.E6": 3, "S2.E7": 1, "S2.E8": 2,
                      "S2.E9": 3, "S2.E10": 4}

# Seven-equation labeled record with two components and a weight tie
# between equations 3 and 5 that resolves to the later one.
SAMPLE_RECORD = {
    "Article ID": "1409.0466",
    "Equation ID": ["S3.E1", "S3.E2", "S3.E3", "S3.E4", "S3.E5",
                    "S5.E6", "S5.E7"],
    "Adjacency List": {
        "S3.E1": ["S3.E3", "S3.E5"],
        "S3.E2": ["S3.E3"],
        "S3.E3": [None],
        "S3.E4": ["S3.E5"],
        "S3.E5": [None],
        "S5.E6": [None],
        "S5.E7": [None],
    },
    "Equation Number": {
        "S3.E1": "1", "S3.E2": "2", "S3.E3": "3", "S3.E4": "4",
        "S3.E5": "5", "S5.E6": "6", "S5.E7": "7",
    },
    "Most Important Equation": "S3.E5",
}


def graph_from(nodes: list[str],
               edges: list[tuple[str, str]]) -> DerivationGraph:
    graph = DerivationGraph(list(nodes))
    for u, v in edges:
        graph.add_edge(u, v)
    return graph


def synth_article(equations: list[dict], article_id: str = "synth",
                  trailer: str = "") -> ParsedArticle:
    """Build a one-section article from equation specs.

    Each spec may set "alttext", "math" (inner MathML), and "intro" (the
    paragraph placed directly above the equation). Equation k gets the ID
    S1.Ek and the display number (k).
    """
    parts = []
    for k, spec in enumerate(equations, start=1):
        intro = spec.get("intro", f"Plain paragraph number {k} follows.")
        alttext = html_escape.escape(spec.get("alttext", f"x_{{{k}}}"),
                                     quote=True)
        math = spec.get("math", "<mi>x</mi>")
        parts.append(f'<div id="S1.p{k}" class="ltx_para">'
                     f'<p class="ltx_p">{intro}</p></div>')
        parts.append(
            f'<table id="S1.E{k}" class="ltx_equation ltx_eqn_table"><tr>'
            f'<td class="ltx_eqn_cell"><math id="S1.E{k}.m1" display="block" '
            f'alttext="{alttext}">{math}</math></td>'
            f'<td class="ltx_eqn_cell ltx_eqn_eqno"><span class="ltx_tag '
            f'ltx_tag_equation"><span class="ltx_text">({k})</span></span>'
            f'</td></tr></table>')
    if trailer:
        parts.append(f'<div id="S1.p99" class="ltx_para">'
                     f'<p class="ltx_p">{trailer}</p></div>')
    markup = ('<html><body><article><section id="S1">'
              + "".join(parts) + "</section></article></body></html>")
    return parse_article(markup, article_id)


@pytest.fixture(scope="session")
def weight_graph() -> DerivationGraph:
    return graph_from(WEIGHT_GRAPH_NODES, WEIGHT_GRAPH_EDGES)


@pytest.fixture(scope="session")
def level_graph() -> DerivationGraph:
    return graph_from(LEVEL_GRAPH_NODES, LEVEL_GRAPH_EDGES)


@pytest.fixture
def sample_record() -> dict:
    return json.loads(json.dumps(SAMPLE_RECORD))


@pytest.fixture(scope="session")
def corpus_path() -> Path:
    return FIXTURES / "corpus.json"


@pytest.fixture(scope="session")
def corpus_entries(corpus_path: Path) -> list[GroundTruthEntry]:
    return load_corpus(corpus_path)


@pytest.fixture(scope="session")
def articles_dir() -> Path:
    return FIXTURES / "articles"


@pytest.fixture(scope="session")
def parsed_articles(articles_dir: Path) -> dict[str, ParsedArticle]:
    return {
        article_id: parse_article(
            (articles_dir / f"{article_id}.html").read_bytes(), article_id)
        for article_id in ARTICLE_IDS
    }


@pytest.fixture(scope="session")
def mock_llm_path() -> Path:
    return FIXTURES / "llm_mock.json"
