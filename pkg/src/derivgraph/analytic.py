"""Classical derivation-graph extractors.

Four families, all operating on a ParsedArticle and returning a
DerivationGraph over its equation IDs:

- brute_force: an edge u -> v exists when the sentence introducing v
  explicitly cites u's display number.
- segmentation: the same citation test over a wider window, the paragraph
  above the equation plus the first sentence after it.
- common_substring_extract: edges between equation pairs whose alttexts
  share a long contiguous substring relative to the shorter string.
- token_similarity_extract / subtree_extract: similarity of alttext token
  sets, or of operator-tree structure, gated by tunable thresholds.

Candidate edges run earlier -> later in document order except where a
similarity direction rule says otherwise; any edge that would close a cycle
is dropped in encounter order, first come first kept.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .domtree import DomNode, parse_html
from .graph import DerivationGraph
from .ingest import ParsedArticle, find_equation_references

_TOKEN_RE = re.compile(r"[0-9A-Za-z]+|[^\s0-9A-Za-z]")


class MathMLError(ValueError):
    """A MathML fragment could not be turned into an operator tree."""


def _reference_edges(article: ParsedArticle, spans_for) -> DerivationGraph:
    graph = DerivationGraph([eq.eq_id for eq in article.equations])
    known = article.known_numbers()
    for eq in article.equations:
        segment = article.segments[eq.eq_id]
        for span in spans_for(segment):
            window = article.span_text(span)
            for _, number in find_equation_references(window, known):
                source = article.equation_by_number(number)
                if source is not None and source.ordinal < eq.ordinal:
                    graph.add_edge(source.eq_id, eq.eq_id)
    return graph


def brute_force(article: ParsedArticle) -> DerivationGraph:
    """Edges from explicit citations in the sentence introducing each
    equation (the last sentence of the paragraph directly above it)."""
    return _reference_edges(article, lambda seg: (seg.containing_sentence,))


def segmentation(article: ParsedArticle) -> DerivationGraph:
    """Citation search widened to the whole paragraph above the equation
    plus the first sentence after it; supersets brute_force edges."""
    return _reference_edges(
        article, lambda seg: (seg.paragraph_before, seg.sentence_after))


def lcs_rating(a: str, b: str, denominator: str = "min") -> tuple[int, float]:
    """Length of the longest common contiguous substring of a and b, and
    that length over the shorter (denominator="min", default) or longer
    (denominator="max") string length. Either string empty gives (0, 0.0).
    """
    if denominator not in ("min", "max"):
        raise ValueError(f"unknown denominator rule: {denominator!r}")
    if not a or not b:
        return 0, 0.0
    best = 0
    previous = [0] * (len(b) + 1)
    for ca in a:
        row = [0] * (len(b) + 1)
        for j, cb in enumerate(b, 1):
            if ca == cb:
                run = previous[j - 1] + 1
                row[j] = run
                if run > best:
                    best = run
        previous = row
    base = min(len(a), len(b)) if denominator == "min" else max(len(a), len(b))
    return best, best / base


def common_substring_extract(article: ParsedArticle, threshold: float,
                             denominator: str = "min") -> DerivationGraph:
    """Edge earlier -> later when the alttext substring ratio beats the
    threshold (strictly)."""
    graph = DerivationGraph([eq.eq_id for eq in article.equations])
    eqs = article.equations
    for i, first in enumerate(eqs):
        for second in eqs[i + 1:]:
            _, ratio = lcs_rating(first.alttext, second.alttext, denominator)
            if ratio > threshold:
                graph.add_edge(first.eq_id, second.eq_id)
    return graph


def tokenize_alttext(alttext: str) -> set[str]:
    """Deduplicated tokens: maximal alphanumeric runs plus every single
    non-alphanumeric, non-whitespace character."""
    return set(_TOKEN_RE.findall(alttext))


@dataclass(frozen=True)
class TokenSimParams:
    """Hyper-parameters of the token-set similarity extractor.

    strictness: 2 requires both containment percentages above threshold,
    1 at least one, 0 none (every pair links). direction chooses edge
    orientation from the percentage comparison; "greater" points the edge
    from the better-contained equation, "lesser" flips it.
    """

    strictness: int = 2
    direction: str = "greater"
    threshold: float = 0.98

    def __post_init__(self) -> None:
        if self.strictness not in (0, 1, 2):
            raise ValueError(f"strictness must be 0, 1 or 2: {self.strictness!r}")
        if self.direction not in ("greater", "lesser"):
            raise ValueError(f"direction must be greater or lesser: {self.direction!r}")
        if not 0.0 <= self.threshold <= 1.0:
            raise ValueError(f"threshold must lie in [0, 1]: {self.threshold!r}")


def token_containments(first: set[str], second: set[str]) -> tuple[float, float]:
    """(fraction of first's tokens found in second, and vice versa)."""
    shared = len(first & second)
    return shared / len(first), shared / len(second)


def token_similarity_extract(article: ParsedArticle,
                             params: TokenSimParams) -> DerivationGraph:
    """Token-set containment extractor over document-ordered pairs.

    Both comparisons are strict (> threshold). On equal percentages the
    else-branch fires, so "greater" orients a tied pair later -> earlier.
    Pairs with an empty token set on either side are skipped with a notice;
    cycle-closing edges are dropped in pair order.
    """
    graph = DerivationGraph([eq.eq_id for eq in article.equations])
    eqs = article.equations
    token_sets = {eq.eq_id: tokenize_alttext(eq.alttext) for eq in eqs}
    for i, first in enumerate(eqs):
        for second in eqs[i + 1:]:
            set1 = token_sets[first.eq_id]
            set2 = token_sets[second.eq_id]
            if not set1 or not set2:
                graph.notices.append(
                    f"skipped pair ({first.eq_id}, {second.eq_id}): empty token set")
                continue
            p12, p21 = token_containments(set1, set2)
            if params.strictness == 2:
                linked = p12 > params.threshold and p21 > params.threshold
            elif params.strictness == 1:
                linked = p12 > params.threshold or p21 > params.threshold
            else:
                linked = True
            if not linked:
                continue
            if p12 > p21:
                u, v = ((first, second) if params.direction == "greater"
                        else (second, first))
            else:
                u, v = ((second, first) if params.direction == "greater"
                        else (first, second))
            graph.add_edge(u.eq_id, v.eq_id)
    return graph


@dataclass(frozen=True)
class OpTree:
    """Operator tree distilled from presentation MathML.

    kind is one of operator, identifier, number, group. Structural equality
    (shape plus symbols) doubles as the subtree fingerprint.
    """

    kind: str
    symbol: str
    children: tuple["OpTree", ...] = ()


_LEAF_KINDS = {"mi": "identifier", "mo": "operator", "mn": "number"}
_BINARY_OPS = {"msub": "_", "msup": "^", "mfrac": "/"}


def _convert(node: DomNode) -> OpTree:
    tag = node.tag or ""
    if tag in _LEAF_KINDS:
        return OpTree(_LEAF_KINDS[tag], node.get_text().strip())
    children = tuple(
        _convert(child) for child in node.element_children()
        if child.tag not in ("annotation", "annotation-xml")
    )
    if tag in _BINARY_OPS:
        return OpTree("operator", _BINARY_OPS[tag], children)
    if tag == "msqrt":
        if len(children) == 1:
            return OpTree("operator", "√", children)
        return OpTree("operator", "√", (OpTree("group", "mrow", children),))
    return OpTree("group", tag, children)


def build_optree(mathml: str) -> OpTree:
    """Parse a presentation MathML fragment into an OpTree.

    mi/mo/mn become identifier/operator/number leaves, mrow a group,
    msub/msup/mfrac the operators _/^//, msqrt the operator √; anything
    unrecognized becomes a group node so unknown markup still compares
    structurally. Raises MathMLError when the fragment has no element.
    """
    root = parse_html(mathml)
    elements = root.element_children()
    if not elements:
        raise MathMLError("fragment contains no element")
    if len(elements) == 1:
        return _convert(elements[0])
    return OpTree("group", "#fragment", tuple(_convert(e) for e in elements))


def subtree_fingerprints(tree: OpTree) -> set[OpTree]:
    """All distinct subtrees of the tree, the tree itself included."""
    found: set[OpTree] = set()
    stack = [tree]
    while stack:
        node = stack.pop()
        if node not in found:
            found.add(node)
            stack.extend(node.children)
    return found


def subtree_similarity(first: OpTree, second: OpTree) -> float:
    """Shared distinct subtrees over the smaller distinct-subtree count.

    1.0 for structurally identical trees, 0.0 when nothing is shared.
    """
    fp1 = subtree_fingerprints(first)
    fp2 = subtree_fingerprints(second)
    return len(fp1 & fp2) / min(len(fp1), len(fp2))


def subtree_extract(article: ParsedArticle, threshold: float) -> DerivationGraph:
    """Combine explicit citations with operator-tree similarity.

    For each document-ordered pair, an explicit mention (segmentation
    windows) creates the edge; otherwise similarity >= threshold does.
    Equations whose MathML cannot be parsed drop out of the similarity
    comparison with a notice.
    """
    graph = segmentation(article)
    trees: dict[str, OpTree | None] = {}
    for eq in article.equations:
        try:
            trees[eq.eq_id] = build_optree(eq.mathml)
        except MathMLError as exc:
            trees[eq.eq_id] = None
            graph.notices.append(f"no operator tree for {eq.eq_id}: {exc}")
    eqs = article.equations
    for i, first in enumerate(eqs):
        for second in eqs[i + 1:]:
            if graph.has_edge(first.eq_id, second.eq_id):
                continue
            t1 = trees[first.eq_id]
            t2 = trees[second.eq_id]
            if t1 is None or t2 is None:
                continue
            if subtree_similarity(t1, t2) >= threshold:
                graph.add_edge(first.eq_id, second.eq_id)
    return graph
