"""Article ingestion: HTML to linearized text, key equations, and segments.

A "key equation" is a display equation the article numbers: its math element
(or an enclosing block) carries a visible parenthesized label like "(8)" or
an anchor ID in the S<k>.E<m> / S<k>.Ex<m> style. Unnumbered math is folded
into the running text. Each key equation is replaced in the linearized text
by a placeholder of the form ⟪eq_id⟫ occupying its own paragraph, so text
windows around equations never overlap equation markup.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from .domtree import DomNode, parse_html

Span = tuple[int, int]

EQ_ID_RE = re.compile(r"^S\d+\.Ex?\d+$")
_EQ_ID_NUMBER_RE = re.compile(r"\.Ex?(\d+)$")
_LABEL_RE = re.compile(r"^\(\s*([^\s()]+)\s*\)$")
_PLACEHOLDER_RE = re.compile(r"^⟪([^⟫]+)⟫$")

_BLOCK_TAGS = {
    "p", "div", "section", "article", "table", "tbody", "tr", "td", "th",
    "h1", "h2", "h3", "h4", "h5", "h6", "ul", "ol", "li", "dl", "dt", "dd",
    "figure", "figcaption", "blockquote", "header", "footer", "nav", "main",
    "pre", "caption",
}
_SKIP_TAGS = {"script", "style", "head", "noscript", "template",
              "annotation", "annotation-xml"}

# Sentence terminators never fire right after these abbreviations.
_PROTECTED_RE = re.compile(
    r"(?:\b(?:Eqs?|Figs?|Refs?|Sec|cf|vs)\.|\bet\s+al\.|\bi\.e\.|\be\.g\.)$",
    re.IGNORECASE,
)
_TERMINATOR_RE = re.compile(r"[.!?]")

# Surface forms that count as an equation reference. Parenthesized numbers
# cover "(4)", "Eq. (4)", "Eqs. (4)", "Equation (4)"; the word form covers
# "equation 4" and "Eq. 4". Only numbers the caller knows about are kept.
_PAREN_REF_RE = re.compile(r"\(\s*([^\s()]+)\s*\)")
_WORD_REF_RE = re.compile(r"\b(?:equations?|eqs?\.)\s+(\d+(?:\.\d+)?)",
                          re.IGNORECASE)


class ArticleParseError(ValueError):
    """The article bytes could not be decoded or parsed."""


@dataclass(frozen=True)
class KeyEquation:
    """One numbered display equation as found in the article."""

    eq_id: str
    number_label: str
    alttext: str
    mathml: str
    position: int
    ordinal: int


@dataclass(frozen=True)
class TextSegment:
    """Character spans tied to one equation, all into the article text."""

    paragraph_before: Span
    sentence_after: Span
    containing_sentence: Span


@dataclass
class ParsedArticle:
    article_id: str
    equations: list[KeyEquation]
    text: str
    segments: dict[str, TextSegment] = field(default_factory=dict)

    def span_text(self, span: Span) -> str:
        return self.text[span[0]:span[1]]

    def equation_by_id(self, eq_id: str) -> KeyEquation:
        for eq in self.equations:
            if eq.eq_id == eq_id:
                return eq
        raise KeyError(eq_id)

    def equation_by_number(self, number_label: str) -> KeyEquation | None:
        for eq in self.equations:
            if eq.number_label == number_label:
                return eq
        return None

    def known_numbers(self) -> set[str]:
        return {eq.number_label for eq in self.equations}


def placeholder(eq_id: str) -> str:
    return f"⟪{eq_id}⟫"


def split_sentences(text: str) -> list[Span]:
    """Split text into sentence spans that partition it exactly.

    A sentence ends at '.', '!' or '?' followed by whitespace and a capital
    letter or digit, unless the terminator belongs to a protected
    abbreviation (Eq., Fig., et al., i.e., ...). Trailing text without a
    terminator forms the final sentence.
    """
    if not text:
        return []
    breaks = []
    for match in _TERMINATOR_RE.finditer(text):
        i = match.start()
        if not re.match(r"\s+[A-Z0-9]", text[i + 1:]):
            continue
        if _PROTECTED_RE.search(text[:i + 1]):
            continue
        breaks.append(i + 1)
    spans = []
    start = 0
    for stop in breaks:
        spans.append((start, stop))
        start = stop
    spans.append((start, len(text)))
    return spans


def find_equation_references(text: str, known_numbers: set[str]) -> list[tuple[int, str]]:
    """Find equation references in text, as (offset, display number) pairs.

    Multi-references like "(3) and (4)" yield one hit per number. Numbers
    absent from known_numbers are ignored, so prose like "see Section (4)"
    only ever matches when the article really has an equation (4).
    """
    hits: list[tuple[int, str]] = []
    for match in _PAREN_REF_RE.finditer(text):
        number = match.group(1)
        if number in known_numbers:
            hits.append((match.start(), number))
    for match in _WORD_REF_RE.finditer(text):
        number = match.group(1)
        if number in known_numbers:
            hits.append((match.start(), number))
    hits.sort()
    return hits


def _collapse(parts: list[str]) -> str:
    return re.sub(r"\s+", " ", "".join(parts)).strip()


def _math_text(node: DomNode) -> str:
    """Visible text of a math element, skipping annotation subtrees."""
    parts = []
    stack = list(node.children)
    while stack:
        item = stack.pop(0)
        if item.is_text:
            parts.append(item.text)
        elif item.tag not in ("annotation", "annotation-xml"):
            stack = item.children + stack
    return _collapse(parts)


def _visible_label(scope: DomNode) -> str | None:
    """First parenthesized tag text in scope, skipping math subtrees."""
    stack = [scope]
    while stack:
        node = stack.pop(0)
        if node.tag == "math":
            continue
        if node.is_text:
            match = _LABEL_RE.match(node.text.strip())
            if match:
                return match.group(1)
        else:
            stack = node.children + stack
    return None


def _equation_containers(root: DomNode) -> dict[int, tuple[DomNode, str, str, DomNode]]:
    """Map id(container node) -> (container, eq_id, number label, math node).

    The container is the outermost element whose ID matches the anchor
    pattern; failing that, the table (or row) holding a visible "(N)" tag.
    """
    containers: dict[int, tuple[DomNode, str, str, DomNode]] = {}
    claimed: set[int] = set()
    for math in root.find_all("math"):
        if any(id(a) in claimed for a in math.ancestors()) or id(math) in claimed:
            continue
        chain = [math] + list(math.ancestors())
        anchored = [n for n in chain
                    if n.tag is not None and EQ_ID_RE.match(n.attrs.get("id", ""))]
        container = anchored[-1] if anchored else None
        eq_id = container.attrs.get("id") if container is not None else None

        label_scope = container
        if label_scope is None:
            for node in chain:
                if node.tag in ("tr", "table"):
                    label_scope = node
                    break
        label = _visible_label(label_scope) if label_scope is not None else None

        if container is None:
            if label is None:
                continue  # unnumbered math: not a key equation
            container = label_scope if label_scope is not None else math
            eq_id = (container.attrs.get("id") or math.attrs.get("id")
                     or f"eq:{label}")
        if label is None:
            match = _EQ_ID_NUMBER_RE.search(eq_id or "")
            if match is None:
                continue
            label = match.group(1)
        containers[id(container)] = (container, eq_id, label, math)
        claimed.add(id(container))
        for node in container.iter_nodes():
            claimed.add(id(node))
    return containers


def parse_article(data: bytes | str, article_id: str) -> ParsedArticle:
    """Parse article HTML into linearized text plus its key equations.

    Raises ArticleParseError when the input cannot be decoded as UTF-8.
    Articles without numbered equations parse to an empty equation list.
    """
    if isinstance(data, bytes):
        try:
            markup = data.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise ArticleParseError(f"{article_id}: input is not UTF-8 ({exc})") from exc
    else:
        markup = data
    root = parse_html(markup)
    containers = _equation_containers(root)

    chunks: list[str] = []
    eq_chunks: list[tuple[int, str, str, DomNode]] = []  # chunk idx, id, label, math
    current: list[str] = []

    def flush() -> None:
        text = _collapse(current)
        current.clear()
        if text:
            chunks.append(text)

    def walk(node: DomNode) -> None:
        if node.is_text:
            current.append(node.text)
            return
        if node.tag in _SKIP_TAGS:
            return
        info = containers.get(id(node))
        if info is not None:
            _, eq_id, label, math = info
            flush()
            eq_chunks.append((len(chunks), eq_id, label, math))
            chunks.append(placeholder(eq_id))
            return
        if node.tag == "math":
            alt = node.attrs.get("alttext") or _math_text(node)
            current.append(f" {alt} ")
            return
        if node.tag in _BLOCK_TAGS:
            flush()
            for child in node.children:
                walk(child)
            flush()
            return
        for child in node.children:
            walk(child)

    walk(root)
    flush()

    text = "\n\n".join(chunks)
    offsets = []
    pos = 0
    for chunk in chunks:
        offsets.append(pos)
        pos += len(chunk) + 2

    equations = []
    for ordinal, (chunk_idx, eq_id, label, math) in enumerate(eq_chunks):
        mathml = math.serialize()
        alttext = math.attrs.get("alttext", "").strip() or _math_text(math)
        equations.append(KeyEquation(
            eq_id=eq_id,
            number_label=label,
            alttext=alttext,
            mathml=mathml,
            position=offsets[chunk_idx],
            ordinal=ordinal,
        ))

    article = ParsedArticle(article_id=article_id, equations=equations, text=text)
    article.segments = segment_text(article)
    return article


def _chunk_spans(text: str) -> list[Span]:
    spans = []
    pos = 0
    for chunk in text.split("\n\n") if text else []:
        spans.append((pos, pos + len(chunk)))
        pos += len(chunk) + 2
    return spans


def segment_text(article: ParsedArticle) -> dict[str, TextSegment]:
    """Compute the text windows used by the extraction algorithms.

    paragraph_before is the nearest text paragraph above the equation; when
    two equations share a paragraph it stops at the earlier equation.
    sentence_after is the first full sentence following the equation, left
    empty when that sentence introduces the next equation instead (its
    paragraph directly precedes another equation). containing_sentence is
    the final sentence of paragraph_before, the usual site of explicit
    "substituting (4)" citations.
    """
    spans = _chunk_spans(article.text)
    kinds = []
    by_eq_id: dict[str, int] = {}
    for idx, (a, b) in enumerate(spans):
        match = _PLACEHOLDER_RE.match(article.text[a:b])
        kinds.append(match.group(1) if match else None)
        if match:
            by_eq_id[match.group(1)] = idx

    segments: dict[str, TextSegment] = {}
    for eq in article.equations:
        idx = by_eq_id.get(eq.eq_id)
        if idx is None:
            empty = (eq.position, eq.position)
            segments[eq.eq_id] = TextSegment(empty, empty, empty)
            continue
        eq_start, eq_end = spans[idx]

        if idx > 0 and kinds[idx - 1] is None:
            paragraph_before = spans[idx - 1]
        else:
            paragraph_before = (eq_start, eq_start)

        sentence_after: Span = (eq_end, eq_end)
        if idx + 1 < len(spans) and kinds[idx + 1] is None:
            follows_equation = idx + 2 < len(spans) and kinds[idx + 2] is not None
            if not follows_equation:
                chunk_start, _ = spans[idx + 1]
                chunk = article.span_text(spans[idx + 1])
                first = split_sentences(chunk)[0]
                sentence_after = (chunk_start + first[0], chunk_start + first[1])

        if paragraph_before[0] == paragraph_before[1]:
            containing = (eq_start, eq_start)
        else:
            para = article.span_text(paragraph_before)
            last = split_sentences(para)[-1]
            containing = (paragraph_before[0] + last[0], paragraph_before[0] + last[1])

        segments[eq.eq_id] = TextSegment(paragraph_before, sentence_after, containing)
    return segments
