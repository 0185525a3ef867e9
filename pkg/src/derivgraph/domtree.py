"""Small lenient DOM built on html.parser.

Article HTML in the wild is rarely well formed, so the builder never raises
on stray end tags or unclosed elements; it recovers the way browsers do,
by popping to the nearest matching open tag and ignoring the rest.
"""

from __future__ import annotations

from html import escape
from html.parser import HTMLParser
from typing import Iterator

VOID_TAGS = {
    "area", "base", "br", "col", "embed", "hr", "img", "input",
    "link", "meta", "param", "source", "track", "wbr",
}


class DomNode:
    """One element or text node; ``tag`` is None for text nodes."""

    __slots__ = ("tag", "attrs", "children", "parent", "text")

    def __init__(self, tag: str | None, attrs: dict[str, str] | None = None,
                 text: str = "") -> None:
        self.tag = tag
        self.attrs: dict[str, str] = attrs or {}
        self.children: list[DomNode] = []
        self.parent: DomNode | None = None
        self.text = text

    def append(self, child: "DomNode") -> None:
        child.parent = self
        self.children.append(child)

    @property
    def is_text(self) -> bool:
        return self.tag is None

    def iter_nodes(self) -> Iterator["DomNode"]:
        """Depth-first pre-order walk, self included."""
        stack = [self]
        while stack:
            node = stack.pop()
            yield node
            stack.extend(reversed(node.children))

    def find_all(self, tag: str) -> list["DomNode"]:
        return [n for n in self.iter_nodes() if n.tag == tag]

    def element_children(self) -> list["DomNode"]:
        return [c for c in self.children if c.tag is not None]

    def ancestors(self) -> Iterator["DomNode"]:
        node = self.parent
        while node is not None:
            yield node
            node = node.parent

    def get_text(self) -> str:
        return "".join(n.text for n in self.iter_nodes() if n.is_text)

    def serialize(self) -> str:
        """Render the subtree back to markup, preserving attribute order."""
        if self.is_text:
            return escape(self.text, quote=False)
        parts = []
        if self.tag != "#root":
            attrs = "".join(
                f' {name}="{escape(value, quote=True)}"'
                for name, value in self.attrs.items()
            )
            parts.append(f"<{self.tag}{attrs}>")
        parts.extend(child.serialize() for child in self.children)
        if self.tag != "#root" and self.tag not in VOID_TAGS:
            parts.append(f"</{self.tag}>")
        return "".join(parts)

    def __repr__(self) -> str:  # pragma: no cover - debugging aid
        if self.is_text:
            return f"DomNode(text={self.text!r})"
        return f"DomNode(<{self.tag}> children={len(self.children)})"


class _TreeBuilder(HTMLParser):
    def __init__(self) -> None:
        super().__init__(convert_charrefs=True)
        self.root = DomNode("#root")
        self.stack = [self.root]

    def handle_starttag(self, tag: str, attrs: list[tuple[str, str | None]]) -> None:
        node = DomNode(tag, {name: value or "" for name, value in attrs})
        self.stack[-1].append(node)
        if tag not in VOID_TAGS:
            self.stack.append(node)

    def handle_startendtag(self, tag: str, attrs: list[tuple[str, str | None]]) -> None:
        self.stack[-1].append(DomNode(tag, {name: value or "" for name, value in attrs}))

    def handle_endtag(self, tag: str) -> None:
        for depth in range(len(self.stack) - 1, 0, -1):
            if self.stack[depth].tag == tag:
                del self.stack[depth:]
                return
        # stray end tag: ignore

    def handle_data(self, data: str) -> None:
        if data:
            self.stack[-1].append(DomNode(None, text=data))


def parse_html(markup: str) -> DomNode:
    """Parse markup into a DomNode tree rooted at a synthetic #root node."""
    builder = _TreeBuilder()
    builder.feed(markup)
    builder.close()
    return builder.root
