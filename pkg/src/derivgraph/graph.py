"""Derivation graphs: directed acyclic graphs over equation IDs.

Nodes are equation IDs in document order; an edge (u, v) means v is derived
from u. The graph stays acyclic by construction: edges that would close a
cycle are either rejected on insertion or pruned afterwards, with first-come
insertion order deciding which edge of a would-be cycle survives.
"""

from __future__ import annotations


class UnknownNodeError(KeyError):
    """An edge endpoint names an equation ID that is not in the graph."""


class GraphCycleError(ValueError):
    """An operation that needs an acyclic graph was handed a cyclic one."""


def find_cycle(nodes: list[str], adjacency: dict[str, list[str]]) -> list[str] | None:
    """Return one directed cycle as a node path (first node repeated at the
    end), or None if the graph is acyclic.

    Iterative DFS coloring, independent of how the graph was built, so the
    corpus validator can use it on adjacency data loaded straight from disk.
    Targets outside ``nodes`` are skipped; they are reported elsewhere.
    """
    white, gray, black = 0, 1, 2
    color = {n: white for n in nodes}
    parent: dict[str, str] = {}
    for start in nodes:
        if color[start] != white:
            continue
        color[start] = gray
        stack = [(start, iter(adjacency.get(start, ())))]
        while stack:
            node, children = stack[-1]
            advanced = False
            for child in children:
                if child not in color:
                    continue
                if color[child] == gray:
                    path = [node]
                    while path[-1] != child:
                        path.append(parent[path[-1]])
                    path.reverse()
                    path.append(child)
                    return path
                if color[child] == white:
                    color[child] = gray
                    parent[child] = node
                    stack.append((child, iter(adjacency.get(child, ()))))
                    advanced = True
                    break
            if not advanced:
                color[node] = black
                stack.pop()
    return None


class DerivationGraph:
    """Adjacency-list DAG with deterministic, document-ordered iteration."""

    def __init__(self, nodes: list[str]) -> None:
        if len(set(nodes)) != len(nodes):
            raise ValueError("duplicate node IDs")
        self.nodes: list[str] = list(nodes)
        self.adjacency: dict[str, list[str]] = {n: [] for n in self.nodes}
        self.notices: list[str] = []
        self._index = {n: i for i, n in enumerate(self.nodes)}
        self._insertions: list[tuple[str, str]] = []

    @classmethod
    def from_adjacency(cls, nodes: list[str], adjacency: dict[str, list[str]],
                       check: bool = True) -> "DerivationGraph":
        graph = cls(nodes)
        for source, targets in adjacency.items():
            if source not in graph._index:
                raise UnknownNodeError(source)
            for target in targets:
                if target not in graph._index:
                    raise UnknownNodeError(target)
                if target not in graph.adjacency[source]:
                    graph.adjacency[source].append(target)
                    graph._insertions.append((source, target))
        if check:
            cycle = find_cycle(graph.nodes, graph.adjacency)
            if cycle is not None:
                raise GraphCycleError("cycle: " + " -> ".join(cycle))
        return graph

    def copy(self) -> "DerivationGraph":
        dup = DerivationGraph(self.nodes)
        dup.adjacency = {n: list(ts) for n, ts in self.adjacency.items()}
        dup.notices = list(self.notices)
        dup._insertions = list(self._insertions)
        return dup

    def index(self, node: str) -> int:
        try:
            return self._index[node]
        except KeyError:
            raise UnknownNodeError(node) from None

    def has_edge(self, u: str, v: str) -> bool:
        return v in self.adjacency.get(u, ())

    def edges(self) -> list[tuple[str, str]]:
        return [(u, v) for u in self.nodes for v in self.adjacency[u]]

    def edge_set(self) -> set[tuple[str, str]]:
        return set(self.edges())

    def edge_count(self) -> int:
        return sum(len(ts) for ts in self.adjacency.values())

    def would_close_cycle(self, u: str, v: str) -> bool:
        """True when adding u -> v creates a directed cycle (v reaches u)."""
        if u == v:
            return True
        seen = {v}
        stack = [v]
        while stack:
            node = stack.pop()
            if node == u:
                return True
            for child in self.adjacency[node]:
                if child not in seen:
                    seen.add(child)
                    stack.append(child)
        return False

    def add_edge(self, u: str, v: str, mode: str = "reject-cycles") -> bool:
        """Insert edge u -> v; returns True when the edge was added.

        reject-cycles: drop (with a notice) any edge that would close a
        cycle, self-loops included. allow-then-prune: insert unchecked and
        defer cycle removal to prune_cycles(), which replays insertions in
        order so the earliest edges win.
        """
        if mode not in ("reject-cycles", "allow-then-prune"):
            raise ValueError(f"unknown add_edge mode: {mode!r}")
        self.index(u)
        self.index(v)
        if self.has_edge(u, v):
            return False
        if u == v:
            self.notices.append(f"dropped self-loop {u} -> {v}")
            return False
        if mode == "reject-cycles" and self.would_close_cycle(u, v):
            self.notices.append(f"dropped cycle-closing edge {u} -> {v}")
            return False
        self.adjacency[u].append(v)
        self._insertions.append((u, v))
        return True

    def prune_cycles(self) -> list[tuple[str, str]]:
        """Replay insertions under reject-cycles; returns the edges dropped."""
        pending = list(self._insertions)
        self.adjacency = {n: [] for n in self.nodes}
        self._insertions = []
        dropped = []
        for u, v in pending:
            if not self.add_edge(u, v, mode="reject-cycles"):
                dropped.append((u, v))
        return dropped

    def in_degrees(self) -> dict[str, int]:
        degrees = {n: 0 for n in self.nodes}
        for targets in self.adjacency.values():
            for v in targets:
                degrees[v] += 1
        return degrees

    def parents(self) -> dict[str, list[str]]:
        rev: dict[str, list[str]] = {n: [] for n in self.nodes}
        for u in self.nodes:
            for v in self.adjacency[u]:
                rev[v].append(u)
        return rev

    def roots(self) -> list[str]:
        """Nodes with no incoming edge, in document order."""
        degrees = self.in_degrees()
        return [n for n in self.nodes if degrees[n] == 0]

    def is_acyclic(self) -> bool:
        return find_cycle(self.nodes, self.adjacency) is None

    def node_levels(self) -> dict[str, int]:
        """Level 1 for roots; otherwise one more than the deepest parent.

        Computed with a topological sweep; raises GraphCycleError when no
        topological order exists.
        """
        degrees = self.in_degrees()
        level = {n: 1 for n in self.nodes}
        queue = [n for n in self.nodes if degrees[n] == 0]
        head = 0
        processed = 0
        while head < len(queue):
            node = queue[head]
            head += 1
            processed += 1
            for child in self.adjacency[node]:
                if level[node] + 1 > level[child]:
                    level[child] = level[node] + 1
                degrees[child] -= 1
                if degrees[child] == 0:
                    queue.append(child)
        if processed != len(self.nodes):
            cycle = find_cycle(self.nodes, self.adjacency) or []
            raise GraphCycleError("cycle: " + " -> ".join(cycle))
        return {n: level[n] for n in self.nodes}

    def levels_grouped(self) -> list[list[str]]:
        """Nodes bucketed by level, document order inside each bucket."""
        levels = self.node_levels()
        if not levels:
            return []
        grouped: list[list[str]] = [[] for _ in range(max(levels.values()))]
        for node in self.nodes:
            grouped[levels[node] - 1].append(node)
        return grouped

    def weakly_connected_components(self) -> list[list[str]]:
        """Components of the underlying undirected graph, document order."""
        neighbours: dict[str, set[str]] = {n: set() for n in self.nodes}
        for u in self.nodes:
            for v in self.adjacency[u]:
                neighbours[u].add(v)
                neighbours[v].add(u)
        seen: set[str] = set()
        components = []
        for start in self.nodes:
            if start in seen:
                continue
            stack = [start]
            seen.add(start)
            members = {start}
            while stack:
                node = stack.pop()
                for other in neighbours[node]:
                    if other not in seen:
                        seen.add(other)
                        members.add(other)
                        stack.append(other)
            components.append([n for n in self.nodes if n in members])
        return components

    def to_dot(self, labels: dict[str, str] | None = None,
               weights: dict[str, float] | None = None,
               name: str = "derivation") -> str:
        """Render Graphviz DOT; nodes in document order, edges sorted."""
        lines = [f"digraph {name} {{"]
        for node in self.nodes:
            parts = []
            if labels and node in labels:
                parts.append(f"({labels[node]})")
            if weights and node in weights:
                parts.append(f"{weights[node]:.2f}")
            if parts:
                text = node + "\\n" + " ".join(parts)
                lines.append(f'    "{node}" [label="{text}"];')
            else:
                lines.append(f'    "{node}";')
        for u, v in sorted(self.edges()):
            lines.append(f'    "{u}" -> "{v}";')
        lines.append("}")
        return "\n".join(lines) + "\n"

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, DerivationGraph):
            return NotImplemented
        return self.nodes == other.nodes and self.edge_set() == other.edge_set()

    def __repr__(self) -> str:  # pragma: no cover - debugging aid
        return f"DerivationGraph(nodes={len(self.nodes)}, edges={self.edge_count()})"
