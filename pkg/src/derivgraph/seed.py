"""Most-important-equation search by weight propagation.

The graph starts with a total mass of 10 units per equation, shared among
the roots in proportion to out-degree plus a bias (nodes without children
count as bare 1). A node then passes its full current weight down to its
children, split by the same contribution rule, and keeps its own weight;
distribution is additive, so a child under two parents accumulates both
shares. The breadth-first variant walks node levels and lets every node
distribute exactly once. The depth-first variant re-distributes at every
visit along every root-to-node path, which overcounts shared descendants;
both are kept because their disagreement is informative, and candidate
lists take the per-component argmax of each.
"""

from __future__ import annotations

from dataclasses import dataclass

from .graph import DerivationGraph, GraphCycleError, find_cycle

DEFAULT_UNIT_WEIGHT = 10.0
DEFAULT_BIAS = 1.0


@dataclass
class WeightMap:
    """Node weights plus the total mass that seeded them."""

    weights: dict[str, float]
    total_weight: float


def _contribution(graph: DerivationGraph, node: str, bias: float) -> float:
    out_degree = len(graph.adjacency[node])
    return out_degree + bias if out_degree > 0 else 1.0


def initialize_weights(graph: DerivationGraph, total_weight: float | None = None,
                       bias: float = DEFAULT_BIAS) -> WeightMap:
    """Split the total mass (10 per node by default) among the roots,
    proportional to each root's contribution; all other nodes start at 0."""
    if total_weight is None:
        total_weight = DEFAULT_UNIT_WEIGHT * len(graph.nodes)
    weights = {node: 0.0 for node in graph.nodes}
    if not graph.nodes:
        return WeightMap(weights, 0.0)
    roots = graph.roots()
    total_contribution = sum(_contribution(graph, r, bias) for r in roots)
    for root in roots:
        weights[root] = (_contribution(graph, root, bias)
                         / total_contribution * total_weight)
    return WeightMap(weights, total_weight)


def update_weights(graph: DerivationGraph, node: str, weights: WeightMap,
                   bias: float = DEFAULT_BIAS) -> WeightMap:
    """Distribute the node's entire current weight onto its children.

    Each child receives a share proportional to its contribution, added on
    top of whatever it already holds; the distributing node keeps its own
    weight. Mutates and returns the given WeightMap.
    """
    children = graph.adjacency[node]
    if not children:
        return weights
    total_contribution = sum(_contribution(graph, c, bias) for c in children)
    mass = weights.weights[node]
    for child in children:
        share = _contribution(graph, child, bias) / total_contribution
        weights.weights[child] += share * mass
    return weights


def seed_bfs(graph: DerivationGraph, total_weight: float | None = None,
             bias: float = DEFAULT_BIAS) -> WeightMap:
    """Level-ordered propagation: every node distributes exactly once,
    after all of its parents have. Raises on cyclic graphs."""
    weights = initialize_weights(graph, total_weight, bias)
    for level in graph.levels_grouped():
        for node in level:
            update_weights(graph, node, weights, bias)
    return weights


def seed_dfs(graph: DerivationGraph, total_weight: float | None = None,
             bias: float = DEFAULT_BIAS) -> WeightMap:
    """Depth-first propagation from each root in document order.

    Every visit distributes the node's full weight at that moment, so a
    node reached along several paths distributes several times. On forests
    this coincides with seed_bfs; on shared descendants it overcounts.
    """
    cycle = find_cycle(graph.nodes, graph.adjacency)
    if cycle is not None:
        raise GraphCycleError("cycle: " + " -> ".join(cycle))
    weights = initialize_weights(graph, total_weight, bias)

    def visit(node: str) -> None:
        update_weights(graph, node, weights, bias)
        for child in graph.adjacency[node]:
            visit(child)

    for root in graph.roots():
        visit(root)
    return weights


def likelihoods(weights: WeightMap) -> dict[str, float]:
    """Normalize final weights into a distribution over equations."""
    total = sum(weights.weights.values())
    if total <= 0:
        raise ValueError("all weights are zero; nothing to normalize")
    return {node: w / total for node, w in weights.weights.items()}


def most_important(weights: WeightMap,
                   node_order: list[str] | None = None) -> str:
    """Argmax of the weights; ties go to the latest node in document order."""
    order = node_order if node_order is not None else list(weights.weights)
    if not order:
        raise ValueError("empty weight map")
    best = order[0]
    for node in order[1:]:
        if weights.weights[node] >= weights.weights[best]:
            best = node
    return best


def seed_candidates(graph: DerivationGraph, total_weight: float | None = None,
                    bias: float = DEFAULT_BIAS) -> list[str]:
    """Candidate seed equations: for every weakly connected component, the
    BFS argmax and the DFS argmax, deduplicated, in document order."""
    if not graph.nodes:
        return []
    bfs = seed_bfs(graph, total_weight, bias)
    dfs = seed_dfs(graph, total_weight, bias)
    found: set[str] = set()
    for component in graph.weakly_connected_components():
        for weights in (bfs, dfs):
            found.add(most_important(weights, component))
    return [node for node in graph.nodes if node in found]
