"""Figure rendering for the report paths.

Consumes the rows the evaluation module emits and draws them with
matplotlib next to the CSV/JSON output: metric curves for hyper-parameter
sweeps, per-article metric bars for evaluations, and DAG drawings laid out
by node level (deterministic, no spring jitter). Kept separate from the
scoring code so reports stay plain data.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import networkx as nx

from .evaluate import EvaluationReport, SweepRow
from .graph import DerivationGraph

_METRIC_NAMES = ("accuracy", "precision", "recall", "f1")
_SAVE_OPTS = {"dpi": 150, "metadata": {"Software": None}}


def save_sweep_figures(rows: list[SweepRow], out_dir: str | Path,
                       stem: str = "sweep") -> list[Path]:
    """One metrics-vs-threshold figure per (strictness, direction) group."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    groups: dict[tuple[int, str], list[SweepRow]] = {}
    for row in rows:
        groups.setdefault((row.strictness, row.direction), []).append(row)
    paths = []
    for (strictness, direction), group in sorted(groups.items()):
        group = sorted(group, key=lambda r: r.threshold)
        fig, ax = plt.subplots(figsize=(6.4, 4.2))
        for name in _METRIC_NAMES:
            points = [(r.threshold, getattr(r.metrics, name))
                      for r in group if getattr(r.metrics, name) is not None]
            if points:
                ax.plot([p[0] for p in points], [p[1] for p in points],
                        marker="o", label=name)
        ax.set_xlabel("threshold")
        ax.set_ylabel("metric value")
        ax.set_ylim(-0.02, 1.02)
        ax.set_title(f"token similarity, strictness={strictness}, "
                     f"direction={direction}")
        ax.grid(True, alpha=0.3)
        ax.legend(loc="best")
        path = out_dir / f"{stem}_s{strictness}_{direction}.png"
        fig.savefig(path, **_SAVE_OPTS)
        plt.close(fig)
        paths.append(path)
    return paths


def save_eval_figure(report: EvaluationReport, path: str | Path) -> Path:
    """Grouped per-article metric bars, micro values appended last."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    labels = [row.article_id for row in report.rows] + ["micro"]
    series = {name: [] for name in _METRIC_NAMES}
    for row in report.rows:
        for name in _METRIC_NAMES:
            value = getattr(row.metrics, name)
            series[name].append(0.0 if value is None else value)
    for name in _METRIC_NAMES:
        value = getattr(report.micro, name)
        series[name].append(0.0 if value is None else value)
    width = 0.2
    fig, ax = plt.subplots(figsize=(max(6.4, 1.2 * len(labels)), 4.2))
    for offset, name in enumerate(_METRIC_NAMES):
        xs = [i + (offset - 1.5) * width for i in range(len(labels))]
        ax.bar(xs, series[name], width=width, label=name)
    ax.set_xticks(range(len(labels)))
    ax.set_xticklabels(labels, rotation=30, ha="right")
    ax.set_ylim(0, 1.05)
    ax.set_ylabel("metric value")
    ax.set_title("extraction quality per article")
    ax.grid(True, axis="y", alpha=0.3)
    ax.legend(loc="best")
    fig.tight_layout()
    fig.savefig(path, **_SAVE_OPTS)
    plt.close(fig)
    return path


def save_graph_figure(graph: DerivationGraph, path: str | Path,
                      labels: dict[str, str] | None = None,
                      weights: dict[str, float] | None = None,
                      title: str = "") -> Path:
    """Draw the DAG with nodes positioned by level (roots on top)."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    dig = nx.DiGraph()
    dig.add_nodes_from(graph.nodes)
    dig.add_edges_from(graph.edges())
    levels = graph.node_levels()
    for node in dig.nodes:
        dig.nodes[node]["level"] = levels.get(node, 1)
    if len(dig) == 0:
        positions = {}
    else:
        positions = nx.multipartite_layout(dig, subset_key="level",
                                           align="horizontal")
        positions = {n: (x, -y) for n, (x, y) in positions.items()}
    text = {}
    for node in graph.nodes:
        parts = [labels[node] if labels and node in labels else node]
        if weights and node in weights:
            parts.append(f"{weights[node]:.2f}")
        text[node] = "\n".join(parts)
    fig, ax = plt.subplots(figsize=(7.0, 5.0))
    nx.draw_networkx_nodes(dig, positions, ax=ax, node_size=1600,
                           node_color="#dce9f5", edgecolors="#3a6ea5")
    nx.draw_networkx_edges(dig, positions, ax=ax, arrows=True,
                           arrowstyle="-|>", node_size=1600,
                           edge_color="#3a6ea5")
    nx.draw_networkx_labels(dig, positions, labels=text, ax=ax, font_size=8)
    if title:
        ax.set_title(title)
    ax.set_axis_off()
    fig.tight_layout()
    fig.savefig(path, **_SAVE_OPTS)
    plt.close(fig)
    return path
