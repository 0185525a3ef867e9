"""Ground-truth corpus I/O.

Each labeled article is one JSON object with the field names used by the
published dataset: "Article ID", "Equation ID" (ordered list), "Adjacency
List" (equation ID -> derived equation IDs, where a sink node carries the
[null] sentinel), "Equation Number" (equation ID -> display number), and
"Most Important Equation". In memory the [null] sentinel is normalized to
an empty list; save_corpus re-emits it so files round-trip unchanged.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from .graph import DerivationGraph, find_cycle

F_ARTICLE = "Article ID"
F_EQUATIONS = "Equation ID"
F_ADJACENCY = "Adjacency List"
F_NUMBERS = "Equation Number"
F_SEED = "Most Important Equation"

_REQUIRED_FIELDS = (F_ARTICLE, F_EQUATIONS, F_ADJACENCY, F_NUMBERS, F_SEED)


class CorpusLoadError(ValueError):
    """The corpus file could not be read or parsed as JSON."""


class CorpusValidationError(ValueError):
    """One or more corpus entries violate the schema; lists every violation."""

    def __init__(self, violations: list[str]) -> None:
        super().__init__("\n".join(violations))
        self.violations = violations


@dataclass(frozen=True)
class GroundTruthEntry:
    """One labeled article. Treated as immutable after load."""

    article_id: str
    equation_ids: list[str]
    adjacency: dict[str, list[str]]
    equation_numbers: dict[str, str]
    most_important: str | None
    notes: dict = field(default_factory=dict, compare=False)


def validate_entry(entry: GroundTruthEntry) -> list[str]:
    """Return schema violations for one entry; an empty list means valid.

    Checks: equation IDs unique; adjacency and number maps keyed by exactly
    the equation IDs; every adjacency target known; the induced graph
    acyclic (self-loops included); the most-important equation a member of
    the equation list (it may be null only when the entry has no equations).
    """
    problems: list[str] = []
    ids = entry.equation_ids
    known = set(ids)
    if len(known) != len(ids):
        dupes = sorted({x for x in ids if ids.count(x) > 1})
        problems.append(f"{F_EQUATIONS}: duplicate IDs {dupes}")

    for field_name, mapping in ((F_ADJACENCY, entry.adjacency),
                                (F_NUMBERS, entry.equation_numbers)):
        missing = [x for x in ids if x not in mapping]
        extra = [x for x in mapping if x not in known]
        if missing:
            problems.append(f"{field_name}: missing keys {missing}")
        if extra:
            problems.append(f"{field_name}: unknown keys {extra}")

    for source, targets in entry.adjacency.items():
        for target in targets:
            if target not in known:
                problems.append(f"{F_ADJACENCY}: {source} -> unknown ID {target!r}")

    cycle = find_cycle(ids, entry.adjacency)
    if cycle is not None:
        problems.append(f"{F_ADJACENCY}: cycle " + " -> ".join(cycle))

    if entry.most_important is None:
        if ids:
            problems.append(f"{F_SEED}: null but the entry lists equations")
    elif entry.most_important not in known:
        problems.append(f"{F_SEED}: {entry.most_important!r} not in {F_EQUATIONS}")
    return problems


def _normalize_targets(article_id: str, source: str, raw: object,
                       problems: list[str]) -> list[str]:
    if not isinstance(raw, list):
        problems.append(f"[{article_id}] {F_ADJACENCY}: value for {source!r} is not a list")
        return []
    if raw == [None]:
        return []
    targets: list[str] = []
    for item in raw:
        if item is None:
            problems.append(
                f"[{article_id}] {F_ADJACENCY}: null sentinel for {source!r} "
                "must be the sole element")
        else:
            targets.append(str(item))
    return targets


def _record_to_entry(record: object, origin: str,
                     problems: list[str]) -> GroundTruthEntry | None:
    if not isinstance(record, dict):
        problems.append(f"{origin}: entry is not a JSON object")
        return None
    missing = [name for name in _REQUIRED_FIELDS if name not in record]
    article_id = str(record.get(F_ARTICLE, origin))
    if missing:
        problems.append(f"[{article_id}] missing fields {missing}")
        return None
    raw_ids = record[F_EQUATIONS]
    if not isinstance(raw_ids, list):
        problems.append(f"[{article_id}] {F_EQUATIONS}: not a list")
        return None
    ids = [str(x) for x in raw_ids]
    raw_adjacency = record[F_ADJACENCY]
    if not isinstance(raw_adjacency, dict):
        problems.append(f"[{article_id}] {F_ADJACENCY}: not an object")
        return None
    adjacency = {
        str(source): _normalize_targets(article_id, str(source), targets, problems)
        for source, targets in raw_adjacency.items()
    }
    raw_numbers = record[F_NUMBERS]
    if not isinstance(raw_numbers, dict):
        problems.append(f"[{article_id}] {F_NUMBERS}: not an object")
        return None
    numbers = {str(k): str(v) for k, v in raw_numbers.items()}
    seed = record[F_SEED]
    entry = GroundTruthEntry(
        article_id=article_id,
        equation_ids=ids,
        adjacency=adjacency,
        equation_numbers=numbers,
        most_important=None if seed is None else str(seed),
    )
    problems.extend(f"[{article_id}] {p}" for p in validate_entry(entry))
    return entry


def _read_records(path: Path) -> list[tuple[object, str]]:
    try:
        text = path.read_bytes().decode("utf-8")
    except OSError as exc:
        raise CorpusLoadError(f"{path}: {exc}") from exc
    except UnicodeDecodeError as exc:
        raise CorpusLoadError(f"{path}: not valid UTF-8 ({exc})") from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        byte_offset = len(text[:exc.pos].encode("utf-8"))
        raise CorpusLoadError(
            f"{path}: malformed JSON at byte offset {byte_offset}: {exc.msg}"
        ) from exc
    if isinstance(data, list):
        return [(record, f"{path}[{i}]") for i, record in enumerate(data)]
    return [(data, str(path))]


def load_corpus(path: str | Path) -> list[GroundTruthEntry]:
    """Load entries from a JSON file (one object or an array of objects) or
    from a directory of such files, in file order.

    Raises CorpusLoadError on unreadable or malformed input and
    CorpusValidationError listing every schema violation found.
    """
    path = Path(path)
    if path.is_dir():
        files = sorted(p for p in path.iterdir()
                       if p.is_file() and p.suffix == ".json")
        if not files:
            raise CorpusLoadError(f"{path}: no .json files in directory")
    else:
        files = [path]
    records: list[tuple[object, str]] = []
    for item in files:
        records.extend(_read_records(item))
    problems: list[str] = []
    entries: list[GroundTruthEntry] = []
    for record, origin in records:
        entry = _record_to_entry(record, origin, problems)
        if entry is not None:
            entries.append(entry)
    if problems:
        raise CorpusValidationError(problems)
    return entries


def entry_to_record(entry: GroundTruthEntry) -> dict:
    """Serialize one entry back to the file schema ([null] for sinks)."""
    adjacency = {}
    for eq_id in entry.equation_ids:
        targets = entry.adjacency.get(eq_id, [])
        adjacency[eq_id] = list(targets) if targets else [None]
    numbers = {eq_id: entry.equation_numbers[eq_id] for eq_id in entry.equation_ids}
    return {
        F_ARTICLE: entry.article_id,
        F_EQUATIONS: list(entry.equation_ids),
        F_ADJACENCY: adjacency,
        F_NUMBERS: numbers,
        F_SEED: entry.most_important,
    }


def save_corpus(entries: list[GroundTruthEntry], path: str | Path) -> None:
    """Write entries as a JSON array; load_corpus(save_corpus(x)) == x."""
    payload = [entry_to_record(entry) for entry in entries]
    text = json.dumps(payload, indent=4, ensure_ascii=False) + "\n"
    Path(path).write_text(text, encoding="utf-8")


def truth_graph(entry: GroundTruthEntry) -> DerivationGraph:
    """Build the labeled derivation graph for one entry."""
    return DerivationGraph.from_adjacency(list(entry.equation_ids), entry.adjacency)


def corpus_stats(entries: list[GroundTruthEntry]) -> dict:
    """Equations-per-article distribution plus corpus-wide totals."""
    counts = {e.article_id: len(e.equation_ids) for e in entries}
    sizes = list(counts.values())
    edge_total = sum(len(ts) for e in entries for ts in e.adjacency.values())
    return {
        "articles": len(entries),
        "equations": sum(sizes),
        "edges": edge_total,
        "equations_per_article": counts,
        "min_equations": min(sizes) if sizes else 0,
        "max_equations": max(sizes) if sizes else 0,
        "mean_equations": (sum(sizes) / len(sizes)) if sizes else 0.0,
    }
