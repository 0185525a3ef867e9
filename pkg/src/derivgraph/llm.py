"""Chat-model bridge for derivation extraction.

The model sees the full linearized article text plus the list of display
numbers and must answer only in the line grammar

    NUM "->" [NUM ("," NUM)*] ";"

one line per source equation. Responses that break the grammar are
re-requested up to a configurable retry budget; unknown equation numbers
are dropped with a notice and cycle-closing edges pruned in line order.
Transport is pluggable: an HTTP chat-completions client configured through
environment variables, or a scripted mock replaying recorded responses.
"""

from __future__ import annotations

import json
import os
import re
from pathlib import Path

from .graph import DerivationGraph
from .ingest import ParsedArticle

ENV_ENDPOINT = "DERIVGRAPH_LLM_ENDPOINT"
ENV_MODEL = "DERIVGRAPH_LLM_MODEL"
ENV_API_KEY = "DERIVGRAPH_LLM_API_KEY"

PROMPT_HEAD = ("I have the following article that contains various "
               "mathematical equations: \n")
PROMPT_MID = ("\n From this article, I have extracted the list of "
              "equations, numbers as follows: \n")
PROMPT_TAIL = ("\n Analyze the context of the article to identify which "
               "equations are derived from each equation. Provide the "
               "output as a list and nothing else, with the format: "
               "w -> x, y, z;\n x -> h, t;\n ... If no equations are "
               "derived from a certain equation, return an empty list "
               "with the format: t ->;\n")

_LINE_RE = re.compile(r"^\s*([^;\s]+?)\s*->\s*([^;]*?)\s*;\s*$")


class TransportError(RuntimeError):
    """The model endpoint could not be reached or answered abnormally."""


class ResponseParseError(ValueError):
    """A response line does not follow the expected grammar."""

    def __init__(self, line_number: int, line: str) -> None:
        super().__init__(f"line {line_number} does not match the response "
                         f"grammar: {line!r}")
        self.line_number = line_number
        self.line = line


class LlmExtractionError(RuntimeError):
    """Every attempt produced an unparseable response."""

    def __init__(self, attempts: int, raw_response: str,
                 cause: ResponseParseError) -> None:
        super().__init__(f"no parseable response after {attempts} attempts; "
                         f"last error: {cause}")
        self.attempts = attempts
        self.raw_response = raw_response


class LlmTransport:
    """Anything that can turn a prompt into a response string."""

    def send(self, prompt: str) -> str:
        raise NotImplementedError


class HttpTransport(LlmTransport):
    """Chat-completions client; endpoint, model and key fall back to the
    DERIVGRAPH_LLM_* environment variables."""

    def __init__(self, endpoint: str | None = None, model: str | None = None,
                 api_key: str | None = None, timeout: float = 120.0) -> None:
        self.endpoint = endpoint or os.environ.get(ENV_ENDPOINT)
        self.model = model or os.environ.get(ENV_MODEL, "")
        self.api_key = api_key or os.environ.get(ENV_API_KEY)
        self.timeout = timeout
        if not self.endpoint:
            raise TransportError(
                f"no endpoint configured (flag or {ENV_ENDPOINT})")

    def send(self, prompt: str) -> str:
        import requests

        headers = {"Content-Type": "application/json"}
        if self.api_key:
            headers["Authorization"] = f"Bearer {self.api_key}"
        body = {
            "model": self.model,
            "messages": [{"role": "user", "content": prompt}],
        }
        try:
            reply = requests.post(self.endpoint, json=body, headers=headers,
                                  timeout=self.timeout)
            reply.raise_for_status()
            payload = reply.json()
            return payload["choices"][0]["message"]["content"]
        except Exception as exc:
            raise TransportError(f"{self.endpoint}: {exc}") from exc


class MockTransport(LlmTransport):
    """Replays scripted responses in order, repeating the last one when the
    script runs out; records every prompt it was sent."""

    def __init__(self, responses: list[str]) -> None:
        if not responses:
            raise ValueError("mock transport needs at least one response")
        self.responses = list(responses)
        self.sent: list[str] = []

    def send(self, prompt: str) -> str:
        self.sent.append(prompt)
        index = min(len(self.sent) - 1, len(self.responses) - 1)
        return self.responses[index]


def load_mock_fixture(path: str | Path) -> dict[str, list[str]]:
    """Read a recorded-response fixture.

    Accepts {"article id": "response"} or {"article id": [attempts...]};
    a bare list applies to every article.
    """
    payload = json.loads(Path(path).read_text(encoding="utf-8"))
    if isinstance(payload, list):
        return {"*": [str(x) for x in payload]}
    if not isinstance(payload, dict):
        raise ValueError(f"{path}: fixture must be a JSON object or array")
    fixture: dict[str, list[str]] = {}
    for key, value in payload.items():
        if isinstance(value, list):
            fixture[str(key)] = [str(x) for x in value]
        else:
            fixture[str(key)] = [str(value)]
    return fixture


def mock_for_article(fixture: dict[str, list[str]],
                     article_id: str) -> MockTransport:
    responses = fixture.get(article_id) or fixture.get("*")
    if not responses:
        raise KeyError(f"no recorded response for article {article_id!r}")
    return MockTransport(responses)


def build_prompt(article_text: str, equation_numbers: list[str]) -> str:
    """Assemble the extraction prompt; the equation list is rendered one
    display number per line."""
    return (PROMPT_HEAD + article_text + PROMPT_MID
            + "\n".join(equation_numbers) + PROMPT_TAIL)


def _label_key(label: str) -> tuple[int, str]:
    return (int(label), "") if label.isdigit() else (1 << 30, label)


def parse_response(text: str, known_numbers: set[str]) -> DerivationGraph:
    """Parse a response into a graph over display numbers.

    Blank lines are skipped; any other line must match the grammar or the
    whole response is rejected. Unknown source or target numbers are
    dropped with a notice. Sources never mentioned keep an empty adjacency.
    """
    graph = DerivationGraph(sorted(known_numbers, key=_label_key))
    for line_number, line in enumerate(text.splitlines(), 1):
        if not line.strip():
            continue
        match = _LINE_RE.match(line)
        if match is None:
            raise ResponseParseError(line_number, line)
        source = match.group(1)
        targets = [t.strip() for t in match.group(2).split(",")] \
            if match.group(2).strip() else []
        if source not in known_numbers:
            graph.notices.append(
                f"line {line_number}: unknown source number {source!r}")
            continue
        for target in targets:
            if target not in known_numbers:
                graph.notices.append(
                    f"line {line_number}: unknown target number {target!r}")
                continue
            graph.add_edge(source, target)
    return graph


def render_response(graph: DerivationGraph) -> str:
    """Inverse of parse_response: one grammar line per node, node order."""
    lines = []
    for node in graph.nodes:
        targets = graph.adjacency[node]
        if targets:
            lines.append(f"{node} -> {', '.join(targets)};")
        else:
            lines.append(f"{node} ->;")
    return "\n".join(lines)


def extract_via_llm(transport: LlmTransport, article: ParsedArticle,
                    retries: int = 2) -> DerivationGraph:
    """Prompt the model and parse its answer, re-requesting on bad grammar.

    retries counts the re-requests after the first attempt. Transport
    failures propagate immediately; exhausting the budget raises
    LlmExtractionError carrying the final raw response.
    """
    if retries < 0:
        raise ValueError("retries must be >= 0")
    labels = [eq.number_label for eq in article.equations]
    prompt = build_prompt(article.text, labels)
    last_raw = ""
    last_error: ResponseParseError | None = None
    for _ in range(retries + 1):
        last_raw = transport.send(prompt)
        try:
            by_number = parse_response(last_raw, set(labels))
        except ResponseParseError as exc:
            last_error = exc
            continue
        graph = DerivationGraph([eq.eq_id for eq in article.equations])
        graph.notices.extend(by_number.notices)
        for source_number, target_number in by_number.edges():
            source = article.equation_by_number(source_number)
            target = article.equation_by_number(target_number)
            graph.add_edge(source.eq_id, target.eq_id)
        return graph
    raise LlmExtractionError(retries + 1, last_raw, last_error)
