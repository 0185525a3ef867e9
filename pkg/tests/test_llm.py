"""Chat-model bridge: prompt assembly, response grammar, retries, mocks."""

from __future__ import annotations

import random

import pytest

from derivgraph import (DerivationGraph, LlmExtractionError, MockTransport,
                        ResponseParseError, TransportError, build_prompt,
                        extract_via_llm, parse_response, render_response,
                        truth_graph)
from derivgraph.llm import (PROMPT_HEAD, PROMPT_MID, PROMPT_TAIL,
                            HttpTransport, load_mock_fixture,
                            mock_for_article)

from conftest import synth_article


class TestPrompt:
    def test_prompt_layout(self):
        prompt = build_prompt("BODY", ["1", "2", "3"])
        assert prompt == PROMPT_HEAD + "BODY" + PROMPT_MID + "1\n2\n3" + PROMPT_TAIL

    def test_prompt_carries_article_text(self, parsed_articles):
        article = parsed_articles["fx.0003"]
        labels = [eq.number_label for eq in article.equations]
        prompt = build_prompt(article.text, labels)
        assert article.text in prompt
        assert "\n1\n2\n3\n4\n5\n" in prompt


class TestParseResponse:
    def test_valid_response(self):
        graph = parse_response("1 -> 2, 3;\n2 -> 3;\n3 ->;", {"1", "2", "3"})
        assert graph.edge_set() == {("1", "2"), ("1", "3"), ("2", "3")}

    def test_empty_adjacency_line(self):
        graph = parse_response("t ->;", {"t"})
        assert graph.nodes == ["t"]
        assert graph.edge_count() == 0

    def test_cycle_coerced_to_dag(self):
        graph = parse_response("1 -> 2;\n2 -> 1;", {"1", "2"})
        assert graph.edge_set() == {("1", "2")}
        assert graph.is_acyclic()
        assert any("cycle" in note for note in graph.notices)

    def test_blank_lines_skipped(self):
        graph = parse_response("\n1 -> 2;\n\n   \n2 ->;\n", {"1", "2"})
        assert graph.edge_set() == {("1", "2")}

    def test_whitespace_tolerance(self):
        graph = parse_response("  1   ->   2 , 3 ;  ", {"1", "2", "3"})
        assert graph.edge_set() == {("1", "2"), ("1", "3")}

    @pytest.mark.parametrize("bad", [
        "1 -> 2",               # missing terminator
        "1 => 2;",              # wrong arrow
        "gibberish",            # no arrow at all
        "1 -> 2; 3 -> 4;",      # two statements on one line
        "-> 2;",                # missing source
    ])
    def test_grammar_violations_raise(self, bad):
        with pytest.raises(ResponseParseError):
            parse_response(bad, {"1", "2", "3", "4"})

    def test_error_carries_line_number(self):
        with pytest.raises(ResponseParseError) as err:
            parse_response("1 ->;\nBROKEN\n2 ->;", {"1", "2"})
        assert err.value.line_number == 2
        assert err.value.line == "BROKEN"

    def test_unknown_source_noted_not_fatal(self):
        graph = parse_response("9 -> 1;\n1 -> 2;", {"1", "2"})
        assert graph.edge_set() == {("1", "2")}
        assert any("unknown source" in note for note in graph.notices)

    def test_unknown_target_noted_not_fatal(self):
        graph = parse_response("1 -> 9, 2;", {"1", "2"})
        assert graph.edge_set() == {("1", "2")}
        assert any("unknown target" in note for note in graph.notices)

    def test_numeric_labels_sorted_numerically(self):
        graph = parse_response("10 ->;", {"1", "2", "10"})
        assert graph.nodes == ["1", "2", "10"]

    def test_unmentioned_sources_keep_empty_adjacency(self):
        graph = parse_response("1 -> 2;", {"1", "2", "3"})
        assert graph.adjacency["3"] == []


class TestRenderResponse:
    def test_render_format(self):
        graph = DerivationGraph(["1", "2", "3"])
        graph.add_edge("1", "2")
        graph.add_edge("1", "3")
        assert render_response(graph) == "1 -> 2, 3;\n2 ->;\n3 ->;"

    def test_round_trip_small(self):
        text = "1 -> 2, 3;\n2 -> 3;\n3 ->;"
        graph = parse_response(text, {"1", "2", "3"})
        assert render_response(graph) == text

    def test_round_trip_random_dags(self):
        rng = random.Random(99)
        for _ in range(25):
            n = rng.randint(1, 9)
            labels = [str(k) for k in range(1, n + 1)]
            graph = DerivationGraph(labels)
            for i in range(n):
                for j in range(i + 1, n):
                    if rng.random() < 0.3:
                        graph.add_edge(labels[i], labels[j])
            again = parse_response(render_response(graph), set(labels))
            assert again == graph


class TestTransports:
    def test_mock_replays_then_repeats(self):
        mock = MockTransport(["a", "b"])
        assert [mock.send("p1"), mock.send("p2"), mock.send("p3")] == [
            "a", "b", "b"]
        assert mock.sent == ["p1", "p2", "p3"]

    def test_mock_requires_responses(self):
        with pytest.raises(ValueError):
            MockTransport([])

    def test_http_transport_requires_endpoint(self, monkeypatch):
        monkeypatch.delenv("DERIVGRAPH_LLM_ENDPOINT", raising=False)
        with pytest.raises(TransportError):
            HttpTransport()

    def test_http_transport_reads_environment(self, monkeypatch):
        monkeypatch.setenv("DERIVGRAPH_LLM_ENDPOINT", "http://example.test/v1")
        monkeypatch.setenv("DERIVGRAPH_LLM_MODEL", "local-model")
        monkeypatch.setenv("DERIVGRAPH_LLM_API_KEY", "sekrit")
        transport = HttpTransport()
        assert transport.endpoint == "http://example.test/v1"
        assert transport.model == "local-model"
        assert transport.api_key == "sekrit"

    def test_flags_override_environment(self, monkeypatch):
        monkeypatch.setenv("DERIVGRAPH_LLM_ENDPOINT", "http://env.test")
        transport = HttpTransport(endpoint="http://flag.test", model="m")
        assert transport.endpoint == "http://flag.test"


class TestFixtureLoading:
    def test_fixture_shapes(self, tmp_path):
        import json

        path = tmp_path / "mock.json"
        path.write_text(json.dumps({"a": "1 ->;", "b": ["x", "y"]}),
                        encoding="utf-8")
        fixture = load_mock_fixture(path)
        assert fixture == {"a": ["1 ->;"], "b": ["x", "y"]}

    def test_bare_list_is_wildcard(self, tmp_path):
        path = tmp_path / "mock.json"
        path.write_text('["only"]', encoding="utf-8")
        fixture = load_mock_fixture(path)
        assert mock_for_article(fixture, "anything").responses == ["only"]

    def test_missing_article_rejected(self):
        with pytest.raises(KeyError):
            mock_for_article({"a": ["x"]}, "b")


class TestExtraction:
    def test_numbers_map_back_to_equation_ids(self):
        article = synth_article([{}, {}, {}])
        transport = MockTransport(["1 -> 2;\n2 -> 3;\n3 ->;"])
        graph = extract_via_llm(transport, article)
        assert graph.nodes == ["S1.E1", "S1.E2", "S1.E3"]
        assert graph.edge_set() == {("S1.E1", "S1.E2"), ("S1.E2", "S1.E3")}

    def test_bundled_mock_reproduces_labels(self, corpus_entries,
                                            parsed_articles, mock_llm_path):
        fixture = load_mock_fixture(mock_llm_path)
        for entry in corpus_entries:
            transport = mock_for_article(fixture, entry.article_id)
            graph = extract_via_llm(transport,
                                    parsed_articles[entry.article_id])
            assert graph.edge_set() == truth_graph(entry).edge_set()

    def test_retry_after_garbage(self):
        article = synth_article([{}, {}])
        transport = MockTransport(["not the grammar", "1 -> 2;\n2 ->;"])
        graph = extract_via_llm(transport, article, retries=2)
        assert graph.edge_set() == {("S1.E1", "S1.E2")}
        assert len(transport.sent) == 2

    def test_budget_exhaustion(self):
        article = synth_article([{}, {}])
        transport = MockTransport(["garbage"])
        with pytest.raises(LlmExtractionError) as err:
            extract_via_llm(transport, article, retries=2)
        assert err.value.attempts == 3
        assert err.value.raw_response == "garbage"
        assert len(transport.sent) == 3

    def test_zero_retries_means_single_attempt(self):
        article = synth_article([{}])
        transport = MockTransport(["bad"])
        with pytest.raises(LlmExtractionError) as err:
            extract_via_llm(transport, article, retries=0)
        assert err.value.attempts == 1

    def test_negative_retries_rejected(self):
        article = synth_article([{}])
        with pytest.raises(ValueError):
            extract_via_llm(MockTransport(["x"]), article, retries=-1)

    def test_transport_errors_propagate(self):
        class Broken(MockTransport):
            def send(self, prompt: str) -> str:
                raise TransportError("endpoint on fire")

        article = synth_article([{}])
        with pytest.raises(TransportError):
            extract_via_llm(Broken(["unused"]), article)

    def test_same_prompt_resent_on_retry(self):
        article = synth_article([{}, {}])
        transport = MockTransport(["junk", "junk again", "1 ->;\n2 ->;"])
        extract_via_llm(transport, article, retries=2)
        assert len(set(transport.sent)) == 1
