"""Analytic extractors: citations, substring and token similarity, OpTrees."""

from __future__ import annotations

import pytest

from derivgraph import (MathMLError, OpTree, TokenSimParams, brute_force,
                        build_optree, common_substring_extract, lcs_rating,
                        segmentation, subtree_extract, subtree_fingerprints,
                        subtree_similarity, token_containments,
                        token_similarity_extract, tokenize_alttext,
                        truth_graph)

from conftest import synth_article


class TestCitationExtractors:
    def test_brute_force_matches_labels_on_bundled_corpus(
            self, corpus_entries, parsed_articles):
        for entry in corpus_entries:
            predicted = brute_force(parsed_articles[entry.article_id])
            assert predicted.edge_set() == truth_graph(entry).edge_set()

    def test_multi_citation_sentence(self):
        article = synth_article([
            {}, {}, {},
            {"intro": "Combining (1) and (2) gives the result:"},
        ])
        assert brute_force(article).edge_set() == {
            ("S1.E1", "S1.E4"), ("S1.E2", "S1.E4")}

    def test_no_citations_no_edges(self):
        article = synth_article([{}, {}])
        assert brute_force(article).edge_count() == 0
        assert segmentation(article).edge_count() == 0

    def test_only_last_sentence_counts_for_brute_force(self):
        article = synth_article([
            {},
            {"intro": "Recall (1) from above. The next step is purely new:"},
        ])
        assert brute_force(article).edge_count() == 0
        assert segmentation(article).edge_set() == {("S1.E1", "S1.E2")}

    def test_segmentation_sees_sentence_after(self):
        article = synth_article(
            [{}, {}],
            trailer="Here we simply restated (1) in disguise. More prose.")
        assert brute_force(article).edge_count() == 0
        assert segmentation(article).edge_set() == {("S1.E1", "S1.E2")}

    def test_later_equation_references_ignored(self):
        article = synth_article([
            {"intro": "We anticipate (2) and even equation 2 here:"},
            {},
        ])
        assert brute_force(article).edge_count() == 0
        assert segmentation(article).edge_count() == 0

    def test_brute_force_subset_of_segmentation(self, parsed_articles):
        for article in parsed_articles.values():
            assert brute_force(article).edge_set() <= segmentation(
                article).edge_set()


class TestLcsRating:
    def test_known_overlap(self):
        assert lcs_rating("x+y=z", "w+y=z2") == (4, 4 / 5)

    def test_identity(self):
        assert lcs_rating("abcde", "abcde") == (5, 1.0)

    def test_disjoint_alphabets(self):
        assert lcs_rating("abc", "xyz") == (0, 0.0)

    def test_empty_string(self):
        assert lcs_rating("", "abc") == (0, 0.0)
        assert lcs_rating("abc", "") == (0, 0.0)

    def test_max_denominator(self):
        assert lcs_rating("abcd", "abcdefgh", denominator="min") == (4, 1.0)
        assert lcs_rating("abcd", "abcdefgh", denominator="max") == (4, 0.5)

    def test_unknown_denominator(self):
        with pytest.raises(ValueError):
            lcs_rating("a", "b", denominator="median")


class TestCommonSubstring:
    def test_identical_alttexts_link(self):
        article = synth_article([{"alttext": "a+b=c"}, {"alttext": "a+b=c"}])
        graph = common_substring_extract(article, threshold=0.9)
        assert graph.edge_set() == {("S1.E1", "S1.E2")}

    def test_threshold_is_strict(self):
        # "abcdef" vs "abcxyz": longest run "abc", ratio 3/6 = 0.5 exactly.
        article = synth_article([{"alttext": "abcdef"},
                                 {"alttext": "abcxyz"}])
        assert common_substring_extract(article, 0.49).edge_count() == 1
        assert common_substring_extract(article, 0.5).edge_count() == 0

    def test_threshold_one_blocks_everything(self):
        article = synth_article([{"alttext": "same"}, {"alttext": "same"}])
        assert common_substring_extract(article, 1.0).edge_count() == 0

    def test_edges_point_earlier_to_later(self):
        article = synth_article([{"alttext": "aaaa"}, {"alttext": "aaaa"},
                                 {"alttext": "aaaa"}])
        graph = common_substring_extract(article, 0.5)
        order = {eq_id: k for k, eq_id in enumerate(graph.nodes)}
        assert graph.edge_count() == 3
        for u, v in graph.edges():
            assert order[u] < order[v]


class TestTokenize:
    def test_spec_of_tokens(self):
        assert tokenize_alttext("E = m c^{2}") == {
            "E", "=", "m", "c", "^", "{", "2", "}"}

    def test_alphanumeric_runs_stay_whole(self):
        assert tokenize_alttext("E=mc^{2}") == {
            "E", "=", "mc", "^", "{", "2", "}"}

    def test_empty(self):
        assert tokenize_alttext("") == set()

    def test_dedup(self):
        assert tokenize_alttext("x x x") == {"x"}

    def test_containments(self):
        p12, p21 = token_containments({"a", "b", "c", "d"},
                                      {"b", "c", "d", "e", "f"})
        assert p12 == 0.75
        assert p21 == 0.6


class TestTokenSimilarity:
    def test_params_validation(self):
        with pytest.raises(ValueError):
            TokenSimParams(strictness=3)
        with pytest.raises(ValueError):
            TokenSimParams(direction="sideways")
        with pytest.raises(ValueError):
            TokenSimParams(threshold=1.5)
        assert TokenSimParams() == TokenSimParams(2, "greater", 0.98)

    def test_greater_direction_keeps_document_order_on_strict_win(self):
        # tokens {a,b,c,d} vs {b,c,d,e,f}: p12=0.75 beats p21=0.6.
        article = synth_article([{"alttext": "a b c d"},
                                 {"alttext": "b c d e f"}])
        graph = token_similarity_extract(
            article, TokenSimParams(strictness=2, direction="greater",
                                    threshold=0.5))
        assert graph.edge_set() == {("S1.E1", "S1.E2")}

    def test_lesser_direction_flips(self):
        article = synth_article([{"alttext": "a b c d"},
                                 {"alttext": "b c d e f"}])
        graph = token_similarity_extract(
            article, TokenSimParams(strictness=2, direction="lesser",
                                    threshold=0.5))
        assert graph.edge_set() == {("S1.E2", "S1.E1")}

    def test_tie_takes_else_branch(self):
        # Identical token sets tie at 1.0, so "greater" points backwards.
        article = synth_article([{"alttext": "a b"}, {"alttext": "a b"}])
        graph = token_similarity_extract(
            article, TokenSimParams(strictness=2, direction="greater",
                                    threshold=0.9))
        assert graph.edge_set() == {("S1.E2", "S1.E1")}

    def test_strictness_gate(self):
        # p12=0.5, p21=1.0 with threshold 0.6: only one side passes.
        article = synth_article([{"alttext": "a b"}, {"alttext": "a"}])
        strict2 = token_similarity_extract(
            article, TokenSimParams(2, "greater", 0.6))
        strict1 = token_similarity_extract(
            article, TokenSimParams(1, "greater", 0.6))
        assert strict2.edge_count() == 0
        assert strict1.edge_set() == {("S1.E2", "S1.E1")}

    def test_strictness_zero_links_every_pair(self):
        article = synth_article([{"alttext": "a"}, {"alttext": "b"},
                                 {"alttext": "c"}])
        graph = token_similarity_extract(
            article, TokenSimParams(0, "greater", 0.98))
        assert graph.edge_count() == 3

    def test_empty_token_set_skipped_with_notice(self):
        article = synth_article([{"alttext": "", "math": ""},
                                 {"alttext": "a"}])
        graph = token_similarity_extract(
            article, TokenSimParams(0, "greater", 0.5))
        assert graph.edge_count() == 0
        assert any("empty token set" in note for note in graph.notices)

    def test_outputs_are_dags(self, parsed_articles):
        for article in parsed_articles.values():
            for direction in ("greater", "lesser"):
                for strictness in (0, 1, 2):
                    graph = token_similarity_extract(
                        article, TokenSimParams(strictness, direction, 0.5))
                    assert graph.is_acyclic()


class TestOpTrees:
    def test_leaf_kinds(self):
        assert build_optree("<mi>x</mi>") == OpTree("identifier", "x")
        assert build_optree("<mo>+</mo>") == OpTree("operator", "+")
        assert build_optree("<mn>42</mn>") == OpTree("number", "42")

    def test_fraction_and_power(self):
        frac = build_optree("<mfrac><mi>a</mi><mi>b</mi></mfrac>")
        assert frac == OpTree("operator", "/", (
            OpTree("identifier", "a"), OpTree("identifier", "b")))
        power = build_optree("<msup><mi>x</mi><mn>2</mn></msup>")
        assert power.symbol == "^"
        assert [c.symbol for c in power.children] == ["x", "2"]

    def test_row_becomes_group(self):
        tree = build_optree("<mrow><mi>a</mi><mo>+</mo><mi>b</mi></mrow>")
        assert tree.kind == "group"
        assert [c.symbol for c in tree.children] == ["a", "+", "b"]

    def test_sqrt_wraps_multiple_children(self):
        single = build_optree("<msqrt><mi>x</mi></msqrt>")
        assert single.symbol == "√" and len(single.children) == 1
        multi = build_optree("<msqrt><mi>x</mi><mn>2</mn></msqrt>")
        assert multi.symbol == "√"
        assert len(multi.children) == 1
        assert multi.children[0].kind == "group"

    def test_annotations_ignored(self):
        tree = build_optree(
            "<math><semantics><mrow><mi>x</mi></mrow>"
            "<annotation>latex source</annotation></semantics></math>")
        symbols = {node.symbol for node in subtree_fingerprints(tree)}
        assert "x" in symbols
        assert not any("latex" in s for s in symbols)

    def test_empty_fragment_rejected(self):
        with pytest.raises(MathMLError):
            build_optree("no markup at all")

    def test_fingerprint_count(self):
        tree = build_optree("<msup><mi>x</mi><mn>2</mn></msup>")
        assert len(subtree_fingerprints(tree)) == 3

    def test_similarity_worked_example(self):
        t1 = build_optree("<mrow><mi>a</mi><mo>+</mo><mi>b</mi></mrow>")
        t2 = build_optree("<mrow><mi>b</mi><mo>+</mo><mi>a</mi></mrow>")
        assert subtree_similarity(t1, t2) == 0.75
        assert subtree_similarity(t2, t1) == 0.75

    def test_similarity_extremes(self):
        t1 = build_optree("<mrow><mi>a</mi><mo>+</mo><mi>b</mi></mrow>")
        t3 = build_optree("<mrow><mi>p</mi><mo>*</mo><mi>q</mi></mrow>")
        assert subtree_similarity(t1, t1) == 1.0
        assert subtree_similarity(t1, t3) == 0.0


class TestSubtreeExtract:
    def test_explicit_citations_always_link(self, parsed_articles):
        article = parsed_articles["fx.0001"]
        graph = subtree_extract(article, threshold=1.01)
        assert graph.edge_set() == segmentation(article).edge_set()

    def test_identical_structure_links(self):
        math = "<mrow><mi>a</mi><mo>+</mo><mi>b</mi></mrow>"
        article = synth_article([{"alttext": "a+b", "math": math},
                                 {"alttext": "a+b", "math": math}])
        graph = subtree_extract(article, threshold=0.9)
        assert graph.edge_set() == {("S1.E1", "S1.E2")}

    def test_unparseable_mathml_recorded(self):
        from dataclasses import replace

        article = synth_article([{"alttext": "a"}, {"alttext": "b"}])
        article.equations[0] = replace(article.equations[0],
                                       mathml="not mathml")
        graph = subtree_extract(article, threshold=0.5)
        assert any("operator tree" in note for note in graph.notices)
