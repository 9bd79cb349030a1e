import dataclasses
import random

import pytest

from rentai.preedit import (
    NotInScope,
    preedit,
    structural_check,
    structural_diagnostics,
)

from conftest import make_inscope_sentence


class TestGoldenSplits:
    def test_first_row_byte_exact(self, analyzer, by_id):
        entry = by_id["app1-1"]
        result = preedit(analyzer.analyze(entry.source_text))
        assert (result.sentence_a, result.sentence_b) == entry.gold.preedit

    def test_fifth_row_byte_exact(self, analyzer, by_id):
        entry = by_id["app1-5"]
        result = preedit(analyzer.analyze(entry.source_text))
        assert (result.sentence_a, result.sentence_b) == entry.gold.preedit

    def test_remaining_rows_pass_structural_check(self, analyzer, by_id):
        for entry_id in ("app1-2", "app1-3", "app1-4"):
            sentence = analyzer.analyze(by_id[entry_id].source_text)
            result = preedit(sentence)
            assert structural_check(result, sentence), entry_id

    def test_short_reference_sentence(self, analyzer, by_id):
        sentence = analyzer.analyze(by_id["ex2-16"].source_text)
        result = preedit(sentence)
        assert result.sentence_a == "太郎はテレビを壊した。"
        assert result.sentence_b == "太郎は頭を下げた。"


class TestShape:
    def test_sentence_a_is_head_plus_topic_plus_clause(self, analyzer, by_id):
        for entry_id in ("app1-1", "app1-2", "app1-3", "app1-4", "app1-5"):
            sentence = analyzer.analyze(by_id[entry_id].source_text)
            result = preedit(sentence)
            head = result.head_noun_surface
            assert result.sentence_a.startswith(head + "は")
            assert result.sentence_a.endswith("。")
            assert result.sentence_b.endswith("。")

    def test_head_noun_occurs_once_per_sentence(self, analyzer, by_id):
        for entry_id in ("app1-1", "app1-5"):
            sentence = analyzer.analyze(by_id[entry_id].source_text)
            result = preedit(sentence)
            assert result.head_token_count == 1

    def test_rule_trace_names_each_step(self, analyzer, by_id):
        result = preedit(analyzer.analyze(by_id["app1-5"].source_text))
        assert result.rule_trace
        assert all(isinstance(step, str) and step for step in result.rule_trace)

    def test_json_fields(self, analyzer, by_id):
        result = preedit(analyzer.analyze(by_id["app1-1"].source_text))
        obj = result.to_json()
        assert set(obj) == {"sentence_a", "sentence_b", "head_noun", "rule_trace"}
        assert obj["head_noun"] == "梶"


class TestScopeGate:
    def test_out_of_scope_sentences_rejected(self, analyzer, by_id):
        for entry_id in ("ex2-13", "ex2-14", "ex2-15"):
            sentence = analyzer.analyze(by_id[entry_id].source_text)
            with pytest.raises(NotInScope) as info:
                preedit(sentence)
            assert info.value.reasons, entry_id

    def test_clauseless_sentence_rejected(self, analyzer):
        with pytest.raises(NotInScope):
            preedit(analyzer.analyze("太郎は頭を下げた。"))


class TestStructuralCheck:
    def test_accepts_valid_results(self, analyzer, by_id):
        sentence = analyzer.analyze(by_id["app1-1"].source_text)
        result = preedit(sentence)
        assert structural_diagnostics(result, sentence) == []

    def test_rejects_lost_content(self, analyzer, by_id):
        sentence = analyzer.analyze(by_id["app1-1"].source_text)
        result = preedit(sentence)
        broken = dataclasses.replace(
            result,
            sentence_b=result.head_noun_surface + "は自首してきた。",
            tokens_b=result.tokens_b[:2] + result.tokens_b[-4:],
        )
        assert not structural_check(broken, sentence)

    def test_rejects_text_token_mismatch(self, analyzer, by_id):
        sentence = analyzer.analyze(by_id["app1-1"].source_text)
        result = preedit(sentence)
        broken = dataclasses.replace(result, sentence_a="梶は自首した。")
        diagnostics = structural_diagnostics(broken, sentence)
        assert diagnostics

    def test_soundness_over_randomized_sentences(self):
        rng = random.Random(20230326)
        for _ in range(100):
            sentence, head = make_inscope_sentence(rng)
            result = preedit(sentence)
            assert result.head_noun_surface == head
            assert structural_check(result, sentence), sentence.text
