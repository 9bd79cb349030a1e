import io
import sys

import pytest

from rentai.morphology import (
    AnalysisError,
    ConjugationForm,
    EmptyInput,
    ExternalAnalyzer,
    FixtureMiss,
    MalformedRecord,
    PartOfSpeech,
    Provenance,
    parse_external_analysis,
    reconstruction_problems,
)


class TestFixtureAnalyzer:
    def test_bundled_covers_known_sentences(self, analyzer):
        assert len(analyzer.known_texts()) >= 10

    def test_analyze_returns_tokens_in_order(self, analyzer):
        sentence = analyzer.analyze("テレビを壊した太郎は頭を下げた。")
        surfaces = [t.surface for t in sentence.tokens]
        assert surfaces == [
            "テレビ", "を", "壊し", "た", "太郎", "は", "頭", "を", "下げ", "た", "。",
        ]
        assert sentence.tokens[0].pos is PartOfSpeech.NOUN
        assert sentence.tokens[2].lemma == "壊す"
        assert sentence.tokens[2].cform is ConjugationForm.CONTINUATIVE
        assert sentence.provenance is Provenance.FIXTURE

    def test_analyze_strips_surrounding_whitespace(self, analyzer):
        text = "テレビを壊した太郎は頭を下げた。"
        assert analyzer.analyze(f"  {text}\n").text == text

    def test_empty_input_rejected(self, analyzer):
        with pytest.raises(EmptyInput):
            analyzer.analyze("   ")

    def test_unknown_sentence_reports_miss(self, analyzer):
        with pytest.raises(FixtureMiss):
            analyzer.analyze("この文のための解析結果は存在しない。")

    def test_miss_is_an_analysis_error(self, analyzer):
        with pytest.raises(AnalysisError):
            analyzer.analyze("この文のための解析結果は存在しない。")


class TestReconstruction:
    def test_every_fixture_reconstructs_cleanly(self, analyzer):
        for text in analyzer.known_texts():
            sentence = analyzer.analyze(text)
            assert reconstruction_problems(sentence) == []
            assert "".join(t.surface for t in sentence.tokens) == sentence.text

    def test_spans_index_into_text(self, analyzer):
        for text in analyzer.known_texts():
            sentence = analyzer.analyze(text)
            for token in sentence.tokens:
                start, stop = token.span
                assert sentence.text[start:stop] == token.surface


EXTERNAL_OUTPUT = """\
テレビ\t名詞,一般,*,*,*,*,テレビ,テレビ,テレビ
を\t助詞,格助詞,一般,*,*,*,を,ヲ,ヲ
壊し\t動詞,自立,*,*,五段・サ行,連用形,壊す,コワシ,コワシ
た\t助動詞,*,*,*,特殊・タ,基本形,た,タ,タ
。\t記号,句点,*,*,*,*,。,。,。
EOS
"""


class TestExternalParsing:
    def test_parses_analyzer_output(self):
        sentences = parse_external_analysis(io.StringIO(EXTERNAL_OUTPUT))
        assert len(sentences) == 1
        tokens = sentences[0].tokens
        assert [t.surface for t in tokens] == ["テレビ", "を", "壊し", "た", "。"]
        assert tokens[2].lemma == "壊す"
        assert tokens[2].pos is PartOfSpeech.VERB
        assert tokens[2].cform is ConjugationForm.CONTINUATIVE
        assert tokens[3].cform is ConjugationForm.TERMINAL
        assert sentences[0].provenance is Provenance.EXTERNAL

    def test_multiple_sentences_split_on_eos(self):
        sentences = parse_external_analysis(
            io.StringIO(EXTERNAL_OUTPUT + EXTERNAL_OUTPUT)
        )
        assert len(sentences) == 2
        assert sentences[0].text == sentences[1].text

    def test_malformed_line_carries_line_number(self):
        bad = EXTERNAL_OUTPUT.replace("を\t助詞,格助詞,一般,*,*,*,を,ヲ,ヲ", "を")
        with pytest.raises(MalformedRecord) as info:
            parse_external_analysis(io.StringIO(bad))
        assert info.value.line_number == 2

    def test_missing_eos_rejected(self):
        truncated = EXTERNAL_OUTPUT.replace("EOS\n", "")
        with pytest.raises(AnalysisError):
            parse_external_analysis(io.StringIO(truncated))

    def test_unknown_lemma_star_falls_back_to_surface(self):
        starred = EXTERNAL_OUTPUT.replace(
            "テレビ\t名詞,一般,*,*,*,*,テレビ,テレビ,テレビ",
            "テレビ\t名詞,一般,*,*,*,*,*",
        )
        sentences = parse_external_analysis(io.StringIO(starred))
        assert sentences[0].tokens[0].lemma == "テレビ"


class TestExternalAnalyzer:
    def test_round_trip_through_subprocess(self):
        script = (
            "import sys\n"
            "text = sys.stdin.read().strip()\n"
            "for ch in text:\n"
            "    sys.stdout.write(ch + '\\t記号,一般,*,*,*,*,*\\n')\n"
            "print('EOS')\n"
        )
        analyzer = ExternalAnalyzer([sys.executable, "-c", script])
        sentence = analyzer.analyze("ああ。")
        assert sentence.text == "ああ。"
        assert len(sentence.tokens) == 3
        assert sentence.provenance is Provenance.EXTERNAL

    def test_output_must_reconstruct_the_input(self):
        script = "input(); print('x\\t記号,一般,*,*,*,*,*'); print('EOS')"
        analyzer = ExternalAnalyzer([sys.executable, "-c", script])
        with pytest.raises(AnalysisError):
            analyzer.analyze("ああ。")
