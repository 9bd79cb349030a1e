"""Tokenized Japanese sentences behind a pluggable analyzer interface.

Two providers are available: :class:`FixtureAnalyzer` serves frozen,
hand-verified analyses keyed by exact sentence text (the hermetic default),
and :class:`ExternalAnalyzer` drives a real morphological analyzer through
the common one-token-per-line exchange format.  Both produce the same
:class:`TokenizedSentence` structure, tagged with IPADIC-convention
part-of-speech chains.
"""

from __future__ import annotations

import json
import subprocess
import threading
from dataclasses import dataclass, field
from enum import Enum
from importlib import resources
from pathlib import Path
from typing import Iterable


class PartOfSpeech(str, Enum):
    """Coarse word class, mapped from the first IPADIC POS field."""

    NOUN = "noun"
    VERB = "verb"
    ADJECTIVE = "adjective"
    PARTICLE = "particle"
    AUXILIARY = "auxiliary"
    ADVERB = "adverb"
    SYMBOL = "symbol"
    OTHER = "other"


class ConjugationForm(str, Enum):
    """Inflection slot of a conjugating word.

    Adnominal and terminal verb forms are surface-identical in modern
    Japanese; the distinction is kept only because analyzers report it.
    """

    ADNOMINAL = "adnominal"
    TERMINAL = "terminal"
    CONTINUATIVE = "continuative"
    OTHER = "other"


#: First IPADIC POS field -> coarse class.  Anything absent maps to OTHER
#: with the full chain preserved in ``pos_fine``.
_POS_MAP = {
    "名詞": PartOfSpeech.NOUN,
    "動詞": PartOfSpeech.VERB,
    "形容詞": PartOfSpeech.ADJECTIVE,
    "助詞": PartOfSpeech.PARTICLE,
    "助動詞": PartOfSpeech.AUXILIARY,
    "副詞": PartOfSpeech.ADVERB,
    "記号": PartOfSpeech.SYMBOL,
}

#: IPADIC 活用形 -> coarse conjugation slot.
_CFORM_MAP = {
    "基本形": ConjugationForm.TERMINAL,
    "体言接続": ConjugationForm.ADNOMINAL,
    "連用形": ConjugationForm.CONTINUATIVE,
    "連用タ接続": ConjugationForm.CONTINUATIVE,
    "連用テ接続": ConjugationForm.CONTINUATIVE,
    "連用ニ接続": ConjugationForm.CONTINUATIVE,
    "連用ゴザイ接続": ConjugationForm.CONTINUATIVE,
}


class AnalysisError(Exception):
    """Base class for analyzer failures."""


class EmptyInput(AnalysisError):
    """Raised when the text to analyze is blank."""


class FixtureMiss(AnalysisError):
    """Raised when the fixture backend has no analysis for a sentence.

    Seeing this in a test means the test is not hermetic.
    """

    def __init__(self, text: str):
        super().__init__(f"no fixture analysis for: {text!r}")
        self.text = text


class MalformedRecord(AnalysisError):
    """Raised on a bad line in the analyzer exchange format."""

    def __init__(self, line_number: int, line: str, problem: str):
        super().__init__(f"line {line_number}: {problem}: {line!r}")
        self.line_number = line_number


@dataclass(frozen=True)
class Token:
    """One morphological unit of a sentence."""

    surface: str
    """Exact substring of the sentence text."""

    lemma: str
    """Dictionary form."""

    pos: PartOfSpeech
    """Coarse word class."""

    pos_fine: str
    """Analyzer-convention POS chain, e.g. ``名詞,固有名詞,人名,姓``."""

    cform: ConjugationForm | None
    """Conjugation slot; ``None`` for non-conjugating words."""

    span: tuple[int, int]
    """Half-open character offsets into the sentence text."""

    def pos_fine_startswith(self, prefix: str) -> bool:
        return self.pos_fine.startswith(prefix)


class Provenance(str, Enum):
    FIXTURE = "fixture"
    EXTERNAL = "external"


@dataclass(frozen=True)
class TokenizedSentence:
    """A sentence plus its ordered token list."""

    text: str
    tokens: tuple[Token, ...]
    provenance: Provenance = Provenance.FIXTURE


def reconstruction_problems(sentence: TokenizedSentence) -> list[str]:
    """Check the span invariants; return human-readable problems, if any.

    Surfaces must tile the text left to right with nothing but whitespace
    between them.
    """
    problems: list[str] = []
    if sentence.text and not sentence.tokens:
        problems.append("non-empty text with no tokens")
    cursor = 0
    for i, token in enumerate(sentence.tokens):
        start, stop = token.span
        if stop <= start:
            problems.append(f"token {i} has empty span {token.span}")
            continue
        if start < cursor:
            problems.append(f"token {i} overlaps the previous token")
        gap = sentence.text[cursor:start]
        if gap.strip():
            problems.append(f"non-whitespace gap {gap!r} before token {i}")
        if sentence.text[start:stop] != token.surface:
            problems.append(
                f"token {i} surface {token.surface!r} does not match text slice"
            )
        cursor = stop
    if sentence.tokens and sentence.text[cursor:].strip():
        problems.append(f"trailing text {sentence.text[cursor:]!r} not covered")
    return problems


def _spans_for(text: str, surfaces: Iterable[str]) -> list[tuple[int, int]]:
    """Assign character spans by walking the text; whitespace gaps allowed."""
    spans = []
    cursor = 0
    for surface in surfaces:
        start = text.find(surface, cursor)
        if start < 0 or text[cursor:start].strip():
            raise MalformedRecord(0, surface, "surface not found at expected offset")
        spans.append((start, start + len(surface)))
        cursor = start + len(surface)
    return spans


def _decode_fixture_token(obj: dict, span: tuple[int, int]) -> Token:
    return Token(
        surface=obj["surface"],
        lemma=obj["lemma"],
        pos=PartOfSpeech(obj["pos"]),
        pos_fine=obj["pos_fine"],
        cform=None if obj.get("cform") is None else ConjugationForm(obj["cform"]),
        span=span,
    )


def _bundled(name: str):
    return resources.files("rentai").joinpath("data").joinpath(name)


class FixtureAnalyzer:
    """Serves frozen gold analyses, keyed by exact sentence text."""

    def __init__(self, sentences: dict[str, TokenizedSentence]):
        self._sentences = dict(sentences)

    @classmethod
    def bundled(cls) -> "FixtureAnalyzer":
        with _bundled("tokens.jsonl").open("r", encoding="utf-8") as fh:
            return cls._from_lines(fh)

    @classmethod
    def from_jsonl(cls, path: str | Path) -> "FixtureAnalyzer":
        with open(path, "r", encoding="utf-8") as fh:
            return cls._from_lines(fh)

    @classmethod
    def _from_lines(cls, lines: Iterable[str]) -> "FixtureAnalyzer":
        sentences = {}
        for number, line in enumerate(lines, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
                text = obj["text"]
                surfaces = [tok["surface"] for tok in obj["tokens"]]
                spans = _spans_for(text, surfaces)
                tokens = tuple(
                    _decode_fixture_token(tok, span)
                    for tok, span in zip(obj["tokens"], spans)
                )
            except (KeyError, ValueError, TypeError) as exc:
                raise MalformedRecord(number, line[:80], str(exc)) from exc
            sentences[text] = TokenizedSentence(
                text=text, tokens=tokens, provenance=Provenance.FIXTURE
            )
        return cls(sentences)

    def known_texts(self) -> list[str]:
        return list(self._sentences)

    def analyze(self, text: str) -> TokenizedSentence:
        text = text.strip()
        if not text:
            raise EmptyInput("cannot analyze blank text")
        try:
            return self._sentences[text]
        except KeyError:
            raise FixtureMiss(text) from None


def parse_external_analysis(
    stream, *, provenance: Provenance = Provenance.EXTERNAL
) -> list[TokenizedSentence]:
    """Parse analyzer output: ``surface<TAB>feature-csv`` lines, EOS per sentence.

    ``stream`` is a string or any iterable of lines.  Feature fields follow
    the IPADIC layout ``pos1,pos2,pos3,pos4,ctype,cform,lemma[,reading,pron]``;
    missing fields are tolerated from ``ctype`` onward, and ``*`` means
    absent.  Unknown POS strings map to :attr:`PartOfSpeech.OTHER` with
    ``pos_fine`` preserved.
    """
    lines = stream.splitlines() if isinstance(stream, str) else stream
    sentences: list[TokenizedSentence] = []
    rows: list[tuple[str, str, PartOfSpeech, str, ConjugationForm | None]] = []
    number = 0
    for number, line in enumerate(lines, start=1):
        line = line.rstrip("\n")
        if not line.strip():
            continue
        if line.strip() == "EOS":
            sentences.append(_sentence_from_rows(rows, provenance))
            rows = []
            continue
        if "\t" not in line:
            raise MalformedRecord(number, line, "expected surface<TAB>features")
        surface, _, feature_csv = line.partition("\t")
        if not surface:
            raise MalformedRecord(number, line, "empty surface")
        features = feature_csv.split(",")
        if len(features) < 2:
            raise MalformedRecord(number, line, "too few feature fields")
        pos_chain = [f for f in features[:4] if f and f != "*"]
        if not pos_chain:
            raise MalformedRecord(number, line, "missing POS field")
        cform_field = features[5] if len(features) > 5 else "*"
        lemma_field = features[6] if len(features) > 6 else "*"
        rows.append(
            (
                surface,
                surface if lemma_field in ("", "*") else lemma_field,
                _POS_MAP.get(pos_chain[0], PartOfSpeech.OTHER),
                ",".join(pos_chain),
                None
                if cform_field in ("", "*")
                else _CFORM_MAP.get(cform_field, ConjugationForm.OTHER),
            )
        )
    if rows:
        raise MalformedRecord(number or 1, "", "missing EOS terminator")
    return sentences


def _sentence_from_rows(rows, provenance: Provenance) -> TokenizedSentence:
    text = "".join(surface for surface, *_ in rows)
    spans = _spans_for(text, (surface for surface, *_ in rows))
    tokens = tuple(
        Token(surface=s, lemma=l, pos=p, pos_fine=f, cform=c, span=span)
        for (s, l, p, f, c), span in zip(rows, spans)
    )
    return TokenizedSentence(text=text, tokens=tokens, provenance=provenance)


class ExternalAnalyzer:
    """Runs an analyzer subprocess speaking the exchange format.

    The command receives the sentence on stdin and must answer with one
    ``surface<TAB>features`` line per token plus an ``EOS`` line.  Access to
    the subprocess is serialized; instances are otherwise immutable.
    """

    def __init__(self, argv: list[str], *, timeout: float = 30.0):
        self._argv = list(argv)
        self._timeout = timeout
        self._lock = threading.Lock()

    def analyze(self, text: str) -> TokenizedSentence:
        text = text.strip()
        if not text:
            raise EmptyInput("cannot analyze blank text")
        with self._lock:
            proc = subprocess.run(
                self._argv,
                input=text,
                capture_output=True,
                text=True,
                timeout=self._timeout,
            )
        if proc.returncode != 0:
            raise AnalysisError(
                f"analyzer exited with {proc.returncode}: {proc.stderr.strip()}"
            )
        parsed = parse_external_analysis(proc.stdout)
        if len(parsed) != 1:
            raise AnalysisError(f"expected one sentence, analyzer returned {len(parsed)}")
        sentence = parsed[0]
        if sentence.text != text:
            # 出力が入力文を再構成できなければ解析器の不具合
            raise AnalysisError(
                f"analyzer output reconstructs {sentence.text!r}, expected {text!r}"
            )
        return sentence
