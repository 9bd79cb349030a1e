import random

import pytest

from rentai.corpus import load_corpus
from rentai.llm_client import (
    BackendConfig,
    LlmClient,
    load_chat_fixtures,
    mock_backend,
)
from rentai.morphology import (
    ConjugationForm,
    FixtureAnalyzer,
    PartOfSpeech,
    Provenance,
    Token,
    TokenizedSentence,
)


@pytest.fixture(scope="session")
def analyzer():
    return FixtureAnalyzer.bundled()


@pytest.fixture(scope="session")
def entries():
    return load_corpus()


@pytest.fixture(scope="session")
def by_id(entries):
    return {entry.id: entry for entry in entries}


@pytest.fixture
def mock_client():
    return LlmClient(BackendConfig(), backend=mock_backend(load_chat_fixtures()))


@pytest.fixture
def no_network(monkeypatch):
    """Any attempt to open a socket fails the test."""
    import socket

    def guard(*args, **kwargs):
        raise AssertionError("network access attempted")

    monkeypatch.setattr(socket, "socket", guard)
    monkeypatch.setattr(socket, "create_connection", guard)


# building blocks for synthetic in-scope sentences; each piece is a
# (surface, lemma, pos, pos_fine, cform) quintuple
N = PartOfSpeech.NOUN
V = PartOfSpeech.VERB
P = PartOfSpeech.PARTICLE
AUX = PartOfSpeech.AUXILIARY
ADV = PartOfSpeech.ADVERB
SYM = PartOfSpeech.SYMBOL
CONT = ConjugationForm.CONTINUATIVE
TERM = ConjugationForm.TERMINAL

_HEADS = [
    ("太郎", "太郎", N, "名詞,固有名詞,人名,名", None),
    ("花子", "花子", N, "名詞,固有名詞,人名,名", None),
    ("先生", "先生", N, "名詞,一般", None),
    ("学生", "学生", N, "名詞,一般", None),
]
_OBJECT_NOUNS = ["テレビ", "本", "ケーキ", "手紙"]
_CLAUSE_VERBS = [
    [("壊し", "壊す", V, "動詞,自立", CONT), ("た", "た", AUX, "助動詞", TERM)],
    [("読ん", "読む", V, "動詞,自立", CONT), ("だ", "だ", AUX, "助動詞", TERM)],
    [("食べ", "食べる", V, "動詞,自立", CONT), ("た", "た", AUX, "助動詞", TERM)],
]
_ADVERBS = [
    ("ゆっくり", "ゆっくり", ADV, "副詞,一般", None),
    ("すぐ", "すぐ", ADV, "副詞,助詞類接続", None),
]
_MAIN_TAILS = [
    [
        ("頭", "頭", N, "名詞,一般", None),
        ("を", "を", P, "助詞,格助詞,一般", None),
        ("下げ", "下げる", V, "動詞,自立", CONT),
        ("た", "た", AUX, "助動詞", TERM),
    ],
    [
        ("部屋", "部屋", N, "名詞,一般", None),
        ("に", "に", P, "助詞,格助詞,一般", None),
        ("入っ", "入る", V, "動詞,自立", CONT),
        ("た", "た", AUX, "助動詞", TERM),
    ],
    [("笑っ", "笑う", V, "動詞,自立", CONT), ("た", "た", AUX, "助動詞", TERM)],
]


def build_sentence(quintuples) -> TokenizedSentence:
    tokens = []
    offset = 0
    for surface, lemma, pos, pos_fine, cform in quintuples:
        tokens.append(
            Token(
                surface=surface,
                lemma=lemma,
                pos=pos,
                pos_fine=pos_fine,
                cform=cform,
                span=(offset, offset + len(surface)),
            )
        )
        offset += len(surface)
    text = "".join(t.surface for t in tokens)
    return TokenizedSentence(
        text=text, tokens=tuple(tokens), provenance=Provenance.FIXTURE
    )


def make_inscope_sentence(rng: random.Random) -> tuple[TokenizedSentence, str]:
    """One synthetic sentence satisfying all three scope conditions.

    Clause-internal pieces are shuffled so argument order varies; the
    accusative slot is always filled, the nominative one never is.
    """
    head = rng.choice(_HEADS)
    obj = [
        (rng.choice(_OBJECT_NOUNS),) * 2 + (N, "名詞,一般", None),
        ("を", "を", P, "助詞,格助詞,一般", None),
    ]
    clause_units = [obj]
    if rng.random() < 0.5:
        clause_units.append([rng.choice(_ADVERBS)])
    rng.shuffle(clause_units)
    quintuples = [q for unit in clause_units for q in unit]
    quintuples += rng.choice(_CLAUSE_VERBS)
    quintuples.append(head)
    quintuples.append(("は", "は", P, "助詞,係助詞", None))
    quintuples += rng.choice(_MAIN_TAILS)
    quintuples.append(("。", "。", SYM, "記号,句点", None))
    return build_sentence(quintuples), head[0]
