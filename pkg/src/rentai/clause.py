"""Bunsetsu chunking, attributive-clause detection, and scope filtering.

The scope filter keeps a sentence only when all three hold:

* the attributive clause stands in an inner relation to the noun it
  modifies (the noun fills an argument gap of the clause predicate),
* the main-clause predicate is verbal, and
* the gap the noun fills is the nominative one.

Relation and gap are inferred with a case-saturation heuristic over the
particles inside the clause; see :func:`classify_relation`.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from enum import Enum
from typing import Iterable, Sequence

from .morphology import ConjugationForm, PartOfSpeech, Token, TokenizedSentence


class CaseRole(str, Enum):
    """Main-clause semantic role of the modified noun."""

    NOMINATIVE = "nominative"
    ACCUSATIVE = "accusative"
    DATIVE = "dative"
    CAUSATIVE = "causative"
    ALLATIVE = "allative"
    LOCATIVE = "locative"
    ADVERBIAL = "adverbial"


class SubordinationClass(str, Enum):
    """Relative strength of the noun's tie to clause verb vs. main verb."""

    CLAUSE_STRONGER = "clause-stronger"
    EQUAL = "equal"


class RelationKind(str, Enum):
    INNER = "inner"
    OUTER = "outer"


@dataclass(frozen=True)
class Relation:
    """Inner relation with one gap role, or outer relation."""

    kind: RelationKind
    gap_role: CaseRole | None = None
    note: str = ""

    def __post_init__(self):
        if self.kind is RelationKind.INNER and self.gap_role is None:
            raise ValueError("inner relation requires a gap role")
        if self.kind is RelationKind.OUTER and self.gap_role is not None:
            raise ValueError("outer relation carries no gap role")

    @property
    def is_inner(self) -> bool:
        return self.kind is RelationKind.INNER

    @classmethod
    def inner(cls, gap_role: CaseRole, note: str = "") -> "Relation":
        return cls(RelationKind.INNER, gap_role, note)

    @classmethod
    def outer(cls, note: str = "") -> "Relation":
        return cls(RelationKind.OUTER, None, note)

    def describe(self) -> str:
        if self.is_inner:
            return f"inner({self.gap_role.value})"
        return "outer"


_CONTENT_POS = (
    PartOfSpeech.NOUN,
    PartOfSpeech.VERB,
    PartOfSpeech.ADJECTIVE,
    PartOfSpeech.ADVERB,
)

#: 接続助詞 that close off an independent clause; walking the clause boundary
#: stops here.  Continuative linkers (て, で, ながら, ず, なり, つつ) are not
#: listed: a preceding predicate linked by them shares the gap subject and
#: belongs to the attributive clause.
_BOUNDARY_CONJUNCTIONS = frozenset(
    {"ので", "から", "のに", "けれど", "けれども", "けど", "し", "と", "ば", "なら"}
)

#: Case particles whose presence inside the clause saturates a slot.
_CASE_SLOTS = {"が": CaseRole.NOMINATIVE, "を": CaseRole.ACCUSATIVE, "に": CaseRole.DATIVE}

#: Gap priority when several slots are open.
_GAP_PRIORITY = (CaseRole.NOMINATIVE, CaseRole.ACCUSATIVE, CaseRole.DATIVE)

#: Head nouns that take an outer-relation (content) clause.  Closed but
#: configurable; callers may pass their own set.
DEFAULT_OUTER_NOUNS = frozenset(
    {"可能性", "こと", "事実", "話", "予定", "音", "におい", "気持ち"}
)


@dataclass(frozen=True)
class Chunk:
    """One bunsetsu: a content word plus trailing function words."""

    tokens: tuple[Token, ...]
    start: int
    """Index of the first token within the sentence."""

    head_index: int
    """Index (within the chunk) of the content head."""

    is_predicate: bool
    predicate_kind: str | None
    """``verbal`` / ``adjectival`` / ``copular`` / ``None``."""

    trailing_particle_tokens: tuple[Token, ...]

    @property
    def stop(self) -> int:
        return self.start + len(self.tokens)

    @property
    def surface(self) -> str:
        return "".join(t.surface for t in self.tokens)

    @property
    def trailing_particles(self) -> tuple[str, ...]:
        return tuple(t.surface for t in self.trailing_particle_tokens)

    @property
    def last_content_token(self) -> Token | None:
        """Last token that is not a symbol."""
        for token in reversed(self.tokens):
            if token.pos is not PartOfSpeech.SYMBOL:
                return token
        return None

    def noun_run(self) -> tuple[Token, ...]:
        """Leading contiguous noun tokens (the would-be head noun)."""
        run: list[Token] = []
        for token in self.tokens:
            if token.pos is PartOfSpeech.SYMBOL:
                if run:
                    break
                continue  # opening bracket before the content word
            if token.pos is PartOfSpeech.NOUN or (
                not run and token.pos_fine_startswith("接頭詞")
            ):
                run.append(token)
            else:
                break
        return tuple(run)

    def is_topic_only(self) -> bool:
        """True for chunks bound to the main predicate by a bare topic は."""
        return self.trailing_particles == ("は",)


def _attaches(current: list[Token], token: Token) -> bool:
    """Does ``token`` continue the bunsetsu being built?"""
    if not current:
        return True
    if all(t.pos is PartOfSpeech.SYMBOL for t in current):
        return True  # 括弧開 attaches forward
    if token.pos is PartOfSpeech.SYMBOL:
        return not token.pos_fine_startswith("記号,括弧開")
    if token.pos in (PartOfSpeech.PARTICLE, PartOfSpeech.AUXILIARY):
        return True
    last = next(
        t for t in reversed(current) if t.pos is not PartOfSpeech.SYMBOL
    )
    if token.pos is PartOfSpeech.VERB:
        if token.pos_fine_startswith("動詞,非自立") or token.pos_fine_startswith(
            "動詞,接尾"
        ):
            return True
        # サ変名詞+する compound (殺害した, 連呼する)
        return last.pos is PartOfSpeech.NOUN and last.pos_fine_startswith(
            "名詞,サ変接続"
        )
    if token.pos is PartOfSpeech.NOUN:
        if token.pos_fine_startswith("名詞,接尾"):
            return True
        # 複合名詞 (四日夜, アルバイト女性, 午前八時)
        return last.pos is PartOfSpeech.NOUN or last.pos_fine_startswith("接頭詞")
    if token.pos is PartOfSpeech.ADJECTIVE and token.pos_fine_startswith(
        "形容詞,非自立"
    ):
        return True
    return False


def _finish_chunk(tokens: list[Token], start: int) -> Chunk:
    head_index = 0
    for i, token in enumerate(tokens):
        if token.pos in _CONTENT_POS or token.pos_fine_startswith(
            ("連体詞", "接続詞", "感動詞", "接頭詞")
        ):
            head_index = i

    has_verb = any(t.pos is PartOfSpeech.VERB for t in tokens)
    has_adj = any(t.pos is PartOfSpeech.ADJECTIVE for t in tokens)
    copular = any(
        t.pos is PartOfSpeech.AUXILIARY
        and t.lemma in ("だ", "です")
        and i > 0
        and tokens[i - 1].pos is PartOfSpeech.NOUN
        for i, t in enumerate(tokens)
    )
    if has_verb:
        kind = "verbal"
    elif has_adj:
        kind = "adjectival"
    elif copular:
        kind = "copular"
    else:
        kind = None

    trailing: list[Token] = []
    for token in reversed(tokens):
        if token.pos is PartOfSpeech.SYMBOL:
            continue
        if token.pos is PartOfSpeech.PARTICLE:
            trailing.append(token)
        else:
            break
    trailing.reverse()

    return Chunk(
        tokens=tuple(tokens),
        start=start,
        head_index=head_index,
        is_predicate=kind is not None,
        predicate_kind=kind,
        trailing_particle_tokens=tuple(trailing),
    )


def chunk_sentence(sentence: TokenizedSentence) -> list[Chunk]:
    """Partition the sentence into bunsetsu, in order."""
    chunks: list[Chunk] = []
    current: list[Token] = []
    start = 0
    for index, token in enumerate(sentence.tokens):
        if current and not _attaches(current, token):
            chunks.append(_finish_chunk(current, start))
            current, start = [], index
        if not current:
            start = index
        current.append(token)
    if current:
        chunks.append(_finish_chunk(current, start))
    return chunks


@dataclass(frozen=True)
class ClauseCandidate:
    """A detected attributive clause and the noun it modifies."""

    clause_token_range: tuple[int, int]
    """Half-open token index range; ends right before the head noun's chunk."""

    head_noun_token: Token
    head_noun_surface: str
    head_noun_lemma: str
    """Lemma of the final noun in the head compound (lexicon lookups)."""

    clause_predicate: Token
    clause_start_chunk: int
    predicate_chunk: int
    head_chunk: int
    relation: Relation
    main_predicate_verbal: bool

    def clause_surface(self, sentence: TokenizedSentence) -> str:
        start, stop = self.clause_token_range
        return "".join(t.surface for t in sentence.tokens[start:stop])

    def clause_tokens(self, sentence: TokenizedSentence) -> tuple[Token, ...]:
        start, stop = self.clause_token_range
        return tuple(sentence.tokens[start:stop])


@dataclass(frozen=True)
class ScopeDecision:
    """The three scope conditions plus the combined verdict."""

    in_scope: bool
    condition_inner_relation: bool
    condition_main_predicate_verbal: bool
    condition_nominative_gap: bool
    reasons: tuple[str, ...]

    def to_record(self, sentence_id: str = "") -> dict:
        return {
            "sentence_id": sentence_id,
            "in_scope": self.in_scope,
            "condition_inner_relation": self.condition_inner_relation,
            "condition_main_predicate_verbal": self.condition_main_predicate_verbal,
            "condition_nominative_gap": self.condition_nominative_gap,
            "reasons": list(self.reasons),
        }


class UnmappedParticle(Exception):
    """Head-noun particle outside the role mapping; reported, not guessed."""

    def __init__(self, particle: str):
        super().__init__(f"no role mapping for particle {particle!r}")
        self.particle = particle


def _adnominal_source(chunk: Chunk) -> Token | None:
    """The token licensing adnominal position, or None.

    The chunk must be a verbal or adjectival predicate whose final content
    token is a verb, adjective, or auxiliary in terminal/adnominal form with
    no trailing particles (a trailing particle binds the predicate elsewhere).
    """
    if chunk.predicate_kind not in ("verbal", "adjectival"):
        return None
    last = chunk.last_content_token
    if last is None or last.pos not in (
        PartOfSpeech.VERB,
        PartOfSpeech.ADJECTIVE,
        PartOfSpeech.AUXILIARY,
    ):
        return None
    if last.cform not in (ConjugationForm.TERMINAL, ConjugationForm.ADNOMINAL):
        return None
    return last


def _clause_start(chunks: Sequence[Chunk], predicate_index: int) -> int:
    """Walk left from the adnominal predicate to the clause boundary."""
    start = predicate_index
    for j in range(predicate_index - 1, -1, -1):
        chunk = chunks[j]
        if chunk.is_topic_only():
            break  # topic は binds to the main predicate
        if chunk.is_predicate and any(
            t.surface in _BOUNDARY_CONJUNCTIONS
            and t.pos_fine_startswith("助詞,接続助詞")
            for t in chunk.trailing_particle_tokens
        ):
            break  # independent clause ends here (ので, のに, ...)
        start = j
    return start


def _main_predicate_chunk(chunks: Sequence[Chunk]) -> Chunk | None:
    for chunk in reversed(chunks):
        if chunk.last_content_token is not None:
            return chunk
    return None


def main_predicate_is_verbal(
    sentence: TokenizedSentence,
    candidate: "ClauseCandidate | None" = None,
    chunks: Sequence[Chunk] | None = None,
) -> bool:
    """True iff the sentence-final predicate (outside the clause) is verbal."""
    if chunks is None:
        chunks = chunk_sentence(sentence)
    final = _main_predicate_chunk(chunks)
    if final is None:
        return False
    if candidate is not None and final.start < chunks[candidate.head_chunk].start:
        return False  # sentence ends at the head noun; no main predicate
    return final.predicate_kind == "verbal"


def classify_relation(
    candidate: ClauseCandidate,
    sentence: TokenizedSentence,
    outer_nouns: Iterable[str] = DEFAULT_OUTER_NOUNS,
) -> Relation:
    """Inner/outer relation via the case-saturation heuristic.

    Outer when the head noun is a known content noun or when every tracked
    case slot already has an overt argument inside the clause; otherwise
    inner, with the gap being the highest-priority open slot.
    """
    outer_set = frozenset(outer_nouns)
    if candidate.head_noun_lemma in outer_set:
        return Relation.outer(
            f"head noun {candidate.head_noun_surface} is a content noun"
        )
    saturated: set[CaseRole] = set()
    for token in candidate.clause_tokens(sentence):
        if token.pos is not PartOfSpeech.PARTICLE:
            continue
        if token.pos_fine_startswith("助詞,格助詞") and token.surface in _CASE_SLOTS:
            saturated.add(_CASE_SLOTS[token.surface])
        elif token.pos_fine_startswith("助詞,係助詞") and token.surface == "は":
            # 主題の「は」は主語扱い
            saturated.add(CaseRole.NOMINATIVE)
    for role in _GAP_PRIORITY:
        if role not in saturated:
            return Relation.inner(role, f"open {role.value} slot")
    return Relation.outer("all case slots saturated")


def detect_attributive_clauses(
    sentence: TokenizedSentence,
    chunks: Sequence[Chunk] | None = None,
    outer_nouns: Iterable[str] = DEFAULT_OUTER_NOUNS,
) -> list[ClauseCandidate]:
    """All (predicate chunk, noun chunk) adnominal pairs, left to right."""
    if chunks is None:
        chunks = chunk_sentence(sentence)
    candidates: list[ClauseCandidate] = []
    for i in range(len(chunks) - 1):
        predicate_token = _adnominal_source(chunks[i])
        if predicate_token is None:
            continue
        head_run = chunks[i + 1].noun_run()
        if not head_run:
            continue
        start_chunk = _clause_start(chunks, i)
        draft = ClauseCandidate(
            clause_token_range=(chunks[start_chunk].start, chunks[i + 1].start),
            head_noun_token=head_run[0],
            head_noun_surface="".join(t.surface for t in head_run),
            head_noun_lemma=head_run[-1].lemma,
            clause_predicate=predicate_token,
            clause_start_chunk=start_chunk,
            predicate_chunk=i,
            head_chunk=i + 1,
            relation=Relation.outer("unclassified"),
            main_predicate_verbal=False,
        )
        candidates.append(
            replace(
                draft,
                relation=classify_relation(draft, sentence, outer_nouns),
                main_predicate_verbal=main_predicate_is_verbal(
                    sentence, draft, chunks
                ),
            )
        )
    return candidates


def primary_candidate(
    candidates: Sequence[ClauseCandidate],
) -> ClauseCandidate | None:
    """Leftmost candidate whose clause is not nested inside another's.

    Nested candidates (a clause wholly contained in a longer clause) modify
    clause-internal nouns; the outermost structure is the one the sentence
    is about.
    """

    def contained(inner: ClauseCandidate, outer: ClauseCandidate) -> bool:
        (istart, istop), (ostart, ostop) = (
            inner.clause_token_range,
            outer.clause_token_range,
        )
        return (
            inner is not outer
            and ostart <= istart
            and istop <= ostop
            and (istart, istop) != (ostart, ostop)
        )

    maximal = [
        c for c in candidates if not any(contained(c, o) for o in candidates)
    ]
    if not maximal:
        return None
    return min(maximal, key=lambda c: (c.clause_token_range[0], c.head_chunk))


def scope_check(
    sentence: TokenizedSentence,
    outer_nouns: Iterable[str] = DEFAULT_OUTER_NOUNS,
) -> tuple[ClauseCandidate | None, ScopeDecision]:
    """Evaluate the three scope conditions on the primary candidate."""
    chunks = chunk_sentence(sentence)
    candidates = detect_attributive_clauses(sentence, chunks, outer_nouns)
    candidate = primary_candidate(candidates)
    if candidate is None:
        return None, ScopeDecision(
            in_scope=False,
            condition_inner_relation=False,
            condition_main_predicate_verbal=False,
            condition_nominative_gap=False,
            reasons=("no attributive clause",),
        )
    relation = candidate.relation
    inner_ok = relation.is_inner
    verbal_ok = candidate.main_predicate_verbal
    nominative_ok = inner_ok and relation.gap_role is CaseRole.NOMINATIVE
    reasons: list[str] = []
    if not inner_ok:
        reasons.append(
            f"outer relation: {relation.note or 'content-noun head'}"
        )
    if not verbal_ok:
        reasons.append("main-clause predicate is not verbal")
    if not nominative_ok:
        if inner_ok:
            reasons.append(
                f"gap role is {relation.gap_role.value}, not nominative"
            )
        else:
            reasons.append("no nominative gap (relation is outer)")
    decision = ScopeDecision(
        in_scope=inner_ok and verbal_ok and nominative_ok,
        condition_inner_relation=inner_ok,
        condition_main_predicate_verbal=verbal_ok,
        condition_nominative_gap=nominative_ok,
        reasons=tuple(reasons),
    )
    return candidate, decision


def classify_main_clause_role(
    sentence: TokenizedSentence,
    candidate: ClauseCandidate,
    chunks: Sequence[Chunk] | None = None,
) -> CaseRole:
    """Map the particle(s) after the head noun to its main-clause role."""
    if not candidate.relation.is_inner:
        raise ValueError("main-clause role is defined for inner relations only")
    if chunks is None:
        chunks = chunk_sentence(sentence)
    head = chunks[candidate.head_chunk]
    # によって is one 連語 token under some dictionaries, に+よっ+て under others
    for i, token in enumerate(head.tokens):
        if token.surface == "によって" and token.pos_fine_startswith("助詞,格助詞"):
            return CaseRole.CAUSATIVE
        if (
            token.surface == "に"
            and token.pos is PartOfSpeech.PARTICLE
            and i + 2 < len(head.tokens)
            and head.tokens[i + 1].lemma == "よる"
            and head.tokens[i + 2].surface == "て"
        ):
            return CaseRole.CAUSATIVE
    particles = head.trailing_particle_tokens
    if not particles:
        return CaseRole.ADVERBIAL
    first = particles[0]
    surface = first.surface
    if surface == "が" and first.pos_fine_startswith("助詞,格助詞"):
        return CaseRole.NOMINATIVE
    if surface == "は" and first.pos_fine_startswith("助詞,係助詞"):
        for chunk in chunks[candidate.head_chunk + 1 :]:
            if any(
                t.surface == "が" and t.pos_fine_startswith("助詞,格助詞")
                for t in chunk.trailing_particle_tokens
            ):
                # 主題「は」と別の「が」主語が並ぶ文は対応表の外
                raise UnmappedParticle("は")
        return CaseRole.NOMINATIVE
    if surface == "を":
        return CaseRole.ACCUSATIVE
    if surface == "に":
        main = _main_predicate_chunk(chunks)
        if main is not None and any(
            t.lemma in ("せる", "させる") for t in main.tokens
        ):
            return CaseRole.CAUSATIVE
        return CaseRole.DATIVE
    if surface == "へ":
        return CaseRole.ALLATIVE
    if surface == "で":
        return CaseRole.LOCATIVE
    raise UnmappedParticle(surface)


def subordination_class(role: CaseRole) -> SubordinationClass:
    """Nominative ties are as strong as the clause tie; all others weaker."""
    if role is CaseRole.NOMINATIVE:
        return SubordinationClass.EQUAL
    return SubordinationClass.CLAUSE_STRONGER
