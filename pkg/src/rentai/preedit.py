"""Rewrite an in-scope sentence into two sentences.

Sentence A promotes the modified noun to topic of the former attributive
clause; sentence B is the original main clause with the noun (and its
original particle) kept in place.  Tokens are copied verbatim, so the
rewrite is deterministic and byte-stable.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from typing import Sequence

from .clause import (
    CaseRole,
    Chunk,
    ClauseCandidate,
    chunk_sentence,
    scope_check,
)
from .morphology import PartOfSpeech, Token, TokenizedSentence

_CONTENT_POS = (
    PartOfSpeech.NOUN,
    PartOfSpeech.VERB,
    PartOfSpeech.ADJECTIVE,
    PartOfSpeech.ADVERB,
)


class NotInScope(Exception):
    """The sentence failed the scope filter; it must not be pre-edited."""

    def __init__(self, reasons: Sequence[str]):
        super().__init__("; ".join(reasons) or "sentence is out of scope")
        self.reasons = tuple(reasons)


@dataclass(frozen=True)
class PreEditResult:
    """The two-sentence rewrite and how it was produced."""

    sentence_a: str
    sentence_b: str
    head_noun_surface: str
    rule_trace: tuple[str, ...]

    # Token slices backing the output strings; these let the structural
    # check compare content without re-analyzing the rewritten text.
    tokens_a: tuple[Token, ...] = field(repr=False)
    tokens_b: tuple[Token, ...] = field(repr=False)
    head_token_count: int = field(repr=False, default=1)

    def to_json(self) -> dict:
        return {
            "sentence_a": self.sentence_a,
            "sentence_b": self.sentence_b,
            "head_noun": self.head_noun_surface,
            "rule_trace": list(self.rule_trace),
        }


def _strip_trailing_comma(tokens: list[Token]) -> tuple[list[Token], bool]:
    if tokens and tokens[-1].pos_fine_startswith("記号,読点"):
        return tokens[:-1], True
    return tokens, False


def preedit(
    sentence: TokenizedSentence,
    candidate: ClauseCandidate | None = None,
) -> PreEditResult:
    """Apply the two-sentence rewrite to an in-scope sentence."""
    if candidate is None:
        candidate, decision = scope_check(sentence)
        if candidate is None or not decision.in_scope:
            raise NotInScope(decision.reasons)
    else:
        in_scope = (
            candidate.relation.is_inner
            and candidate.relation.gap_role is CaseRole.NOMINATIVE
            and candidate.main_predicate_verbal
        )
        if not in_scope:
            raise NotInScope(
                (f"candidate with head {candidate.head_noun_surface} "
                 "fails the scope conditions",)
            )

    chunks = chunk_sentence(sentence)
    head_chunk = chunks[candidate.head_chunk]
    head_run = head_chunk.noun_run()
    head = candidate.head_noun_surface
    trace: list[str] = []

    clause_tokens = list(candidate.clause_tokens(sentence))
    clause_tokens, dropped = _strip_trailing_comma(clause_tokens)
    clause_surface = "".join(t.surface for t in clause_tokens)
    sentence_a = head + "は" + clause_surface + "。"
    trace.append(f"sentence A: {head} + は + clause + 。")
    if dropped:
        trace.append("sentence A: dropped clause-final 、")

    # Sentence B: everything outside the clause.  The head chunk keeps its
    # place when it is already topic/subject marked; otherwise it moves
    # directly after the first topic chunk so the particle-marked noun does
    # not dangle in front of its clause-mate.
    head_b_tokens, dropped_b = _strip_trailing_comma(list(head_chunk.tokens))
    if dropped_b:
        trace.append("sentence B: dropped 、 after the head noun's particle")
    remainder: list[tuple[str, list[Token]]] = []
    for i, chunk in enumerate(chunks):
        if candidate.clause_start_chunk <= i <= candidate.predicate_chunk:
            continue
        if i == candidate.head_chunk:
            remainder.append(("head", head_b_tokens))
        else:
            remainder.append(("", list(chunk.tokens)))

    head_particles = head_chunk.trailing_particles
    keep_in_place = bool(head_particles) and head_particles[0] in ("は", "が")
    if not keep_in_place:
        topic_at = next(
            (
                j
                for j, (kind, toks) in enumerate(remainder)
                if kind != "head"
                and _is_topic_chunk(chunks, candidate, toks)
            ),
            None,
        )
        head_at = next(j for j, (kind, _) in enumerate(remainder) if kind == "head")
        if topic_at is not None and topic_at != head_at:
            moved = remainder.pop(head_at)
            if head_at < topic_at:
                topic_at -= 1
            remainder.insert(topic_at + 1, moved)
            topic_surface = "".join(t.surface for t in remainder[topic_at][1])
            trace.append(
                f"sentence B: moved {head}{''.join(head_particles)} after "
                f"the topic {topic_surface}"
            )
        else:
            trace.append("sentence B: head noun kept in original position")
    else:
        trace.append(
            "sentence B: head noun already topic/subject marked; kept in place"
        )

    tokens_b = [t for _, toks in remainder for t in toks]
    sentence_b = "".join(t.surface for t in tokens_b)
    if not sentence_b.endswith("。"):
        sentence_b += "。"
        trace.append("sentence B: closed with 。")

    return PreEditResult(
        sentence_a=sentence_a,
        sentence_b=sentence_b,
        head_noun_surface=head,
        rule_trace=tuple(trace),
        tokens_a=tuple(head_run) + tuple(clause_tokens),
        tokens_b=tuple(tokens_b),
        head_token_count=len(head_run),
    )


def _is_topic_chunk(
    chunks: Sequence[Chunk], candidate: ClauseCandidate, tokens: list[Token]
) -> bool:
    if not tokens:
        return False
    start = tokens[0].span[0]
    for chunk in chunks:
        if chunk.tokens and chunk.tokens[0].span[0] == start:
            return chunk.is_topic_only()
    return False


def structural_diagnostics(
    result: PreEditResult, original: TokenizedSentence
) -> list[str]:
    """All the ways the rewrite deviates from a faithful split, if any."""
    problems: list[str] = []
    head = result.head_noun_surface

    if not result.sentence_a.startswith(head + "は"):
        problems.append("sentence A does not open with head noun + は")
    for name, text in (("A", result.sentence_a), ("B", result.sentence_b)):
        if not text.endswith("。"):
            problems.append(f"sentence {name} does not end with 。")
        if text.count("。") != 1:
            problems.append(f"sentence {name} is not a single sentence")
        count = text.count(head)
        if count != 1:
            problems.append(
                f"head noun occurs {count} times in sentence {name}, expected 1"
            )

    # The output strings must be exactly the recorded tokens plus the two
    # inserted characters.
    head_surface = "".join(
        t.surface for t in result.tokens_a[: result.head_token_count]
    )
    clause_surface = "".join(
        t.surface for t in result.tokens_a[result.head_token_count :]
    )
    if result.sentence_a != head_surface + "は" + clause_surface + "。":
        problems.append("sentence A does not match its token backing")
    if result.sentence_b != "".join(t.surface for t in result.tokens_b):
        problems.append("sentence B does not match its token backing")

    # Content conservation: lemma multiset of the outputs equals the
    # original's, with the head-noun tokens counted twice.
    def content(tokens) -> Counter:
        return Counter(
            (t.pos, t.lemma) for t in tokens if t.pos in _CONTENT_POS
        )

    expected = content(original.tokens) + content(
        result.tokens_a[: result.head_token_count]
    )
    actual = content(result.tokens_a) + content(result.tokens_b)
    if expected != actual:
        missing = expected - actual
        invented = actual - expected
        if missing:
            problems.append(f"content tokens dropped: {sorted(missing)}")
        if invented:
            problems.append(f"content tokens invented: {sorted(invented)}")

    # Nothing else dropped or invented: ignoring punctuation, the combined
    # token multiset must match the original plus the duplicated head run.
    def all_tokens(tokens) -> Counter:
        return Counter(
            (t.surface, t.pos)
            for t in tokens
            if t.pos is not PartOfSpeech.SYMBOL
        )

    expected_all = all_tokens(original.tokens) + all_tokens(
        result.tokens_a[: result.head_token_count]
    )
    actual_all = all_tokens(result.tokens_a) + all_tokens(result.tokens_b)
    if expected_all != actual_all:
        problems.append("token multiset changed beyond the inserted は/。")

    return problems


def structural_check(result: PreEditResult, original: TokenizedSentence) -> bool:
    """True iff the rewrite is structurally faithful to the original."""
    return not structural_diagnostics(result, original)
