"""Prompt templates and the three translation strategies.

Templates live as text resources with a single ``{payload}`` slot and are
instantiated verbatim, so rendered prompts are byte-stable.  Strategies:

* ``baseline`` sends the sentence straight to translation.
* ``llm-assisted`` asks the model to find the modified noun, restructure
  the sentence around it, and translate its own restructuring.
* ``local-preedit`` restructures locally and only uses the model to
  translate.
"""

from __future__ import annotations

import re
import time
from dataclasses import dataclass, field
from enum import Enum
from functools import lru_cache
from importlib import resources

from .clause import scope_check
from .morphology import TokenizedSentence
from .preedit import NotInScope, preedit


class PromptStep(str, Enum):
    DIRECT_TRANSLATE = "direct-translate"
    IDENTIFY_HEAD_NOUN = "identify-head-noun"
    RESTRUCTURE = "restructure"
    TRANSLATE_RESTRUCTURED = "translate-restructured"


class Strategy(str, Enum):
    BASELINE = "baseline"
    LLM_ASSISTED = "llm-assisted"
    LOCAL_PREEDIT = "local-preedit"


#: Prompt steps issued by each strategy, in order.  local-preedit precedes
#: its single prompt with the local rewrite.
STRATEGY_STEPS: dict[Strategy, tuple[PromptStep, ...]] = {
    Strategy.BASELINE: (PromptStep.DIRECT_TRANSLATE,),
    Strategy.LLM_ASSISTED: (
        PromptStep.IDENTIFY_HEAD_NOUN,
        PromptStep.RESTRUCTURE,
        PromptStep.TRANSLATE_RESTRUCTURED,
    ),
    Strategy.LOCAL_PREEDIT: (PromptStep.TRANSLATE_RESTRUCTURED,),
}


class EmptyPayload(ValueError):
    """render() called with nothing to put in the template."""


class Unparseable(Exception):
    """The head-noun reply contains no extractable Japanese noun."""


@lru_cache(maxsize=None)
def _template(step: PromptStep) -> str:
    path = resources.files("rentai").joinpath(f"data/templates/{step.value}.txt")
    text = path.read_text(encoding="utf-8")
    return text[:-1] if text.endswith("\n") else text


def render(step: PromptStep, payload: str, *, language: str = "Chinese") -> str:
    """Instantiate the template; the payload appears verbatim."""
    if not payload or not payload.strip():
        raise EmptyPayload(f"empty payload for step {step.value}")
    template = _template(step)
    if language != "Chinese":
        template = template.replace("Chinese", language)
    return template.replace("{payload}", payload)


_JAPANESE_RUN = re.compile(r"[぀-ヿ㐀-鿿豈-﫿々ー]+")
_AFTER_IS = re.compile(r"\bis\s+([^\s,.()（）「」]+)")
_QUOTED = re.compile(r"[「『“\"]([^」』”\"]+)[」』”\"]")
_TRAILING_PARTICLES = "はがをにのもとで"
_NON_ANSWERS = frozenset({"です", "ます", "だ", "である", "こと", "それ", "これ"})


def parse_head_noun_response(response: str) -> str:
    """Pull the noun out of an identify-head-noun reply.

    Tries the English answer frame ("... is 私 (I) ."), then quoted text,
    then falls back to the most substantial Japanese run in the reply's
    final segment.
    """
    m = _AFTER_IS.search(response)
    if m and _JAPANESE_RUN.fullmatch(m.group(1)):
        return m.group(1)
    m = _QUOTED.search(response)
    if m:
        runs = _JAPANESE_RUN.findall(m.group(1))
        if runs:
            return max(runs, key=len)

    segments = [
        seg
        for seg in re.split(r"[。．.!?！？\n]", response)
        if _JAPANESE_RUN.search(seg)
    ]
    if segments:
        best: tuple[int, int, str] | None = None
        for index, run in enumerate(_JAPANESE_RUN.findall(segments[-1])):
            candidate = run.rstrip(_TRAILING_PARTICLES) or run
            if candidate in _NON_ANSWERS:
                continue
            key = (len(candidate), index, candidate)
            if best is None or key >= best:
                best = key
        if best:
            return best[2]
    raise Unparseable(f"no Japanese noun found in reply: {response[:60]!r}")


@dataclass(frozen=True)
class PromptExchange:
    step: PromptStep
    prompt: str
    response: str


@dataclass
class TranslationRecord:
    """One pipeline run: every prompt/response pair plus the final text."""

    sentence_id: str
    strategy: Strategy
    steps: list[PromptExchange] = field(default_factory=list)
    final_text: str = ""
    restructured_source: str | None = None
    diagnostics: list[str] = field(default_factory=list)
    started_at: str = ""
    finished_at: str = ""

    def to_json(self) -> dict:
        return {
            "sentence_id": self.sentence_id,
            "strategy": self.strategy.value,
            "steps": [
                {"step": s.step.value, "prompt": s.prompt, "response": s.response}
                for s in self.steps
            ],
            "final_text": self.final_text,
            "restructured_source": self.restructured_source,
            "diagnostics": self.diagnostics,
            "started_at": self.started_at,
            "finished_at": self.finished_at,
        }


def _now() -> str:
    return time.strftime("%Y-%m-%dT%H:%M:%S%z")


def run_strategy(
    strategy: Strategy,
    sentence: TokenizedSentence,
    client,
    *,
    sentence_id: str = "",
    language: str = "Chinese",
) -> TranslationRecord:
    """Execute one strategy end to end through a chat-completion client."""
    record = TranslationRecord(
        sentence_id=sentence_id, strategy=strategy, started_at=_now()
    )

    def ask(step: PromptStep, payload: str) -> str:
        prompt = render(step, payload, language=language)
        response = client.complete([{"role": "user", "content": prompt}])
        record.steps.append(PromptExchange(step, prompt, response))
        return response

    if strategy is Strategy.BASELINE:
        record.final_text = ask(PromptStep.DIRECT_TRANSLATE, sentence.text)

    elif strategy is Strategy.LLM_ASSISTED:
        reply = ask(PromptStep.IDENTIFY_HEAD_NOUN, sentence.text)
        try:
            noun = parse_head_noun_response(reply)
        except Unparseable as exc:
            record.diagnostics.append(
                f"warning: {exc}; falling back to direct translation"
            )
            record.final_text = ask(PromptStep.DIRECT_TRANSLATE, sentence.text)
            record.finished_at = _now()
            return record
        candidate, decision = scope_check(sentence)
        if candidate is not None and decision.in_scope:
            if candidate.head_noun_surface == noun:
                record.diagnostics.append(
                    f"model head noun {noun} matches local analysis"
                )
            else:
                record.diagnostics.append(
                    f"model head noun {noun} differs from local analysis "
                    f"({candidate.head_noun_surface})"
                )
        payload = sentence.text[:-1] if sentence.text.endswith("。") else sentence.text
        restructured = ask(PromptStep.RESTRUCTURE, payload).strip()
        record.restructured_source = restructured
        if candidate is not None and decision.in_scope:
            local = preedit(sentence, candidate)
            if local.sentence_a + local.sentence_b != restructured:
                record.diagnostics.append(
                    "model restructuring differs from the local rewrite"
                )
        record.final_text = ask(PromptStep.TRANSLATE_RESTRUCTURED, restructured)

    elif strategy is Strategy.LOCAL_PREEDIT:
        candidate, decision = scope_check(sentence)
        if candidate is None or not decision.in_scope:
            raise NotInScope(decision.reasons)
        result = preedit(sentence, candidate)
        record.restructured_source = result.sentence_a + result.sentence_b
        record.diagnostics.append(
            f"pre-edited locally around head noun {result.head_noun_surface}"
        )
        record.final_text = ask(
            PromptStep.TRANSLATE_RESTRUCTURED, record.restructured_source
        )

    else:  # pragma: no cover - enum is closed
        raise ValueError(f"unknown strategy {strategy!r}")

    record.finished_at = _now()
    return record
