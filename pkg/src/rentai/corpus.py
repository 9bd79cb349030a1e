"""JSON Lines corpus of example sentences with gold annotations."""

from __future__ import annotations

import json
import os
import uuid
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Iterable

from .morphology import FixtureAnalyzer, reconstruction_problems

IN_SCOPE = "in-scope"
GOLD_EXACT = "gold-exact"

_KNOWN_TAGS = {
    IN_SCOPE,
    GOLD_EXACT,
    "paper-variant",
    "outer-relation",
    "excluded",
    "demo",
}


class SchemaError(ValueError):
    """A corpus line does not match the expected shape."""

    def __init__(self, line: int, fieldname: str, problem: str):
        self.line = line
        self.field = fieldname
        super().__init__(f"line {line}, field {fieldname!r}: {problem}")


class DuplicateId(ValueError):
    def __init__(self, entry_id: str, line: int):
        self.entry_id = entry_id
        self.line = line
        super().__init__(f"line {line}: duplicate entry id {entry_id!r}")


@dataclass(frozen=True)
class CorpusGold:
    """Reference answers for one entry; every part is optional.

    ``preedit`` is the canonical two-sentence split.  ``preedit_variant``
    holds a published split that deviates from the canonical rule (pronoun
    substitution and the like); such entries carry the paper-variant tag
    and are checked structurally, not byte-for-byte.
    """

    head_noun: str | None = None
    preedit: tuple[str, str] | None = None
    preedit_variant: str | None = None
    translations: dict[str, str] = field(default_factory=dict)
    scores: dict[str, int] = field(default_factory=dict)

    def to_json(self) -> dict:
        obj: dict = {}
        if self.head_noun is not None:
            obj["head_noun"] = self.head_noun
        if self.preedit is not None:
            obj["preedit"] = {
                "sentence_a": self.preedit[0],
                "sentence_b": self.preedit[1],
            }
        elif self.preedit_variant is not None:
            obj["preedit"] = {"paper_variant": self.preedit_variant}
        if self.translations:
            obj["translations"] = dict(self.translations)
        if self.scores:
            obj["scores"] = dict(self.scores)
        return obj


@dataclass(frozen=True)
class CorpusEntry:
    id: str
    source_text: str
    source_citation: str = ""
    gold: CorpusGold = field(default_factory=CorpusGold)
    tags: tuple[str, ...] = ()

    def has_tag(self, tag: str) -> bool:
        return tag in self.tags

    def to_json(self) -> dict:
        obj: dict = {"id": self.id, "source_text": self.source_text}
        if self.source_citation:
            obj["source_citation"] = self.source_citation
        gold = self.gold.to_json()
        if gold:
            obj["gold"] = gold
        if self.tags:
            obj["tags"] = list(self.tags)
        return obj


def _parse_entry(obj: dict, line: int) -> CorpusEntry:
    def need(name: str, kind) -> object:
        if name not in obj:
            raise SchemaError(line, name, "missing")
        value = obj[name]
        if not isinstance(value, kind):
            raise SchemaError(line, name, f"expected {kind.__name__}")
        return value

    entry_id = need("id", str)
    text = need("source_text", str)
    if not entry_id:
        raise SchemaError(line, "id", "empty")
    if not text:
        raise SchemaError(line, "source_text", "empty")

    citation = obj.get("source_citation", "")
    if not isinstance(citation, str):
        raise SchemaError(line, "source_citation", "expected str")

    tags_raw = obj.get("tags", [])
    if not isinstance(tags_raw, list) or not all(
        isinstance(t, str) for t in tags_raw
    ):
        raise SchemaError(line, "tags", "expected list of str")
    for tag in tags_raw:
        if tag not in _KNOWN_TAGS:
            raise SchemaError(line, "tags", f"unknown tag {tag!r}")

    gold_raw = obj.get("gold", {})
    if not isinstance(gold_raw, dict):
        raise SchemaError(line, "gold", "expected object")
    head = gold_raw.get("head_noun")
    if head is not None and not isinstance(head, str):
        raise SchemaError(line, "gold.head_noun", "expected str")
    preedit_raw = gold_raw.get("preedit")
    preedit: tuple[str, str] | None = None
    variant: str | None = None
    if preedit_raw is not None:
        if not isinstance(preedit_raw, dict):
            raise SchemaError(line, "gold.preedit", "expected object")
        keys = set(preedit_raw)
        if keys == {"sentence_a", "sentence_b"}:
            if not all(
                isinstance(preedit_raw[k], str) and preedit_raw[k] for k in keys
            ):
                raise SchemaError(line, "gold.preedit", "sentences must be non-empty")
            preedit = (preedit_raw["sentence_a"], preedit_raw["sentence_b"])
        elif keys == {"paper_variant"}:
            variant = preedit_raw["paper_variant"]
            if not isinstance(variant, str) or not variant:
                raise SchemaError(
                    line, "gold.preedit", "paper_variant must be non-empty"
                )
        else:
            raise SchemaError(
                line,
                "gold.preedit",
                "expected sentence_a/sentence_b or paper_variant",
            )
    translations = gold_raw.get("translations", {})
    if not isinstance(translations, dict) or not all(
        isinstance(k, str) and isinstance(v, str) for k, v in translations.items()
    ):
        raise SchemaError(line, "gold.translations", "expected str->str object")
    scores = gold_raw.get("scores", {})
    if not isinstance(scores, dict) or not all(
        isinstance(k, str) and isinstance(v, int) and 1 <= v <= 5
        for k, v in scores.items()
    ):
        raise SchemaError(line, "gold.scores", "expected str->int(1..5) object")

    return CorpusEntry(
        id=entry_id,
        source_text=text,
        source_citation=citation,
        gold=CorpusGold(
            head_noun=head,
            preedit=preedit,
            preedit_variant=variant,
            translations=dict(translations),
            scores=dict(scores),
        ),
        tags=tuple(tags_raw),
    )


def load_corpus(path: str | Path | None = None) -> list[CorpusEntry]:
    """Read entries from JSON Lines; the bundled corpus when no path given."""
    if path is None:
        text = resources.files("rentai").joinpath("data/corpus.jsonl").read_text(
            encoding="utf-8"
        )
    else:
        text = Path(path).read_text(encoding="utf-8")
    entries = []
    seen: dict[str, int] = {}
    for number, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise SchemaError(number, "<line>", f"invalid JSON: {exc.msg}") from exc
        if not isinstance(obj, dict):
            raise SchemaError(number, "<line>", "expected a JSON object")
        entry = _parse_entry(obj, number)
        if entry.id in seen:
            raise DuplicateId(entry.id, number)
        seen[entry.id] = number
        entries.append(entry)
    return entries


def save_corpus(entries: Iterable[CorpusEntry], path: str | Path) -> None:
    """Write JSON Lines atomically (all lines appear, or the old file stays)."""
    path = Path(path)
    payload = "".join(
        json.dumps(entry.to_json(), ensure_ascii=False) + "\n" for entry in entries
    )
    tmp = path.with_name(f".{path.name}.{uuid.uuid4().hex}.tmp")
    tmp.write_text(payload, encoding="utf-8")
    os.replace(tmp, path)


def entry_by_id(entries: Iterable[CorpusEntry], entry_id: str) -> CorpusEntry:
    for entry in entries:
        if entry.id == entry_id:
            return entry
    raise KeyError(entry_id)


def validate_corpus(
    entries: Iterable[CorpusEntry], analyzer: FixtureAnalyzer | None = None
) -> list[str]:
    """Cross-check entries against the analyzer; returns human-readable problems."""
    analyzer = analyzer or FixtureAnalyzer.bundled()
    problems = []
    for entry in entries:
        if entry.source_text not in analyzer.known_texts():
            problems.append(f"{entry.id}: no tokenization fixture for source text")
            continue
        sentence = analyzer.analyze(entry.source_text)
        for issue in reconstruction_problems(sentence):
            problems.append(f"{entry.id}: {issue}")
        head = entry.gold.head_noun
        if head is not None:
            surfaces = [t.surface for t in sentence.tokens]
            if not _appears_as_token_run(surfaces, head):
                problems.append(
                    f"{entry.id}: gold head noun {head!r} is not a token run"
                )
        if entry.has_tag(IN_SCOPE) and head is None:
            problems.append(f"{entry.id}: in-scope entry lacks a gold head noun")
        if entry.gold.preedit is not None:
            for which, sent in zip("ab", entry.gold.preedit):
                if not sent.endswith("。"):
                    problems.append(
                        f"{entry.id}: gold preedit sentence {which} lacks final 。"
                    )
        if entry.gold.preedit_variant is not None:
            if not entry.gold.preedit_variant.endswith("。"):
                problems.append(f"{entry.id}: gold preedit variant lacks final 。")
            if not entry.has_tag("paper-variant"):
                problems.append(
                    f"{entry.id}: variant preedit without the paper-variant tag"
                )
    return problems


def _appears_as_token_run(surfaces: list[str], target: str) -> bool:
    for start in range(len(surfaces)):
        joined = ""
        for surface in surfaces[start:]:
            joined += surface
            if joined == target:
                return True
            if len(joined) >= len(target):
                break
    return False
