"""Command-line interface.

Exit codes: 0 success, 2 usage or data error, 3 sentence out of scope.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from . import clause, corpus, evalkit, llm_client, morphology, prompts
from .preedit import NotInScope, preedit as split_sentence

EXIT_OK = 0
EXIT_ERROR = 2
EXIT_OUT_OF_SCOPE = 3


class CliError(Exception):
    def __init__(self, message: str, code: int = EXIT_ERROR):
        super().__init__(message)
        self.code = code


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rentai",
        description=(
            "Detect attributive clauses whose head noun is the clause's "
            "missing subject, split such sentences in two, and drive "
            "translation prompts off the result."
        ),
    )
    parser.add_argument(
        "--corpus", metavar="PATH", help="corpus file (bundled corpus by default)"
    )
    parser.add_argument("--json", action="store_true", help="machine-readable output")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_sentence_args(p):
        group = p.add_mutually_exclusive_group(required=True)
        group.add_argument("text", nargs="?", help="sentence to process")
        group.add_argument("--id", help="corpus entry id")

    p = sub.add_parser("analyze", help="tokenize, chunk, and check scope")
    add_sentence_args(p)

    p = sub.add_parser("preedit", help="split a sentence in two")
    add_sentence_args(p)

    p = sub.add_parser("prompt", help="render a prompt template")
    p.add_argument(
        "--step",
        required=True,
        choices=[s.value for s in prompts.PromptStep],
    )
    p.add_argument("payload", help="text substituted into the template")
    p.add_argument("--language", default="Chinese", help="target language word")

    p = sub.add_parser("translate", help="run a translation strategy")
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("text", nargs="?", help="sentence to translate")
    group.add_argument("--id", help="corpus entry id")
    group.add_argument(
        "--all", action="store_true", help="translate every in-scope corpus entry"
    )
    p.add_argument(
        "--strategy",
        default=prompts.Strategy.LLM_ASSISTED.value,
        choices=[s.value for s in prompts.Strategy],
    )
    p.add_argument("--backend", default="mock", choices=["mock", "http"])
    p.add_argument("--cache-dir", metavar="PATH", help="response cache directory")
    onoff = p.add_mutually_exclusive_group()
    onoff.add_argument("--offline", dest="offline", action="store_true", default=True)
    onoff.add_argument("--online", dest="offline", action="store_false")
    p.add_argument("--model", default="gpt-3.5-turbo", help="backend model id")
    p.add_argument("--language", default="Chinese", help="target language word")

    p = sub.add_parser("annotate", help="score translations against the rubric")
    p.add_argument("--log", required=True, metavar="PATH", help="annotation log")
    p.add_argument("--annotator", default="anonymous")

    p = sub.add_parser("report", help="aggregate an annotation log")
    p.add_argument(
        "--log", metavar="PATH", help="annotation log (bundled scores by default)"
    )
    p.add_argument(
        "--patterns",
        metavar="PATH",
        help="pattern label file, or 'bundled' for the packaged set",
    )
    p.add_argument(
        "--out-dir",
        metavar="DIR",
        help="also write scores.csv, report.json, and chart PNGs here",
    )

    sub.add_parser("corpus-validate", help="cross-check the corpus file")

    return parser


def _load_corpus(args) -> list[corpus.CorpusEntry]:
    return corpus.load_corpus(args.corpus)


def _resolve_sentence(args) -> tuple[str, str]:
    """Returns (sentence_id, text); id is empty for ad-hoc text."""
    if getattr(args, "id", None):
        entries = _load_corpus(args)
        try:
            entry = corpus.entry_by_id(entries, args.id)
        except KeyError:
            raise CliError(f"unknown corpus entry {args.id!r}")
        return entry.id, entry.source_text
    if not (args.text or "").strip():
        raise CliError("empty sentence")
    return "", args.text


_CONDITION_LABELS = (
    ("inner relation", "condition_inner_relation"),
    ("verbal main predicate", "condition_main_predicate_verbal"),
    ("nominative gap", "condition_nominative_gap"),
)


def cmd_analyze(args) -> int:
    sentence_id, text = _resolve_sentence(args)
    analyzer = morphology.FixtureAnalyzer.bundled()
    sentence = analyzer.analyze(text)
    candidate, decision = clause.scope_check(sentence)

    if args.json:
        obj = decision.to_record(sentence_id)
        obj["tokens"] = [
            {"surface": t.surface, "lemma": t.lemma, "pos": t.pos.value}
            for t in sentence.tokens
        ]
        obj["chunks"] = [c.surface for c in clause.chunk_sentence(sentence)]
        if candidate is not None:
            obj["head_noun"] = candidate.head_noun_surface
            obj["clause"] = candidate.clause_surface(sentence)
            obj["relation"] = candidate.relation.describe()
        print(json.dumps(obj, ensure_ascii=False))
    else:
        print("tokens: " + " | ".join(t.surface for t in sentence.tokens))
        print(
            "chunks: " + " / ".join(c.surface for c in clause.chunk_sentence(sentence))
        )
        if candidate is not None:
            print(f"head noun: {candidate.head_noun_surface}")
            print(f"clause:    {candidate.clause_surface(sentence)}")
            print(f"relation:  {candidate.relation.describe()}")
        for label, attr in _CONDITION_LABELS:
            mark = "yes" if getattr(decision, attr) else "no"
            print(f"{label:<22} {mark}")
        verdict = "in scope" if decision.in_scope else "out of scope"
        reasons = f" ({'; '.join(decision.reasons)})" if decision.reasons else ""
        print(f"=> {verdict}{reasons}")
    return EXIT_OK if decision.in_scope else EXIT_OUT_OF_SCOPE


def cmd_preedit(args) -> int:
    _, text = _resolve_sentence(args)
    analyzer = morphology.FixtureAnalyzer.bundled()
    sentence = analyzer.analyze(text)
    try:
        result = split_sentence(sentence)
    except NotInScope as exc:
        print(f"out of scope: {'; '.join(exc.reasons)}", file=sys.stderr)
        return EXIT_OUT_OF_SCOPE
    if args.json:
        print(json.dumps(result.to_json(), ensure_ascii=False))
    else:
        print(result.sentence_a)
        print(result.sentence_b)
    return EXIT_OK


def cmd_prompt(args) -> int:
    if not args.payload.strip():
        raise CliError("empty payload")
    step = prompts.PromptStep(args.step)
    print(prompts.render(step, args.payload, language=args.language))
    return EXIT_OK


def _make_client(args) -> llm_client.LlmClient:
    config = llm_client.BackendConfig(model_id=args.model, offline=args.offline)
    if args.backend == "mock":
        backend = llm_client.mock_backend(llm_client.load_chat_fixtures())
    else:
        backend = llm_client.HttpBackend(config)
    return llm_client.LlmClient(config, backend=backend, cache_dir=args.cache_dir)


def _translate_one(
    sentence_id: str,
    text: str,
    strategy: prompts.Strategy,
    client: llm_client.LlmClient,
    language: str,
) -> prompts.TranslationRecord:
    analyzer = morphology.FixtureAnalyzer.bundled()
    sentence = analyzer.analyze(text)
    return prompts.run_strategy(
        strategy, sentence, client, sentence_id=sentence_id, language=language
    )


def _print_record(record: prompts.TranslationRecord, as_json: bool) -> None:
    if as_json:
        print(json.dumps(record.to_json(), ensure_ascii=False))
        return
    prefix = f"{record.sentence_id}: " if record.sentence_id else ""
    print(f"{prefix}{record.final_text}")
    for diagnostic in record.diagnostics:
        print(f"  note: {diagnostic}", file=sys.stderr)


def cmd_translate(args) -> int:
    strategy = prompts.Strategy(args.strategy)
    client = _make_client(args)

    if args.all:
        entries = [
            e for e in _load_corpus(args) if e.has_tag(corpus.IN_SCOPE)
        ]
        if not entries:
            raise CliError("no in-scope corpus entries")
        failures = 0
        with ThreadPoolExecutor(max_workers=client.max_parallel) as pool:
            futures = [
                pool.submit(
                    _translate_one,
                    entry.id,
                    entry.source_text,
                    strategy,
                    client,
                    args.language,
                )
                for entry in entries
            ]
            for entry, future in zip(entries, futures):
                try:
                    _print_record(future.result(), args.json)
                except Exception as exc:
                    failures += 1
                    print(f"{entry.id}: error: {exc}", file=sys.stderr)
        return EXIT_ERROR if failures else EXIT_OK

    sentence_id, text = _resolve_sentence(args)
    try:
        record = _translate_one(sentence_id, text, strategy, client, args.language)
    except NotInScope as exc:
        print(f"out of scope: {'; '.join(exc.reasons)}", file=sys.stderr)
        return EXIT_OUT_OF_SCOPE
    _print_record(record, args.json)
    return EXIT_OK


def cmd_annotate(args) -> int:
    entries = _load_corpus(args)
    items = [
        evalkit.AnnotationItem(
            entry_id=entry.id,
            variant=variant,
            source_text=entry.source_text,
            translation=translation,
        )
        for entry in entries
        for variant, translation in sorted(entry.gold.translations.items())
    ]
    if not items:
        raise CliError("corpus has no translations to annotate")
    rubric = evalkit.load_default_rubric()
    recorded = evalkit.annotate_session(
        items, rubric, args.annotator, args.log
    )
    print(f"recorded {len(recorded)} of {len(items)} annotations to {args.log}")
    return EXIT_OK


def cmd_report(args) -> int:
    annotations = evalkit.load_annotations(args.log)
    labels = None
    if args.patterns:
        labels = evalkit.load_pattern_labels(
            None if args.patterns == "bundled" else args.patterns
        )
    report = evalkit.aggregate(annotations, pattern_labels=labels)

    if args.json:
        print(json.dumps(report.to_json(), ensure_ascii=False))
    else:
        print(evalkit.format_report(report))

    if args.out_dir:
        out = Path(args.out_dir)
        out.mkdir(parents=True, exist_ok=True)
        (out / "report.json").write_text(
            json.dumps(report.to_json(), ensure_ascii=False, indent=2) + "\n",
            encoding="utf-8",
        )
        with open(out / "scores.csv", "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["entry_id", "before", "after", "delta"])
            for entry in report.per_entry:
                writer.writerow(
                    [
                        entry.entry_id,
                        evalkit.format_decimal(entry.before),
                        evalkit.format_decimal(entry.after),
                        evalkit.format_decimal(entry.delta),
                    ]
                )
            writer.writerow(
                [
                    "mean",
                    evalkit.format_decimal(report.means[report.before_variant]),
                    evalkit.format_decimal(report.means[report.after_variant]),
                    evalkit.format_decimal(
                        report.means[report.after_variant]
                        - report.means[report.before_variant]
                    ),
                ]
            )
        from . import figures

        written = [out / "report.json", out / "scores.csv"]
        written.append(figures.save_score_figure(report, out / "scores.png"))
        if report.pattern_tally is not None:
            written.append(
                figures.save_pattern_figure(report.pattern_tally, out / "patterns.png")
            )
        for path in written:
            print(f"wrote {path}", file=sys.stderr)
    return EXIT_OK


def cmd_corpus_validate(args) -> int:
    entries = _load_corpus(args)
    problems = corpus.validate_corpus(entries)
    if args.json:
        print(json.dumps({"entries": len(entries), "problems": problems}))
    else:
        for problem in problems:
            print(problem)
        print(f"{len(entries)} entries, {len(problems)} problems")
    return EXIT_OK if not problems else EXIT_ERROR


_COMMANDS = {
    "analyze": cmd_analyze,
    "preedit": cmd_preedit,
    "prompt": cmd_prompt,
    "translate": cmd_translate,
    "annotate": cmd_annotate,
    "report": cmd_report,
    "corpus-validate": cmd_corpus_validate,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except (
        morphology.AnalysisError,
        corpus.SchemaError,
        corpus.DuplicateId,
        evalkit.EmptyVariant,
        evalkit.ScoreOutOfRange,
        llm_client.AuthMissing,
        llm_client.OfflineMiss,
        llm_client.BackendError,
        llm_client.FixtureMiss,
        prompts.EmptyPayload,
        FileNotFoundError,
        ValueError,
    ) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


def entrypoint() -> None:
    raise SystemExit(main())


if __name__ == "__main__":
    entrypoint()
