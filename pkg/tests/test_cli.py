import json

import pytest

from rentai.cli import EXIT_ERROR, EXIT_OK, EXIT_OUT_OF_SCOPE, main

PNG_MAGIC = b"\x89PNG\r\n\x1a\n"


def run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


class TestAnalyze:
    def test_in_scope_by_id(self, capsys):
        code, out, _ = run(capsys, "analyze", "--id", "ex2-16")
        assert code == EXIT_OK
        assert "head noun: 太郎" in out
        assert "in scope" in out

    def test_out_of_scope_by_id(self, capsys):
        code, out, _ = run(capsys, "analyze", "--id", "ex2-13")
        assert code == EXIT_OUT_OF_SCOPE
        assert "out of scope" in out

    def test_direct_text(self, capsys):
        code, out, _ = run(capsys, "analyze", "テレビを壊した太郎は頭を下げた。")
        assert code == EXIT_OK
        assert "太郎" in out

    def test_empty_text_is_an_error(self, capsys):
        code, _, err = run(capsys, "analyze", "")
        assert code == EXIT_ERROR
        assert "error" in err

    def test_unknown_id_is_an_error(self, capsys):
        code, _, err = run(capsys, "analyze", "--id", "nope")
        assert code == EXIT_ERROR
        assert "nope" in err

    def test_unknown_sentence_is_an_error(self, capsys):
        code, _, err = run(capsys, "analyze", "辞書にない文です。")
        assert code == EXIT_ERROR

    def test_json_output(self, capsys):
        code, out, _ = run(capsys, "--json", "analyze", "--id", "ex2-16")
        assert code == EXIT_OK
        obj = json.loads(out)
        assert obj["in_scope"] is True
        assert obj["head_noun"] == "太郎"
        assert obj["condition_nominative_gap"] is True
        assert obj["sentence_id"] == "ex2-16"

    def test_json_output_is_schema_stable(self, capsys):
        _, first, _ = run(capsys, "--json", "analyze", "--id", "ex2-16")
        _, second, _ = run(capsys, "--json", "analyze", "--id", "ex2-16")
        assert first == second


class TestPreedit:
    def test_golden_split(self, capsys, by_id):
        code, out, _ = run(capsys, "preedit", "--id", "app1-5")
        assert code == EXIT_OK
        assert out.splitlines() == list(by_id["app1-5"].gold.preedit)

    def test_out_of_scope(self, capsys):
        code, _, err = run(capsys, "preedit", "--id", "ex2-14")
        assert code == EXIT_OUT_OF_SCOPE
        assert "out of scope" in err

    def test_json_result(self, capsys):
        code, out, _ = run(capsys, "--json", "preedit", "--id", "app1-1")
        assert code == EXIT_OK
        obj = json.loads(out)
        assert set(obj) == {"sentence_a", "sentence_b", "head_noun", "rule_trace"}
        assert obj["head_noun"] == "梶"


class TestPrompt:
    def test_renders_template(self, capsys):
        code, out, _ = run(
            capsys, "prompt", "--step", "direct-translate", "猫が好きだ。"
        )
        assert code == EXIT_OK
        assert out.strip() == "Translate the following sentence into Chinese: 猫が好きだ。"

    def test_language_override(self, capsys):
        code, out, _ = run(
            capsys,
            "prompt", "--step", "direct-translate", "--language", "Korean", "x",
        )
        assert code == EXIT_OK
        assert "Korean" in out

    def test_empty_payload(self, capsys):
        code, _, err = run(capsys, "prompt", "--step", "restructure", " ")
        assert code == EXIT_ERROR


class TestTranslate:
    def test_baseline_matches_reference(self, capsys, by_id):
        code, out, _ = run(
            capsys, "translate", "--id", "app1-5", "--strategy", "baseline"
        )
        assert code == EXIT_OK
        assert out.strip().endswith(by_id["app1-5"].gold.translations["before-prompt"])

    def test_assisted_matches_reference(self, capsys, by_id):
        code, out, _ = run(
            capsys, "translate", "--id", "app1-5", "--strategy", "llm-assisted"
        )
        assert code == EXIT_OK
        assert by_id["app1-5"].gold.translations["after-prompt"] in out

    def test_local_preedit_strategy(self, capsys, by_id):
        code, out, _ = run(
            capsys, "translate", "--id", "app1-1", "--strategy", "local-preedit"
        )
        assert code == EXIT_OK
        assert by_id["app1-1"].gold.translations["after-prompt"] in out

    def test_out_of_scope_entry(self, capsys):
        code, _, err = run(
            capsys, "translate", "--id", "ex2-15", "--strategy", "local-preedit"
        )
        assert code == EXIT_OUT_OF_SCOPE

    def test_all_runs_every_in_scope_entry(self, capsys):
        code, out, _ = run(capsys, "translate", "--all", "--strategy", "llm-assisted")
        assert code == EXIT_OK
        lines = [l for l in out.splitlines() if l.strip()]
        assert len(lines) == 6
        assert all(":" in line for line in lines)

    def test_json_records(self, capsys):
        code, out, _ = run(
            capsys,
            "--json", "translate", "--id", "app1-5", "--strategy", "llm-assisted",
        )
        assert code == EXIT_OK
        obj = json.loads(out)
        assert obj["strategy"] == "llm-assisted"
        assert len(obj["steps"]) == 3

    def test_online_without_key_fails_cleanly(self, capsys, monkeypatch, no_network):
        monkeypatch.delenv("LLM_API_KEY", raising=False)
        code, _, err = run(
            capsys,
            "translate", "--id", "app1-5", "--backend", "http", "--online",
            "--strategy", "baseline",
        )
        assert code == EXIT_ERROR
        assert "LLM_API_KEY" in err

    def test_http_backend_stays_offline_by_default(self, capsys, no_network):
        code, _, err = run(
            capsys,
            "translate", "--id", "app1-5", "--backend", "http",
            "--strategy", "baseline",
        )
        assert code == EXIT_ERROR  # offline miss, not a network attempt

    def test_cache_dir_populated(self, capsys, tmp_path):
        cache = tmp_path / "cache"
        cache.mkdir()
        code, first, _ = run(
            capsys,
            "translate", "--id", "app1-5", "--strategy", "baseline",
            "--cache-dir", str(cache),
        )
        assert code == EXIT_OK
        assert list(cache.iterdir())
        code, second, _ = run(
            capsys,
            "translate", "--id", "app1-5", "--strategy", "baseline",
            "--cache-dir", str(cache),
        )
        assert second == first


class TestReport:
    def test_table_output(self, capsys):
        code, out, _ = run(capsys, "report")
        assert code == EXIT_OK
        assert "3.2" in out
        assert "4.4 (37.5%)" in out

    def test_pattern_table_included(self, capsys):
        code, out, _ = run(capsys, "report", "--patterns", "bundled")
        assert code == EXIT_OK
        assert "87.5%" in out

    def test_out_dir_artifacts(self, capsys, tmp_path):
        out_dir = tmp_path / "artifacts"
        code, _, err = run(
            capsys,
            "report", "--patterns", "bundled", "--out-dir", str(out_dir),
        )
        assert code == EXIT_OK
        assert (out_dir / "report.json").exists()
        assert (out_dir / "scores.csv").read_text().startswith("entry_id,")
        assert (out_dir / "scores.png").read_bytes().startswith(PNG_MAGIC)
        assert (out_dir / "patterns.png").read_bytes().startswith(PNG_MAGIC)
        obj = json.loads((out_dir / "report.json").read_text())
        assert obj["improvement_percent"] == [75, 2]

    def test_empty_log_is_a_data_error(self, capsys, tmp_path):
        empty = tmp_path / "empty.jsonl"
        empty.write_text("", encoding="utf-8")
        code, _, err = run(capsys, "report", "--log", str(empty))
        assert code == EXIT_ERROR

    def test_custom_log(self, capsys, tmp_path):
        log = tmp_path / "log.jsonl"
        rows = [
            {"entry_id": "e", "variant": "before-prompt", "score": 2},
            {"entry_id": "e", "variant": "after-prompt", "score": 4},
        ]
        log.write_text(
            "".join(json.dumps(r) + "\n" for r in rows), encoding="utf-8"
        )
        code, out, _ = run(capsys, "report", "--log", str(log))
        assert code == EXIT_OK
        assert "2.0" in out and "4.0 (100%)" in out


class TestAnnotate:
    def test_scripted_stdin(self, capsys, tmp_path, monkeypatch):
        import io

        monkeypatch.setattr("sys.stdin", io.StringIO("5\n4\n3\n"))
        log = tmp_path / "log.jsonl"
        code, out, _ = run(capsys, "annotate", "--log", str(log), "--annotator", "t")
        assert code == EXIT_OK
        assert "recorded 3 of 10" in out
        assert len(log.read_text().splitlines()) == 3


class TestCorpusValidate:
    def test_bundled_corpus_passes(self, capsys):
        code, out, _ = run(capsys, "corpus-validate")
        assert code == EXIT_OK
        assert "0 problems" in out

    def test_broken_corpus_fails(self, capsys, tmp_path):
        path = tmp_path / "c.jsonl"
        row = {"id": "z", "source_text": "太郎は頭を下げた。", "tags": ["in-scope"]}
        path.write_text(json.dumps(row, ensure_ascii=False) + "\n", encoding="utf-8")
        code, out, _ = run(capsys, "--corpus", str(path), "corpus-validate")
        assert code == EXIT_ERROR
        assert "head noun" in out

    def test_corpus_flag_feeds_other_commands(self, capsys, tmp_path):
        path = tmp_path / "c.jsonl"
        row = {"id": "only", "source_text": "テレビを壊した太郎は頭を下げた。"}
        path.write_text(json.dumps(row, ensure_ascii=False) + "\n", encoding="utf-8")
        code, out, _ = run(capsys, "--corpus", str(path), "analyze", "--id", "only")
        assert code == EXIT_OK
        assert "太郎" in out
