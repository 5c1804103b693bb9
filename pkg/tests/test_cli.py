import json
import random
import subprocess
import sys

import pytest

from conftest import plant_corpus
from oats.cli import load_config, main
from oats.errors import OatsError


def _read_jsonl(path):
    return [json.loads(line) for line in path.read_text(encoding="utf-8").splitlines() if line]


class TestConfig:
    def test_load_valid_config(self, pipeline_workspace):
        config_path, _ = pipeline_workspace()
        config = load_config(config_path)
        assert config.corpus_format == "jsonl"
        assert config.qa_backend.kind == "stub"
        assert config.triple_tails == "any_gazetteer"

    def test_missing_referenced_path(self, pipeline_workspace):
        config_path, workspace = pipeline_workspace()
        raw = json.loads(config_path.read_text())
        raw["embeddings"]["path"] = str(workspace / "missing.txt")
        config_path.write_text(json.dumps(raw))
        with pytest.raises(OatsError) as exc:
            load_config(config_path)
        assert "missing.txt" in str(exc.value)

    def test_two_backends_rejected(self, pipeline_workspace):
        config_path, workspace = pipeline_workspace()
        raw = json.loads(config_path.read_text())
        raw["qa_backend"] = {
            "stub": {"rules": str(workspace / "rules.json")},
            "remote": {"url": "http://x"},
        }
        config_path.write_text(json.dumps(raw))
        with pytest.raises(OatsError):
            load_config(config_path)


class TestIdentify:
    def test_writes_verdicts_and_manifest(self, pipeline_workspace):
        config_path, workspace = pipeline_workspace()
        assert main(["identify", "--config", str(config_path)]) == 0
        verdicts = _read_jsonl(workspace / "out" / "verdicts.jsonl")
        assert len(verdicts) == 10 * 2  # docs x factors
        keys = [(v["risk_factor"], v["doc_id"]) for v in verdicts]
        assert keys == sorted(keys)
        for v in verdicts:
            assert list(v) == [
                "doc_id", "risk_factor", "relevant", "min_distance",
                "matched_graph_term", "has_covid_triple",
            ]
        manifest = json.loads((workspace / "out" / "identify_manifest.json").read_text())
        assert manifest["documents"] == 10
        assert manifest["verdicts"] == 20
        assert set(manifest["relevant_fraction"]) == {"hypertension", "diabetes"}
        assert len(manifest["input_sha256"]) == 4

    def test_planted_relevance_is_recovered(self, pipeline_workspace):
        records, truth = plant_corpus(random.Random(11), 20)
        config_path, workspace = pipeline_workspace(records=records)
        assert main(["identify", "--config", str(config_path)]) == 0
        verdicts = _read_jsonl(workspace / "out" / "verdicts.jsonl")
        predicted = {
            factor: {v["doc_id"] for v in verdicts if v["risk_factor"] == factor and v["relevant"]}
            for factor in ("hypertension", "diabetes")
        }
        assert predicted == truth

    def test_empty_corpus_ok(self, pipeline_workspace):
        config_path, workspace = pipeline_workspace(records=[])
        assert main(["identify", "--config", str(config_path)]) == 0
        assert (workspace / "out" / "verdicts.jsonl").read_text() == ""

    def test_missing_embeddings_nonzero_exit(self, pipeline_workspace, capsys):
        config_path, workspace = pipeline_workspace()
        (workspace / "embeddings.txt").unlink()
        code = main(["identify", "--config", str(config_path)])
        assert code != 0
        assert "embeddings.txt" in capsys.readouterr().err

    def test_jobs_flag_output_identical(self, pipeline_workspace):
        config_path, workspace = pipeline_workspace()
        assert main(["identify", "--config", str(config_path), "--jobs", "1"]) == 0
        first = (workspace / "out" / "verdicts.jsonl").read_bytes()
        assert main(["identify", "--config", str(config_path), "--jobs", "4"]) == 0
        assert (workspace / "out" / "verdicts.jsonl").read_bytes() == first


class TestSummarize:
    def test_summaries_written_for_all_docs(self, pipeline_workspace):
        config_path, workspace = pipeline_workspace()
        assert main(["summarize", "--config", str(config_path)]) == 0
        summaries = _read_jsonl(workspace / "out" / "summaries.jsonl")
        assert len(summaries) == 10
        assert [s["doc_id"] for s in summaries] == sorted(s["doc_id"] for s in summaries)
        for s in summaries:
            for item in s["items"]:
                assert item["sentence"] in s["rendered"].replace("**", "")

    def test_filter_restricts_to_relevant(self, pipeline_workspace):
        records, truth = plant_corpus(random.Random(13), 15)
        config_path, workspace = pipeline_workspace(records=records)
        assert main(["identify", "--config", str(config_path)]) == 0
        assert main([
            "summarize", "--config", str(config_path),
            "--filter", str(workspace / "out" / "verdicts.jsonl"),
        ]) == 0
        summaries = _read_jsonl(workspace / "out" / "summaries.jsonl")
        relevant = truth["hypertension"] | truth["diabetes"]
        assert {s["doc_id"] for s in summaries} == relevant

    def test_filter_excluding_all_docs_is_ok(self, pipeline_workspace):
        config_path, workspace = pipeline_workspace()
        empty_filter = workspace / "none.jsonl"
        empty_filter.write_text("", encoding="utf-8")
        assert main([
            "summarize", "--config", str(config_path), "--filter", str(empty_filter)
        ]) == 0
        assert (workspace / "out" / "summaries.jsonl").read_text() == ""

    def test_unreachable_remote_backend_nonzero(self, pipeline_workspace):
        config_path, _ = pipeline_workspace(
            backend={"remote": {"url": "http://127.0.0.1:9", "timeout_s": 0.2}}
        )
        assert main(["summarize", "--config", str(config_path)]) == 1

    def test_stub_runs_are_deterministic(self, pipeline_workspace):
        config_path, workspace = pipeline_workspace()
        assert main(["summarize", "--config", str(config_path)]) == 0
        first = (workspace / "out" / "summaries.jsonl").read_bytes()
        assert main(["summarize", "--config", str(config_path)]) == 0
        assert (workspace / "out" / "summaries.jsonl").read_bytes() == first


class TestEval:
    def test_pr_report_from_planted_run(self, pipeline_workspace, capsys):
        records, truth = plant_corpus(random.Random(17), 12)
        config_path, workspace = pipeline_workspace(records=records)
        assert main(["identify", "--config", str(config_path)]) == 0
        gold_path = workspace / "gold.json"
        gold_path.write_text(
            json.dumps({k: sorted(v) for k, v in truth.items()}), encoding="utf-8"
        )
        report_path = workspace / "report.json"
        assert main([
            "eval",
            "--pred", str(workspace / "out" / "verdicts.jsonl"),
            "--gold", str(gold_path),
            "--out", str(report_path),
        ]) == 0
        report = json.loads(report_path.read_text())
        for entry in report["per_factor"]:
            assert entry["precision"] == 1.0
            assert entry["recall"] == 1.0

    def test_fixture_counts_match_expected_pr(self, tmp_path, capsys):
        # tp=13, fp=1, fn=2 -> P ~= 0.9286, R ~= 0.8667
        verdicts = []
        for i in range(13):
            verdicts.append({"doc_id": f"hit{i}", "risk_factor": "hypertension", "relevant": True})
        verdicts.append({"doc_id": "spurious", "risk_factor": "hypertension", "relevant": True})
        pred = tmp_path / "pred.jsonl"
        pred.write_text("\n".join(json.dumps(v) for v in verdicts) + "\n", encoding="utf-8")
        gold = tmp_path / "gold.json"
        gold.write_text(
            json.dumps({"hypertension": [f"hit{i}" for i in range(13)] + ["miss1", "miss2"]}),
            encoding="utf-8",
        )
        assert main(["eval", "--pred", str(pred), "--gold", str(gold)]) == 0
        report = json.loads(capsys.readouterr().out)
        entry = report["per_factor"][0]
        assert entry["precision"] == pytest.approx(0.9286, abs=1e-4)
        assert entry["recall"] == pytest.approx(0.8667, abs=1e-4)

    def test_empty_gold_recall_undefined(self, tmp_path, capsys):
        pred = tmp_path / "pred.jsonl"
        pred.write_text(
            json.dumps({"doc_id": "a", "risk_factor": "obesity", "relevant": True}) + "\n",
            encoding="utf-8",
        )
        gold = tmp_path / "gold.json"
        gold.write_text(json.dumps({"obesity": []}), encoding="utf-8")
        assert main(["eval", "--pred", str(pred), "--gold", str(gold)]) == 0
        report = json.loads(capsys.readouterr().out)
        assert report["per_factor"][0]["recall"] is None

    def test_rubric_report(self, tmp_path, capsys):
        rubric = tmp_path / "rubric.csv"
        rubric.write_text(
            "doc_id,question_id,rater1,rater2,consensus,summary_score\n"
            "d1,q1,1,1,,1\n"
            "d2,q1,0,1,0,0\n",
            encoding="utf-8",
        )
        assert main(["eval", "--rubric", str(rubric)]) == 0
        report = json.loads(capsys.readouterr().out)
        assert report["per_question"] == [{"question_id": "q1", "accuracy": 0.5}]
        assert report["agreement_rate"] == 0.5

    def test_eval_without_inputs_errors(self, capsys):
        assert main(["eval"]) == 2
        assert "oats:" in capsys.readouterr().err


class TestStubServe:
    def test_port_in_use_exits_nonzero(self, pipeline_workspace, capsys):
        import socket

        config_path, workspace = pipeline_workspace()
        with socket.socket() as blocker:
            blocker.bind(("127.0.0.1", 0))
            blocker.listen(1)
            port = blocker.getsockname()[1]
            code = main([
                "stub-serve", "--rules", str(workspace / "rules.json"), "--port", str(port)
            ])
            assert code != 0
            assert str(port) in capsys.readouterr().err


class TestSubprocessEntryPoint:
    def test_module_invocation(self, pipeline_workspace):
        config_path, workspace = pipeline_workspace()
        proc = subprocess.run(
            [sys.executable, "-m", "oats", "identify", "--config", str(config_path)],
            capture_output=True,
            text=True,
            timeout=60,
        )
        assert proc.returncode == 0, proc.stderr
        assert (workspace / "out" / "verdicts.jsonl").exists()
