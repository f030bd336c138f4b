from __future__ import annotations

import json

import pytest
from click.testing import CliRunner

from factories import make_corpus
from mathvr.cli import main

PLOT = "import matplotlib.pyplot as plt\nplt.plot([0, 1], [0, 1])"


@pytest.fixture(scope="module")
def corpus_root(tmp_path_factory):
    root = tmp_path_factory.mktemp("cli") / "corpus"
    make_corpus(root, n_text=2, n_multimodal=2)
    return root


@pytest.fixture(scope="module")
def model_playback(corpus_root, tmp_path_factory):
    path = tmp_path_factory.mktemp("playback") / "model.json"
    scripts = {}
    for i in range(4):
        sid = f"q{i:04d}-en"
        scripts[sid] = [
            f"Sketch it first.\n```python\n{PLOT}\n```",
            f"The segments cross once.\nAnswer: {i}",
        ]
    path.write_text(json.dumps({"scripts": scripts, "model_id": "demo-playback"}))
    return path


@pytest.fixture(scope="module")
def judge_playback(tmp_path_factory):
    path = tmp_path_factory.mktemp("playback") / "judge.json"
    meta = {}
    grade = {}
    for i in range(4):
        sid = f"q{i:04d}-en"
        meta[sid] = {
            "id": sid,
            "scoring_points": {"p1": "set up the figure", "p2": "finish the computation"},
            "scores": {"s1": 1, "s2": 3},
            "total_answer": 1,
            "answer_summary": {"1": str(i)},
            "max_score": 4,
        }
        if i % 2 == 0:  # evens fully correct, odds hit only p1
            grade[sid] = {"id": sid, "is_fully_correct": True, "awarded_points": ["all"], "final_score": 4}
        else:
            grade[sid] = {"id": sid, "is_fully_correct": False, "awarded_points": ["p1"], "final_score": 1}
    path.write_text(json.dumps({"meta": meta, "grade": grade}))
    return path


def invoke(*args: str) -> "click.testing.Result":
    runner = CliRunner()
    return runner.invoke(main, [str(a) for a in args], catch_exceptions=False)


class TestValidate:
    def test_valid_corpus_exits_zero(self, corpus_root):
        result = invoke("validate", "--corpus-root", corpus_root)
        assert result.exit_code == 0
        assert "4 samples" in result.output

    def test_broken_corpus_exits_nonzero_with_machine_readable_error(self, tmp_path):
        root = tmp_path / "broken"
        make_corpus(root, n_text=1, n_multimodal=1)
        next(root.glob("q0001-en/s0.png")).unlink()
        result = CliRunner().invoke(main, ["validate", "--corpus-root", str(root)])
        assert result.exit_code == 1
        error = json.loads(result.stderr)
        assert error["error"]["type"] == "MissingAsset"


class TestPipeline:
    def test_run_grade_report_end_to_end(self, corpus_root, model_playback, judge_playback, tmp_path):
        out = tmp_path / "out"
        result = invoke(
            "run", "--corpus-root", corpus_root, "--out", out,
            "--model-playback", model_playback, "--seed", "11", "--run-id", "e2e",
        )
        assert result.exit_code == 0, result.output
        traces_path = out / "traces" / "e2e.jsonl"
        lines = [json.loads(x) for x in traces_path.read_text().splitlines()]
        assert len(lines) == 4
        assert all(not t["truncated"] for t in lines)
        assert all(t["token_usage"]["figures"] == 1 for t in lines)

        result = invoke(
            "grade", "--corpus-root", corpus_root, "--out", out, "--run-id", "e2e",
            "--judge-playback", judge_playback,
        )
        assert result.exit_code == 0, result.output
        score_lines = [json.loads(x) for x in (out / "scores" / "e2e.jsonl").read_text().splitlines()]
        header, rows = score_lines[0], score_lines[1:]
        assert header["ungradeable"] == 0
        by_id = {r["sample_id"]: r for r in rows}
        assert by_id["q0000-en"] == {"sample_id": "q0000-en", "ac": 1, "ps": 100.0}
        # odds: alpha * (1/4) * 100 = 17.5
        assert by_id["q0001-en"] == {"sample_id": "q0001-en", "ac": 0, "ps": 17.5}

        result = invoke("report", "--corpus-root", corpus_root, "--out", out, "--run-id", "e2e")
        assert result.exit_code == 0, result.output
        report = json.loads((out / "reports" / "e2e" / "report.json").read_text())
        assert report["model_id"] == "demo-playback"
        assert report["overall"]["n"] == 4
        # brute-force recomputation of the aggregation from the score rows
        ps_values = [r["ps"] for r in rows]
        ac_values = [r["ac"] for r in rows]
        assert report["overall"]["ps_mean"] == pytest.approx(sum(ps_values) / 4, abs=1e-9)
        assert report["overall"]["ac_rate_percent"] == pytest.approx(100 * sum(ac_values) / 4, abs=1e-9)
        n_text = report["per_subset"]["text"]["n"]
        n_mm = report["per_subset"]["multimodal"]["n"]
        weighted = (
            report["per_subset"]["text"]["ps_mean"] * n_text
            + report["per_subset"]["multimodal"]["ps_mean"] * n_mm
        ) / (n_text + n_mm)
        assert report["overall"]["ps_mean"] == pytest.approx(weighted, abs=1e-9)
        assert (out / "reports" / "e2e" / "report.md").read_text().startswith("# Benchmark report")

    def test_pipeline_is_bit_reproducible_for_fixed_seed(
        self, corpus_root, model_playback, judge_playback, tmp_path
    ):
        outputs = []
        for name in ("a", "b"):
            out = tmp_path / name
            invoke(
                "run", "--corpus-root", corpus_root, "--out", out,
                "--model-playback", model_playback, "--seed", "5", "--run-id", "répro",
            )
            invoke(
                "grade", "--corpus-root", corpus_root, "--out", out, "--run-id", "répro",
                "--judge-playback", judge_playback,
            )
            invoke("report", "--corpus-root", corpus_root, "--out", out, "--run-id", "répro")
            outputs.append(
                (
                    (out / "traces" / "répro.jsonl").read_bytes(),
                    (out / "scores" / "répro.jsonl").read_bytes(),
                    (out / "reports" / "répro" / "report.json").read_bytes(),
                )
            )
        assert outputs[0] == outputs[1]

    def test_subset_and_language_filters(self, corpus_root, model_playback, tmp_path):
        out = tmp_path / "filtered"
        result = invoke(
            "run", "--corpus-root", corpus_root, "--out", out, "--subset", "text",
            "--model-playback", model_playback, "--run-id", "textonly",
        )
        assert result.exit_code == 0
        lines = (out / "traces" / "textonly.jsonl").read_text().splitlines()
        assert len(lines) == 2

    def test_relative_out_dir_works(self, corpus_root, model_playback, tmp_path, monkeypatch):
        monkeypatch.chdir(tmp_path)
        result = invoke(
            "run", "--corpus-root", corpus_root, "--out", "rel-out",
            "--model-playback", model_playback, "--run-id", "relrun",
        )
        assert result.exit_code == 0, result.output
        lines = [json.loads(x) for x in (tmp_path / "rel-out" / "traces" / "relrun.jsonl")
                 .read_text().splitlines()]
        assert len(lines) == 4
        figure = next(s for t in lines for s in t["segments"] if s["kind"] == "figure")
        assert not figure["payload"].startswith("/")  # still corpus-relative

    def test_replay_on_fresh_traces_all_match(self, corpus_root, model_playback, tmp_path):
        out = tmp_path / "rep"
        invoke(
            "run", "--corpus-root", corpus_root, "--out", out,
            "--model-playback", model_playback, "--run-id", "fresh",
        )
        result = invoke("replay", "--out", out, "--run-id", "fresh")
        assert result.exit_code == 0, result.output
        body = json.loads(result.output)
        assert body["mismatched"] == 0 and body["traces"] == 4

    def test_run_without_model_config_is_config_error(self, corpus_root, tmp_path, monkeypatch):
        monkeypatch.delenv("MATHVR_MODEL_URL", raising=False)
        result = CliRunner().invoke(
            main, ["run", "--corpus-root", str(corpus_root), "--out", str(tmp_path / "x")]
        )
        assert result.exit_code == 2
        assert json.loads(result.stderr)["error"]["type"] == "ConfigError"


class TestAgree:
    def test_binary_raters_get_all_four_statistics(self, tmp_path):
        a = tmp_path / "a.csv"
        b = tmp_path / "b.csv"
        rows_a = [("id", "score")] + [(f"q{i}", str(i % 2)) for i in range(40)]
        rows_b = [("id", "score")] + [(f"q{i}", str((i % 2) if i % 5 else 1 - i % 2)) for i in range(40)]
        a.write_text("\n".join(",".join(r) for r in rows_a))
        b.write_text("\n".join(",".join(r) for r in rows_b))
        result = invoke("agree", a, b)
        assert result.exit_code == 0
        stats = json.loads(result.output)
        assert set(stats) == {"kappa", "mcc", "pearson", "spearman", "n"}
        assert stats["n"] == 40
        assert -1.0 <= stats["kappa"] <= 1.0

    def test_continuous_raters_skip_binary_kernels(self, tmp_path):
        a = tmp_path / "a.csv"
        b = tmp_path / "b.csv"
        a.write_text("\n".join(f"q{i},{i * 1.5}" for i in range(10)))
        b.write_text("\n".join(f"q{i},{i * 2.0 + 1}" for i in range(10)))
        result = invoke("agree", a, b)
        stats = json.loads(result.output)
        assert stats["kappa"] is None
        assert stats["pearson"] == pytest.approx(1.0)


class TestFidelityCommand:
    def test_tournament_from_items_manifest(self, tmp_path):
        from factories import write_png

        write_png(tmp_path / "orig.png", 16, 16)
        items = tmp_path / "items.jsonl"
        items.write_text(
            json.dumps(
                {
                    "item_id": "i1",
                    "original_image": "orig.png",
                    "candidates": {"good": PLOT, "broken": "nope("},
                }
            )
            + "\n"
        )
        judge = tmp_path / "judge.json"
        judge.write_text(json.dumps({"choices": [{"choice": "A"}]}))
        result = invoke("fidelity", "--items", items, "--out", tmp_path / "fid",
                        "--judge-playback", judge, "--seed", "1")
        assert result.exit_code == 0, result.output
        report = json.loads((tmp_path / "fid" / "fidelity.json").read_text())
        assert report["per_converter"]["good"]["preferred_count"] == 1  # defaulted single survivor
        assert report["per_converter"]["broken"]["exec_success"] == 0.0


class TestIngest:
    def test_ingest_writes_manifest_and_rejections(self, tmp_path):
        raw = tmp_path / "raw.jsonl"
        records = [
            {
                "id": "r1",
                "language": "en",
                "question_text": "What is the area?",
                "solution_text": "Draw and compute.",
                "solution_images": [{"id": "s1", "path": "r1/s1.png", "width": 30, "height": 30}],
            },
            {
                "id": "r2",
                "language": "en",
                "question_text": "Textual only.",
                "solution_text": "No figure at all.",
            },
        ]
        raw.write_text("\n".join(json.dumps(r) for r in records))
        playback = tmp_path / "curation.json"
        playback.write_text(
            json.dumps(
                {
                    "curation": [
                        {"labels": {"s1": "mathematical"}},  # r1 stage 1
                        {
                            "question_md": "What is the area?",
                            "solution_md": "Draw it. ![fig](r1/s1.png)",
                            "qtype": {"parts": "single", "answer": "answer_based"},
                        },
                        {"verdict": "ok"},
                        {"labels": {}},  # r2 stage 1: nothing mathematical
                    ]
                }
            )
        )
        from factories import write_png

        write_png(tmp_path / "corpus" / "r1" / "s1.png", 30, 30)
        result = invoke("ingest", "--raw", raw, "--corpus-root", tmp_path / "corpus",
                        "--judge-playback", playback)
        assert result.exit_code == 0, result.output
        assert "ingested 1 samples, rejected 1" in result.output
        manifest_lines = (tmp_path / "corpus" / "manifest.jsonl").read_text().splitlines()
        assert len(manifest_lines) == 2  # header + r1
        rejected = json.loads((tmp_path / "corpus" / "rejected.jsonl").read_text())
        assert rejected == {"id": "r2", "reason": "text_only_solution",
                            "detail": "solution has no images at all"}
        # the ingested corpus validates end to end
        assert invoke("validate", "--corpus-root", tmp_path / "corpus").exit_code == 0
