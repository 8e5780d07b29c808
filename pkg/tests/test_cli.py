import json
from pathlib import Path

import pytest
from click.testing import CliRunner

from oqfs.cli import main


@pytest.fixture(scope="module")
def workspace(tmp_path_factory):
    """Synth data taken through every CLI stage once."""
    root = tmp_path_factory.mktemp("cli")
    runner = CliRunner()

    def run(*args):
        result = runner.invoke(main, list(args), catch_exceptions=False)
        assert result.exit_code == 0, result.output
        return result.output

    run(
        "synth", "--out-dir", str(root), "--queries", "3", "--passages", "80",
        "--rel-per-query", "8", "--seed", "42",
    )
    run(
        "chunk", "--in", str(root / "docs.jsonl"), "--out", str(root / "passages.jsonl"),
        "--max-words", "100",
    )
    return root, run


class TestStages:
    def test_synth_and_chunk(self, workspace):
        root, _ = workspace
        docs = (root / "docs.jsonl").read_text().splitlines()
        passages = (root / "passages.jsonl").read_text().splitlines()
        assert len(docs) == 80
        assert len(passages) == 80  # synth docs are single-passage sized
        record = json.loads(passages[0])
        assert set(record) == {"passage_id", "parent_doc_id", "ordinal", "text"}

    def test_index_and_retrieve(self, workspace):
        root, run = workspace
        out = run(
            "index", "--passages", str(root / "passages.jsonl"),
            "--out", str(root / "bm25.oqfsidx"),
        )
        assert "indexed 80 passages" in out
        run(
            "retrieve", "--method", "bm25",
            "--collection", str(root / "passages.jsonl"),
            "--queries", str(root / "clusters.jsonl"),
            "--k", "8", "--index", str(root / "bm25.oqfsidx"),
            "--out", str(root / "results.jsonl"),
        )
        results = [
            json.loads(line)
            for line in (root / "results.jsonl").read_text().splitlines()
        ]
        assert len(results) == 3
        assert all(len(r["ranking"]) == 8 for r in results)

    def test_judgments_and_eval_table(self, workspace):
        root, run = workspace
        run(
            "judgments", "--passages", str(root / "passages.jsonl"),
            "--clusters", str(root / "clusters.jsonl"),
            "--out", str(root / "judgments.jsonl"),
        )
        out = run(
            "retrieval-eval", "--results", str(root / "results.jsonl"),
            "--judgments", str(root / "judgments.jsonl"), "--k", "4,8",
        )
        assert "top-4" in out and "top-8" in out
        assert "100.0" in out

    def test_requests_generate_score(self, workspace):
        root, run = workspace
        run(
            "requests", "--results", str(root / "results.jsonl"),
            "--passages", str(root / "passages.jsonl"),
            "--clusters", str(root / "clusters.jsonl"),
            "--k", "8", "--out", str(root / "requests.jsonl"),
        )
        run(
            "generate", "--method", "extractive",
            "--requests", str(root / "requests.jsonl"),
            "--out", str(root / "summaries.jsonl"),
        )
        out = run(
            "score", "--candidates", str(root / "summaries.jsonl"),
            "--clusters", str(root / "clusters.jsonl"),
            "--out", str(root / "report"),
        )
        assert "MACRO_AVG" in out
        report_lines = (root / "report.jsonl").read_text().splitlines()
        assert len(report_lines) == 4  # 3 queries + footer
        footer = json.loads(report_lines[-1])
        assert footer["query_id"] == "MACRO_AVG"
        assert footer["r1_f1"] > 0.2

    def test_dense_retrieve_with_store(self, workspace):
        root, run = workspace
        run(
            "embed", "--passages", str(root / "passages.jsonl"),
            "--provider", "bag", "--dim", "256",
            "--out", str(root / "store.oqfsemb"),
        )
        run(
            "retrieve", "--method", "dense",
            "--collection", str(root / "passages.jsonl"),
            "--queries", str(root / "clusters.jsonl"),
            "--k", "5", "--store", str(root / "store.oqfsemb"),
            "--provider", "bag", "--dim", "256",
            "--out", str(root / "results_dense.jsonl"),
        )
        results = (root / "results_dense.jsonl").read_text().splitlines()
        assert len(results) == 3

    def test_mix_and_split(self, workspace, tmp_path):
        root, run = workspace
        out = run(
            "mix", "--in",
            f"{root / 'passages.jsonl'},{root / 'passages.jsonl'}",
            "--names", "A,B", "--out", str(tmp_path / "mixed.jsonl"),
        )
        assert "wrote 160 passages" in out
        first = json.loads((tmp_path / "mixed.jsonl").read_text().splitlines()[0])
        assert first["passage_id"].startswith("A/")
        out = run(
            "split", "--clusters", str(root / "clusters.jsonl"),
            "--fraction", "0.34", "--seed", "1",
            "--out-train", str(tmp_path / "train.jsonl"),
            "--out-val", str(tmp_path / "val.jsonl"),
        )
        assert "2 train / 1 val" in out

    def test_sweep_and_pipeline(self, workspace, tmp_path):
        root, run = workspace
        out = run(
            "sweep-k", "--passages", str(root / "passages.jsonl"),
            "--clusters", str(root / "clusters.jsonl"),
            "--ks", "2,4,8", "--out-dir", str(tmp_path / "sweep"),
        )
        assert "prec@k" in out
        assert (tmp_path / "sweep" / "sweep.csv").exists()
        assert (tmp_path / "sweep" / "sweep.svg").exists()
        out = run(
            "pipeline", "--passages", str(root / "passages.jsonl"),
            "--clusters", str(root / "clusters.jsonl"),
            "--out-dir", str(tmp_path / "pipe"),
        )
        assert "BM25+EXTRACTIVE" in out

    def test_ingest_validates(self, workspace, tmp_path):
        root, run = workspace
        out = run(
            "ingest", "--docs", str(root / "docs.jsonl"),
            "--clusters", str(root / "clusters.jsonl"),
            "--out-dir", str(tmp_path / "ingested"),
        )
        assert "ingested 80 docs, 3 clusters" in out
        assert (tmp_path / "ingested" / "docs.jsonl").exists()

    def test_config_file_feeds_defaults(self, workspace, tmp_path):
        root, run = workspace
        cfg = tmp_path / "run.cfg"
        cfg.write_text(
            f"passages = {root / 'passages.jsonl'}\n"
            f"clusters = {root / 'clusters.jsonl'}\n"
            f"out_dir = {tmp_path / 'cfg_run'}\n"
            "k = 4\n"
        )
        out = run("pipeline", "--config", str(cfg))
        assert "BM25+EXTRACTIVE" in out
        manifest = json.loads((tmp_path / "cfg_run" / "manifest.json").read_text())
        assert manifest["config"]["k"] == 4
