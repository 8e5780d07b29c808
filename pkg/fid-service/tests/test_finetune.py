"""Smoke training: pairs from primary-format files, loadable checkpoints."""

import json

import pytest
import torch
from fastapi.testclient import TestClient

from fid_service.app import create_app
from fid_service.finetune import build_pairs, data_hash, finetune
from fid_service.model import load_checkpoint


@pytest.fixture
def training_files(tmp_path):
    """Two clusters' worth of requests + references in the wire formats."""
    requests_path = tmp_path / "requests.jsonl"
    clusters_path = tmp_path / "clusters.jsonl"
    request_records = []
    cluster_records = []
    for c in range(2):
        request_records.append(
            {
                "query_id": f"c{c}",
                "query": f"which records discuss topic{c}",
                "passages": [
                    {"id": f"c{c}p{i}", "text": f"topic{c} passage {i} body text."}
                    for i in range(3)
                ],
                "max_words": 250,
            }
        )
        cluster_records.append(
            {
                "cluster_id": f"c{c}",
                "query": f"which records discuss topic{c}",
                "member_doc_ids": [f"c{c}d0"],
                "reference_summaries": [f"reference summary about topic{c}."],
            }
        )
    requests_path.write_text(
        "".join(json.dumps(r) + "\n" for r in request_records)
    )
    clusters_path.write_text(
        "".join(json.dumps(r) + "\n" for r in cluster_records)
    )
    return requests_path, clusters_path


class TestBuildPairs:
    def test_pairs_from_primary_formats(self, training_files):
        requests_path, clusters_path = training_files
        pairs = build_pairs(requests_path, clusters_path, k=50)
        assert len(pairs) == 2
        assert pairs[0]["target"] == "reference summary about topic0."
        assert len(pairs[0]["passages"]) == 3

    def test_k_truncates_passages(self, training_files):
        requests_path, clusters_path = training_files
        pairs = build_pairs(requests_path, clusters_path, k=2)
        assert all(len(p["passages"]) == 2 for p in pairs)

    def test_missing_references_skipped(self, training_files, tmp_path):
        requests_path, _ = training_files
        empty_clusters = tmp_path / "none.jsonl"
        empty_clusters.write_text("")
        assert build_pairs(requests_path, empty_clusters, k=5) == []


class TestFinetune:
    def test_smoke_two_clusters_one_epoch(self, training_files, tmp_path):
        requests_path, clusters_path = training_files
        pairs = build_pairs(requests_path, clusters_path, k=50)
        out = finetune(pairs, tmp_path / "ckpt", epochs=1, seed=0)
        generator = load_checkpoint(out)
        text = generator.generate("which records discuss topic0", ["a passage."], 20)
        assert isinstance(text, str)
        manifest = json.loads((out / "manifest.json").read_text())
        assert manifest["hyperparams"]["lr"] == 1e-4
        assert manifest["hyperparams"]["batch_size"] == 1
        assert manifest["n_pairs"] == 2
        assert manifest["data_sha256"] == data_hash(pairs)

    def test_manifest_deterministic(self, training_files, tmp_path):
        requests_path, clusters_path = training_files
        pairs = build_pairs(requests_path, clusters_path, k=50)
        a = finetune(pairs, tmp_path / "a", epochs=1, seed=5)
        b = finetune(pairs, tmp_path / "b", epochs=1, seed=5)
        assert (a / "manifest.json").read_bytes() == (b / "manifest.json").read_bytes()

    def test_empty_training_set_rejected(self, tmp_path):
        with pytest.raises(ValueError, match="empty"):
            finetune([], tmp_path / "ckpt", epochs=1)

    def test_epoch_cap(self, training_files, tmp_path):
        requests_path, clusters_path = training_files
        pairs = build_pairs(requests_path, clusters_path, k=50)
        with pytest.raises(ValueError, match="30"):
            finetune(pairs, tmp_path / "ckpt", epochs=31)

    def test_training_reduces_loss(self, training_files, tmp_path):
        requests_path, clusters_path = training_files
        pairs = build_pairs(requests_path, clusters_path, k=50)[:1]
        out = finetune(pairs, tmp_path / "overfit", epochs=12, seed=1)
        generator = load_checkpoint(out)
        with torch.no_grad():
            trained = float(
                generator.loss(
                    pairs[0]["query"], pairs[0]["passages"], pairs[0]["target"]
                )
            )
        torch.manual_seed(1)
        from fid_service.model import FidGenerator, tiny_config
        from transformers import T5ForConditionalGeneration

        fresh = FidGenerator(T5ForConditionalGeneration(tiny_config()))
        with torch.no_grad():
            untrained = float(
                fresh.loss(pairs[0]["query"], pairs[0]["passages"], pairs[0]["target"])
            )
        assert trained < untrained

    def test_overfit_decodes_learned_target(self, tmp_path):
        # enough steps to memorize one target end to end (~40 s)
        pair = {
            "query_id": "c0",
            "query": "which records discuss solar",
            "passages": ["solar passage one body.", "solar passage two body."],
            "target": "solar output rose sharply.",
        }
        pairs = [dict(pair, query_id=f"c{i}") for i in range(20)]
        out = finetune(pairs, tmp_path / "overfit2", epochs=30, seed=3, lr=3e-4)
        generator = load_checkpoint(out)
        text = generator.generate(pair["query"], pair["passages"], 20)
        assert text == pair["target"]

    def test_checkpoint_serves(self, training_files, tmp_path):
        requests_path, clusters_path = training_files
        pairs = build_pairs(requests_path, clusters_path, k=50)
        out = finetune(pairs, tmp_path / "ckpt", epochs=1, seed=0)
        generator = load_checkpoint(out)
        client = TestClient(create_app(generator=generator, model_name="trained"))
        resp = client.post(
            "/generate",
            json={
                "query": "which records discuss topic0",
                "passages": [{"id": "p", "text": "topic0 passage body."}],
                "max_words": 15,
            },
        )
        assert resp.status_code == 200
        assert resp.json()["model"] == "trained"
        assert len(resp.json()["summary"].split()) <= 15
