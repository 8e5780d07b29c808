"""Fused-input construction and model-mode service behavior."""

import pytest
import torch
from fastapi.testclient import TestClient
from transformers import T5ForConditionalGeneration

from fid_service.app import create_app
from fid_service.model import (
    ByteTokenizer,
    FidGenerator,
    load_checkpoint,
    save_checkpoint,
    tiny_config,
)


@pytest.fixture(scope="module")
def generator():
    torch.manual_seed(0)
    model = T5ForConditionalGeneration(tiny_config())
    return FidGenerator(model, max_input_tokens=128)


class TestByteTokenizer:
    def test_roundtrip(self):
        tok = ByteTokenizer()
        text = "Some text, with punctuation & unicode: café."
        assert tok.decode(tok.encode(text, 256)) == text

    def test_truncation(self):
        tok = ByteTokenizer()
        ids = tok.encode("abcdef", max_length=4)
        assert len(ids) == 4  # 3 bytes + eos
        assert ids[-1] == tok.eos_id

    def test_batch_padding(self):
        tok = ByteTokenizer()
        ids, mask = tok.batch(["ab", "abcd"], 16)
        assert ids.shape == mask.shape == (2, 5)
        assert mask.sum(dim=1).tolist() == [3, 5]


class TestFidInput:
    def test_one_input_per_passage_in_order(self, generator):
        passages = [f"passage number {i}" for i in range(7)]
        fid_input = generator.build_input("the query", passages)
        assert fid_input.n_encoder_inputs == 7
        for i, text in enumerate(fid_input.encoder_texts):
            assert text == f"question: the query context: passage number {i}"

    def test_k2_vs_k1_structural(self, generator):
        one = generator.build_input("q", ["relevant passage"])
        two = generator.build_input("q", ["relevant passage", "irrelevant filler"])
        assert one.n_encoder_inputs == 1
        assert two.n_encoder_inputs == 2

    def test_empty_passages_rejected(self, generator):
        with pytest.raises(ValueError):
            generator.build_input("q", [])

    def test_template_override(self):
        torch.manual_seed(0)
        model = T5ForConditionalGeneration(tiny_config())
        custom = FidGenerator(model, template="Q={q} P={p}", max_input_tokens=64)
        fid_input = custom.build_input("a", ["b"])
        assert fid_input.encoder_texts == ("Q=a P=b",)


class TestGeneration:
    def test_respects_word_cap(self, generator):
        text = generator.generate("query", ["some passage content"], max_words=5)
        assert len(text.split()) <= 5

    def test_deterministic(self, generator):
        args = ("q", ["p one", "p two"], 20)
        assert generator.generate(*args) == generator.generate(*args)

    def test_loss_is_finite_and_backpropagates(self, generator):
        loss = generator.loss("q", ["passage one", "passage two"], "target words")
        assert torch.isfinite(loss)
        loss.backward()
        generator.model.zero_grad()


class TestModelModeService:
    def test_serves_and_counts_encoder_inputs(self, generator):
        app = create_app(generator=generator, model_name="test-model")
        client = TestClient(app)
        passages = [{"id": f"p{i}", "text": f"passage {i} text"} for i in range(50)]
        resp = client.post(
            "/generate",
            json={"query": "the question", "passages": passages, "max_words": 30},
        )
        assert resp.status_code == 200
        body = resp.json()
        assert body["model"] == "test-model"
        assert len(body["summary"].split()) <= 30
        assert app.state.last_encoder_inputs == 50

    def test_model_failure_is_500(self, generator):
        app = create_app(generator=generator)
        client = TestClient(app, raise_server_exceptions=False)
        generator_backup = app.state.generator
        app.state.generator = None  # force a server-side failure
        resp = client.post(
            "/generate",
            json={
                "query": "q",
                "passages": [{"id": "p", "text": "x"}],
                "max_words": 5,
            },
        )
        assert resp.status_code == 500
        app.state.generator = generator_backup

    def test_needs_generator_or_echo(self):
        with pytest.raises(ValueError):
            create_app()


class TestCheckpointIO:
    def test_save_load_identical_weights(self, generator, tmp_path):
        save_checkpoint(generator, tmp_path / "ckpt")
        loaded = load_checkpoint(tmp_path / "ckpt")
        for key, value in generator.model.state_dict().items():
            assert torch.equal(loaded.model.state_dict()[key], value)
        assert loaded.template == generator.template
        a = loaded.generate("q", ["p"], 10)
        b = generator.generate("q", ["p"], 10)
        assert a == b
