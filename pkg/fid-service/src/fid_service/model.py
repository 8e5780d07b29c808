"""Fusion-in-decoder generator on a byte-level sequence-to-sequence model.

Each retrieved passage is concatenated with the query through a template and
encoded independently; the encoder states of all passages are concatenated
and the decoder attends over the fused sequence.  Tokenization is raw UTF-8
bytes plus pad/eos, so no vocabulary files or downloads are needed and
checkpoints trained from scratch by :mod:`fid_service.finetune` are fully
self-contained.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import torch
from transformers import T5Config, T5ForConditionalGeneration
from transformers.modeling_outputs import BaseModelOutput

PAD_ID = 0
EOS_ID = 1
BYTE_OFFSET = 2
VOCAB_SIZE = 256 + BYTE_OFFSET

DEFAULT_TEMPLATE = "question: {q} context: {p}"
# bytes decoded per output word; generous for UTF-8 text
BYTES_PER_WORD = 8

_WEIGHTS = "weights.pt"
_CONFIG = "config.json"
_SETTINGS = "fid_settings.json"


class ByteTokenizer:
    """UTF-8 bytes shifted past the pad/eos ids."""

    pad_id = PAD_ID
    eos_id = EOS_ID
    vocab_size = VOCAB_SIZE

    def encode(self, text: str, max_length: int) -> list[int]:
        ids = [b + BYTE_OFFSET for b in text.encode("utf-8")[: max_length - 1]]
        ids.append(EOS_ID)
        return ids

    def decode(self, ids) -> str:
        data = bytes(
            int(i) - BYTE_OFFSET for i in ids if int(i) >= BYTE_OFFSET
        )
        return data.decode("utf-8", errors="ignore")

    def batch(self, texts: list[str], max_length: int) -> tuple[torch.Tensor, torch.Tensor]:
        encoded = [self.encode(t, max_length) for t in texts]
        width = max(len(e) for e in encoded)
        ids = torch.full((len(encoded), width), PAD_ID, dtype=torch.long)
        mask = torch.zeros((len(encoded), width), dtype=torch.long)
        for row, seq in enumerate(encoded):
            ids[row, : len(seq)] = torch.tensor(seq, dtype=torch.long)
            mask[row, : len(seq)] = 1
        return ids, mask


def tiny_config(
    d_model: int = 64, num_layers: int = 2, num_heads: int = 4, d_ff: int = 128
) -> T5Config:
    return T5Config(
        vocab_size=VOCAB_SIZE,
        d_model=d_model,
        d_kv=d_model // num_heads,
        d_ff=d_ff,
        num_layers=num_layers,
        num_heads=num_heads,
        pad_token_id=PAD_ID,
        eos_token_id=EOS_ID,
        decoder_start_token_id=PAD_ID,
    )


@dataclass(frozen=True)
class FidInput:
    """The fused encoder view of one request."""

    encoder_texts: tuple[str, ...]  # one per passage, order preserved
    input_ids: torch.Tensor  # (k, L)
    attention_mask: torch.Tensor  # (k, L)

    @property
    def n_encoder_inputs(self) -> int:
        return self.input_ids.shape[0]


class FidGenerator:
    """Wraps an encoder-decoder model with the fused-passage construction."""

    def __init__(
        self,
        model: T5ForConditionalGeneration,
        template: str = DEFAULT_TEMPLATE,
        max_input_tokens: int = 512,
        device: str = "cpu",
    ):
        self.model = model.to(device)
        self.tokenizer = ByteTokenizer()
        self.template = template
        self.max_input_tokens = max_input_tokens
        self.device = device
        self.last_input: FidInput | None = None

    def build_input(self, query: str, passages: list[str]) -> FidInput:
        if not passages:
            raise ValueError("need at least one passage")
        texts = tuple(self.template.format(q=query, p=p) for p in passages)
        ids, mask = self.tokenizer.batch(list(texts), self.max_input_tokens)
        fid_input = FidInput(
            encoder_texts=texts,
            input_ids=ids.to(self.device),
            attention_mask=mask.to(self.device),
        )
        assert fid_input.n_encoder_inputs == len(passages)
        self.last_input = fid_input
        return fid_input

    def _fuse(self, fid_input: FidInput) -> tuple[BaseModelOutput, torch.Tensor]:
        states = self.model.encoder(
            input_ids=fid_input.input_ids,
            attention_mask=fid_input.attention_mask,
        ).last_hidden_state
        k, length, width = states.shape
        fused = BaseModelOutput(last_hidden_state=states.reshape(1, k * length, width))
        fused_mask = fid_input.attention_mask.reshape(1, k * length)
        return fused, fused_mask

    @torch.no_grad()
    def generate(
        self,
        query: str,
        passages: list[str],
        max_words: int,
        num_beams: int = 1,
    ) -> str:
        self.model.eval()
        fid_input = self.build_input(query, passages)
        fused, fused_mask = self._fuse(fid_input)
        output = self.model.generate(
            encoder_outputs=fused,
            attention_mask=fused_mask,
            max_new_tokens=min(max_words * BYTES_PER_WORD, 2048),
            num_beams=num_beams,
            do_sample=False,
        )
        text = self.tokenizer.decode(output[0])
        return " ".join(text.split()[:max_words])

    def loss(self, query: str, passages: list[str], target: str) -> torch.Tensor:
        fid_input = self.build_input(query, passages)
        fused, fused_mask = self._fuse(fid_input)
        labels, _ = self.tokenizer.batch([target], self.max_input_tokens)
        labels = labels.to(self.device)
        labels[labels == PAD_ID] = -100
        return self.model(
            encoder_outputs=fused, attention_mask=fused_mask, labels=labels
        ).loss


def save_checkpoint(generator: FidGenerator, out_dir: str | Path) -> None:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / _CONFIG).write_text(generator.model.config.to_json_string())
    (out / _SETTINGS).write_text(
        json.dumps(
            {
                "template": generator.template,
                "max_input_tokens": generator.max_input_tokens,
            },
            sort_keys=True,
        )
        + "\n"
    )
    torch.save(generator.model.state_dict(), out / _WEIGHTS)


def load_checkpoint(model_dir: str | Path, device: str = "cpu") -> FidGenerator:
    path = Path(model_dir)
    config = T5Config.from_json_file(path / _CONFIG)
    model = T5ForConditionalGeneration(config)
    state = torch.load(path / _WEIGHTS, map_location=device, weights_only=True)
    model.load_state_dict(state)
    settings = json.loads((path / _SETTINGS).read_text())
    return FidGenerator(
        model,
        template=settings["template"],
        max_input_tokens=settings["max_input_tokens"],
        device=device,
    )
