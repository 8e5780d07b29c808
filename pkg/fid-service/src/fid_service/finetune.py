"""Fine-tune the fusion-in-decoder generator on retrieval-backed pairs.

Training pairs come from the primary pipeline's files: a generation-requests
JSONL (query + top-k retrieved passages per query, from `oqfs requests`) and
a clusters JSONL supplying the reference summaries.  Defaults follow the
experimental setup this service backs: learning rate 1e-4, batch size 1,
at most 30 epochs, k = 50 passages.

The checkpoint directory contains the model config, weights, template
settings, and a manifest with the hyperparameters and a hash of the training
pairs; the manifest is fully deterministic for a given dataset and seed.

    fid-finetune --requests data/requests.jsonl --clusters data/clusters.jsonl \
        --out runs/ckpt --epochs 1
"""

from __future__ import annotations

import argparse
import hashlib
import json
import logging
import random
from pathlib import Path

import torch

from .model import FidGenerator, save_checkpoint, tiny_config
from transformers import T5ForConditionalGeneration

log = logging.getLogger("fid_service.finetune")


def _read_jsonl(path: str | Path) -> list[dict]:
    records = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if line.strip():
                records.append(json.loads(line))
    return records


def build_pairs(
    requests_path: str | Path, clusters_path: str | Path, k: int
) -> list[dict]:
    """One training pair per query: template inputs for top-k, first reference."""
    references = {
        rec["cluster_id"]: rec["reference_summaries"]
        for rec in _read_jsonl(clusters_path)
    }
    pairs = []
    for rec in _read_jsonl(requests_path):
        refs = references.get(rec["query_id"])
        if not refs:
            log.warning("query %s has no references; skipped", rec["query_id"])
            continue
        pairs.append(
            {
                "query_id": rec["query_id"],
                "query": rec["query"],
                "passages": [p["text"] for p in rec["passages"][:k]],
                "target": refs[0],
            }
        )
    return pairs


def data_hash(pairs: list[dict]) -> str:
    blob = json.dumps(pairs, sort_keys=True, ensure_ascii=False).encode("utf-8")
    return hashlib.sha256(blob).hexdigest()


def finetune(
    pairs: list[dict],
    out_dir: str | Path,
    lr: float = 1e-4,
    batch_size: int = 1,
    epochs: int = 30,
    k: int = 50,
    seed: int = 0,
    max_input_tokens: int = 512,
    d_model: int = 64,
    num_layers: int = 2,
    device: str = "cpu",
    init_checkpoint: str | None = None,
) -> Path:
    if not pairs:
        raise ValueError("empty training set")
    if epochs > 30:
        raise ValueError("epochs capped at 30")
    if batch_size != 1:
        raise ValueError("this trainer steps one fused sample at a time (batch size 1)")
    torch.manual_seed(seed)
    if init_checkpoint:
        from .model import load_checkpoint

        generator = load_checkpoint(init_checkpoint, device=device)
        generator.max_input_tokens = max_input_tokens
    else:
        model = T5ForConditionalGeneration(
            tiny_config(d_model=d_model, num_layers=num_layers)
        )
        generator = FidGenerator(
            model, max_input_tokens=max_input_tokens, device=device
        )
    optimizer = torch.optim.Adam(generator.model.parameters(), lr=lr)
    order = list(range(len(pairs)))
    rng = random.Random(seed)
    generator.model.train()
    for epoch in range(epochs):
        rng.shuffle(order)
        total = 0.0
        for i in order:
            pair = pairs[i]
            optimizer.zero_grad()
            loss = generator.loss(pair["query"], pair["passages"], pair["target"])
            loss.backward()
            optimizer.step()
            total += loss.item()
        log.info("epoch %d/%d mean loss %.4f", epoch + 1, epochs, total / len(pairs))

    out = Path(out_dir)
    save_checkpoint(generator, out)
    manifest = {
        "hyperparams": {
            "lr": lr,
            "batch_size": batch_size,
            "epochs": epochs,
            "k": k,
            "seed": seed,
            "max_input_tokens": max_input_tokens,
            "d_model": d_model,
            "num_layers": num_layers,
        },
        "n_pairs": len(pairs),
        "data_sha256": data_hash(pairs),
    }
    (out / "manifest.json").write_text(
        json.dumps(manifest, indent=2, sort_keys=True) + "\n"
    )
    return out


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--requests", required=True, help="generation-requests jsonl")
    parser.add_argument("--clusters", required=True, help="clusters jsonl (references)")
    parser.add_argument("--out", required=True, help="checkpoint directory")
    parser.add_argument("--lr", type=float, default=1e-4)
    parser.add_argument("--batch-size", type=int, default=1)
    parser.add_argument("--epochs", type=int, default=30)
    parser.add_argument("--k", type=int, default=50)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--max-input-tokens", type=int, default=512)
    parser.add_argument("--d-model", type=int, default=64)
    parser.add_argument("--num-layers", type=int, default=2)
    parser.add_argument("--device", default="cpu")
    parser.add_argument("--init-checkpoint", default=None)
    args = parser.parse_args()

    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(name)s: %(message)s")
    pairs = build_pairs(args.requests, args.clusters, args.k)
    out = finetune(
        pairs,
        args.out,
        lr=args.lr,
        batch_size=args.batch_size,
        epochs=args.epochs,
        k=args.k,
        seed=args.seed,
        max_input_tokens=args.max_input_tokens,
        d_model=args.d_model,
        num_layers=args.num_layers,
        device=args.device,
        init_checkpoint=args.init_checkpoint,
    )
    log.info("checkpoint written to %s", out)


if __name__ == "__main__":
    main()
