"""HTTP service for the /generate wire protocol.

Echo mode serves without any model (the summary is the capped query), for
integration tests and liveness checks.  Model mode loads a checkpoint
directory produced by :mod:`fid_service.finetune` and decodes through the
fusion-in-decoder construction.  Either way the request/response schemas and
the max_words cap follow the protocol exactly.
"""

from __future__ import annotations

import argparse
import logging
import time

from fastapi import FastAPI, HTTPException, Request
from fastapi.responses import JSONResponse
from pydantic import BaseModel, Field, field_validator

from .model import DEFAULT_TEMPLATE, FidGenerator, load_checkpoint

log = logging.getLogger("fid_service")


class PassageIn(BaseModel):
    id: str
    text: str = Field(min_length=1)


class GenerateRequest(BaseModel):
    query: str = Field(min_length=1)
    passages: list[PassageIn] = Field(min_length=1)
    max_words: int = Field(ge=1)

    @field_validator("max_words", mode="before")
    @classmethod
    def _integer_only(cls, value):
        if isinstance(value, bool) or not isinstance(value, int):
            raise ValueError("max_words must be an integer")
        return value


class GenerateResponse(BaseModel):
    summary: str
    model: str
    latency_ms: int


def create_app(
    generator: FidGenerator | None = None,
    echo: bool = False,
    model_name: str = "fid-tiny",
) -> FastAPI:
    if generator is None and not echo:
        raise ValueError("need a generator unless running in echo mode")
    app = FastAPI(title="fid-service")
    app.state.generator = generator
    app.state.echo = echo
    app.state.model_name = "echo" if echo else model_name
    app.state.last_request = None
    app.state.last_encoder_inputs = 0
    # single model: concurrent requests are serialized through it
    app.state.model_lock = threading.Lock()

    @app.exception_handler(Exception)
    async def model_failure(request: Request, exc: Exception):
        log.exception("generation failed")
        return JSONResponse(status_code=500, content={"error": str(exc)})

    @app.get("/health")
    def health():
        return {"status": "ok", "model": app.state.model_name}

    @app.post("/generate", response_model=GenerateResponse)
    def generate(request: GenerateRequest):
        started = time.monotonic()
        app.state.last_request = request.model_dump()
        if app.state.echo:
            summary = " ".join(request.query.split()[: request.max_words])
            app.state.last_encoder_inputs = len(request.passages)
        else:
            generator = app.state.generator
            summary = generator.generate(
                request.query,
                [p.text for p in request.passages],
                request.max_words,
            )
            app.state.last_encoder_inputs = generator.last_input.n_encoder_inputs
            if app.state.last_encoder_inputs != len(request.passages):
                raise HTTPException(
                    status_code=500, detail="encoder input count mismatch"
                )
        log.info(
            "generated %d words from %d passages",
            len(summary.split()),
            len(request.passages),
        )
        return GenerateResponse(
            summary=summary,
            model=app.state.model_name,
            latency_ms=int((time.monotonic() - started) * 1000),
        )

    return app


def main() -> None:
    parser = argparse.ArgumentParser(description="fusion-in-decoder generation service")
    parser.add_argument("--host", default="127.0.0.1")
    parser.add_argument("--port", type=int, default=8123)
    parser.add_argument("--model", default=None, help="checkpoint directory")
    parser.add_argument("--echo", action="store_true", help="serve without a model")
    parser.add_argument("--template", default=None,
                        help=f"query/passage template (default {DEFAULT_TEMPLATE!r})")
    parser.add_argument("--device", default="cpu")
    parser.add_argument("--beams", type=int, default=1)
    args = parser.parse_args()

    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(name)s: %(message)s")
    if args.echo or not args.model:
        if not args.echo:
            log.warning("no --model given; starting in echo mode")
        app = create_app(echo=True)
    else:
        generator = load_checkpoint(args.model, device=args.device)
        if args.template:
            generator.template = args.template
        app = create_app(generator=generator, model_name=f"fid-tiny@{args.model}")

    import uvicorn

    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")


if __name__ == "__main__":
    main()
