"""In-process stub servers for the /embed and /generate wire protocols.

The generation stub is the reference implementation of the protocol for
client tests: echo mode returns the query as the summary (capped at
max_words), ``overlong`` deliberately overruns the cap, and ``malformed``
returns junk, so clients can exercise truncation and error paths.  Every
valid request body is recorded for capture-and-compare assertions.

The embed stub answers with deterministic vectors from a TestHashEmbedder.
"""

from __future__ import annotations

import json
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

from . import genwire
from .retrieval.providers import TestHashEmbedder


class StubServer:
    """Threaded HTTP stub serving /generate, /embed, and /health.

    ``generate_mode``: "echo" (protocol-conformant), "overlong" (ignores
    max_words), or "malformed" (non-protocol reply).
    """

    def __init__(
        self,
        generate_mode: str = "echo",
        embed_dimension: int = 64,
        embed_seed: int = 0,
        port: int = 0,
    ):
        if generate_mode not in ("echo", "overlong", "malformed"):
            raise ValueError(f"unknown generate_mode {generate_mode!r}")
        self.generate_mode = generate_mode
        self.embedder = TestHashEmbedder(dimension=embed_dimension, seed=embed_seed)
        self.requests: list[dict] = []
        self._lock = threading.Lock()
        stub = self

        class Handler(BaseHTTPRequestHandler):
            def log_message(self, *args):  # keep test output quiet
                pass

            def _reply(self, status: int, payload, raw: str | None = None):
                body = raw if raw is not None else json.dumps(payload)
                data = body.encode("utf-8")
                self.send_response(status)
                self.send_header("Content-Type", "application/json")
                self.send_header("Content-Length", str(len(data)))
                self.end_headers()
                self.wfile.write(data)

            def do_GET(self):
                if self.path == "/health":
                    self._reply(200, {"status": "ok", "model": "stub"})
                else:
                    self._reply(404, {"error": f"no such path {self.path}"})

            def do_POST(self):
                length = int(self.headers.get("Content-Length", 0))
                try:
                    body = json.loads(self.rfile.read(length))
                except json.JSONDecodeError:
                    self._reply(400, {"error": "invalid JSON"})
                    return
                if self.path == "/generate":
                    stub._handle_generate(self, body)
                elif self.path == "/embed":
                    stub._handle_embed(self, body)
                else:
                    self._reply(404, {"error": f"no such path {self.path}"})

        self._server = ThreadingHTTPServer(("127.0.0.1", port), Handler)
        self._thread = threading.Thread(target=self._server.serve_forever, daemon=True)

    def _handle_generate(self, handler, body) -> None:
        errors = genwire.validate_generate_request(body)
        if errors:
            handler._reply(400, {"error": "; ".join(errors)})
            return
        with self._lock:
            self.requests.append(body)
        if self.generate_mode == "malformed":
            handler._reply(200, None, raw='{"not": "a summary"')
            return
        summary = body["query"]
        if self.generate_mode == "overlong":
            summary = " ".join(["word"] * (body["max_words"] + 50))
        else:
            summary = " ".join(summary.split()[: body["max_words"]])
        handler._reply(
            200, {"summary": summary, "model": "echo", "latency_ms": 1}
        )

    def _handle_embed(self, handler, body) -> None:
        texts = body.get("texts")
        role = body.get("role")
        if (
            not isinstance(texts, list)
            or not all(isinstance(t, str) and t for t in texts)
            or role not in ("query", "passage")
        ):
            handler._reply(400, {"error": "expected {texts: [str], role: query|passage}"})
            return
        vectors = [self.embedder.embed(t, role).tolist() for t in texts]
        handler._reply(200, {"vectors": vectors})

    @property
    def url(self) -> str:
        host, port = self._server.server_address
        return f"http://{host}:{port}"

    def last_request(self) -> dict | None:
        with self._lock:
            return self.requests[-1] if self.requests else None

    def __enter__(self) -> "StubServer":
        self._thread.start()
        return self

    def __exit__(self, *exc) -> None:
        self._server.shutdown()
        self._server.server_close()
