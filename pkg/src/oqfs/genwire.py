"""Generation wire protocol: schemas and a reusable conformance check.

Protocol (JSON over HTTP):

    POST /generate
        request  {"query": str, "passages": [{"id": str, "text": str}],
                  "max_words": int}
        response {"summary": str, "model": str, "latency_ms": int}
    GET /health
        response {"status": "ok", ...}

``run_generate_contract`` drives any endpoint through the protocol: request
acceptance, response schema, the summary word cap, rejection of malformed
requests, and order preservation for a 50-passage request (verified against
the endpoint's record of the last request body when one is available).
"""

from __future__ import annotations

from typing import Callable


def validate_generate_request(body) -> list[str]:
    """Schema errors for a /generate request body; empty list when valid."""
    errors = []
    if not isinstance(body, dict):
        return ["request body must be a JSON object"]
    if not isinstance(body.get("query"), str) or not body.get("query"):
        errors.append("query must be a non-empty string")
    passages = body.get("passages")
    if not isinstance(passages, list) or not passages:
        errors.append("passages must be a non-empty list")
    else:
        for i, p in enumerate(passages):
            if (
                not isinstance(p, dict)
                or not isinstance(p.get("id"), str)
                or not isinstance(p.get("text"), str)
                or not p.get("text")
            ):
                errors.append(f"passages[{i}] must be {{id: str, text: non-empty str}}")
                break
    max_words = body.get("max_words")
    if not isinstance(max_words, int) or isinstance(max_words, bool) or max_words < 1:
        errors.append("max_words must be a positive integer")
    return errors


def validate_generate_response(body) -> list[str]:
    """Schema errors for a /generate response body; empty list when valid."""
    errors = []
    if not isinstance(body, dict):
        return ["response body must be a JSON object"]
    if not isinstance(body.get("summary"), str):
        errors.append("summary must be a string")
    if not isinstance(body.get("model"), str) or not body.get("model"):
        errors.append("model must be a non-empty string")
    latency = body.get("latency_ms")
    if not isinstance(latency, int) or isinstance(latency, bool) or latency < 0:
        errors.append("latency_ms must be a non-negative integer")
    return errors


PostFn = Callable[[str, dict], tuple[int, object]]
"""(path, json_body) -> (status_code, parsed_json_or_text)."""


def run_generate_contract(
    post: PostFn,
    get_health: Callable[[], tuple[int, object]] | None = None,
    last_request: Callable[[], dict | None] | None = None,
) -> None:
    """Assert protocol conformance of a /generate endpoint.

    ``post`` performs the HTTP round trip.  ``get_health`` checks /health
    when provided.  ``last_request`` returns the endpoint's record of the
    most recent request body, enabling the order-preservation check.
    Raises AssertionError on the first violation.
    """
    # 1. Well-formed request -> valid response schema.
    request = {
        "query": "what is tested here",
        "passages": [{"id": "p0", "text": "a passage about testing."}],
        "max_words": 50,
    }
    assert not validate_generate_request(request)
    status, body = post("/generate", request)
    assert status == 200, f"valid request got HTTP {status}: {body!r}"
    errors = validate_generate_response(body)
    assert not errors, f"response schema violations: {errors}"

    # 2. Word cap respected at a tight budget.
    status, body = post(
        "/generate",
        {
            "query": "one two three four five six seven eight nine ten",
            "passages": [{"id": "p0", "text": "text " * 40}],
            "max_words": 5,
        },
    )
    assert status == 200, f"cap request got HTTP {status}"
    assert len(body["summary"].split()) <= 5, (
        f"summary exceeds max_words: {body['summary']!r}"
    )

    # 3. Malformed requests rejected with a 400-class status.
    for bad in (
        {"passages": [{"id": "p0", "text": "x"}], "max_words": 10},
        {"query": "q", "passages": [], "max_words": 10},
        {"query": "q", "passages": [{"id": "p0", "text": "x"}], "max_words": 0},
        {"query": "q", "passages": [{"id": "p0"}], "max_words": 10},
    ):
        status, body = post("/generate", bad)
        assert 400 <= status < 500, (
            f"malformed request {bad!r} got HTTP {status}, wanted 4xx"
        )

    # 4. 50 passages arrive complete and in request order.
    passages = [{"id": f"p{i:02d}", "text": f"passage number {i} " * 20} for i in range(50)]
    status, body = post(
        "/generate", {"query": "big request", "passages": passages, "max_words": 250}
    )
    assert status == 200, f"50-passage request got HTTP {status}"
    assert not validate_generate_response(body)
    if last_request is not None:
        seen = last_request()
        assert seen is not None, "endpoint recorded no request"
        seen_ids = [p["id"] for p in seen["passages"]]
        assert seen_ids == [p["id"] for p in passages], (
            "passage order not preserved on the wire"
        )

    # 5. Health endpoint answers.
    if get_health is not None:
        status, body = get_health()
        assert status == 200, f"/health got HTTP {status}"
        assert isinstance(body, dict) and body.get("status") == "ok"
