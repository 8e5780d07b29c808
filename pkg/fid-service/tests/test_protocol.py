"""Echo mode must satisfy the primary pipeline's endpoint contract."""

import requests
from fastapi.testclient import TestClient
from oqfs import genwire
from oqfs.generation import GenerationRequest, generate_remote

from fid_service.app import create_app


def client_adapters(client: TestClient):
    def post(path, body):
        resp = client.post(path, json=body)
        try:
            return resp.status_code, resp.json()
        except ValueError:
            return resp.status_code, resp.text

    def health():
        resp = client.get("/health")
        return resp.status_code, resp.json()

    return post, health


class TestEchoContract:
    def test_passes_primary_contract_suite(self):
        app = create_app(echo=True)
        client = TestClient(app, raise_server_exceptions=False)
        post, health = client_adapters(client)
        genwire.run_generate_contract(
            post,
            get_health=health,
            last_request=lambda: app.state.last_request,
        )

    def test_health_reports_echo_model(self):
        client = TestClient(create_app(echo=True))
        body = client.get("/health").json()
        assert body["status"] == "ok"
        assert body["model"] == "echo"

    def test_cap_applies_before_client_truncation(self):
        client = TestClient(create_app(echo=True))
        resp = client.post(
            "/generate",
            json={
                "query": "one two three four five six",
                "passages": [{"id": "p", "text": "x"}],
                "max_words": 3,
            },
        )
        assert resp.json()["summary"] == "one two three"

    def test_fifty_passages_order_recorded(self):
        app = create_app(echo=True)
        client = TestClient(app)
        passages = [{"id": f"p{i:02d}", "text": f"text {i}"} for i in range(50)]
        resp = client.post(
            "/generate",
            json={"query": "q", "passages": passages, "max_words": 10},
        )
        assert resp.status_code == 200
        assert app.state.last_encoder_inputs == 50
        seen = [p["id"] for p in app.state.last_request["passages"]]
        assert seen == [p["id"] for p in passages]


class TestOverTheWire:
    def test_primary_remote_client_roundtrip(self, live_server):
        app = create_app(echo=True)
        with live_server(app, 8151) as server:
            req = GenerationRequest(
                query_id="q0",
                query="what the echo returns",
                passages=(("p0", "some passage text."),),
                max_words=50,
            )
            summary = generate_remote(req, server.url)
        assert summary.text == "what the echo returns"
        assert summary.generator == "ECHO"

    def test_wire_contract_over_socket(self, live_server):
        app = create_app(echo=True)
        with live_server(app, 8152) as server:
            def post(path, body):
                resp = requests.post(server.url + path, json=body, timeout=10)
                try:
                    return resp.status_code, resp.json()
                except ValueError:
                    return resp.status_code, resp.text

            def health():
                resp = requests.get(server.url + "/health", timeout=10)
                return resp.status_code, resp.json()

            genwire.run_generate_contract(
                post, get_health=health, last_request=lambda: app.state.last_request
            )
