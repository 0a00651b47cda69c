import pytest
from fastapi.testclient import TestClient

from scorer_service.app import app


@pytest.fixture()
def client():
    return TestClient(app)


def item(head=1, question="green anne gables", chain=(), candidate=None):
    return {
        "head": head,
        "question": question,
        "chain": [{"title": t, "text": x} for t, x in chain],
        "candidate": candidate or {"title": "", "text": "anne green gables"},
    }


class TestScore:
    def test_full_containment(self, client):
        response = client.post("/score", json={"items": [item()]})
        assert response.status_code == 200
        assert response.json() == {"scores": [1.0]}

    def test_partial_containment(self, client):
        payload = item(question="a b", candidate={"title": "", "text": "a b c d"})
        response = client.post("/score", json={"items": [payload]})
        assert response.json()["scores"] == [0.5]

    def test_chain_contributes_context(self, client):
        payload = item(
            head=2,
            question="unrelated words",
            chain=[("bridge title", "mars mission")],
            candidate={"title": "", "text": "mars rover"},
        )
        response = client.post("/score", json={"items": [payload]})
        assert response.json()["scores"] == [0.5]

    def test_empty_batch(self, client):
        response = client.post("/score", json={"items": []})
        assert response.status_code == 200
        assert response.json() == {"scores": []}

    def test_batch_order_preserved(self, client):
        items = [
            item(candidate={"title": "", "text": "anne"}),
            item(candidate={"title": "", "text": "zebra"}),
        ]
        response = client.post("/score", json={"items": items})
        assert response.json()["scores"] == [1.0, 0.0]

    def test_stateless_across_batches(self, client):
        a = {"items": [item()]}
        b = {"items": [item(question="zzz", candidate={"title": "", "text": "qqq"})]}
        first = client.post("/score", json=a).json()
        client.post("/score", json=b)
        assert client.post("/score", json=a).json() == first


class TestErrors:
    def test_head_two_with_empty_chain(self, client):
        response = client.post("/score", json={"items": [item(head=2)]})
        assert response.status_code == 422

    def test_head_one_with_chain(self, client):
        payload = item(head=1, chain=[("t", "x")])
        response = client.post("/score", json={"items": [payload]})
        assert response.status_code == 422

    def test_untokenizable_candidate(self, client):
        payload = item(candidate={"title": "", "text": "!!!"})
        response = client.post("/score", json={"items": [payload]})
        assert response.status_code == 422

    def test_schema_violations_are_400(self, client):
        bad_bodies = [
            {},  # missing items
            {"items": [{"question": "q"}]},  # missing head/candidate
            {"items": [dict(item(), head=3)]},  # head out of range
            {"items": "nope"},  # items not a list
        ]
        for body in bad_bodies:
            response = client.post("/score", json=body)
            assert response.status_code == 400, body
            assert "error" in response.json()


class TestHealthAndRouting:
    def test_health(self, client):
        response = client.get("/health")
        assert response.status_code == 200
        assert response.json() == {"status": "ok"}

    def test_head_request(self, client):
        assert client.head("/health").status_code == 200

    def test_unknown_route(self, client):
        assert client.get("/nope").status_code == 404
