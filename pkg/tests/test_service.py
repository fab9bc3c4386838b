"""HTTP service contract: schema, errors, determinism."""

import jsonschema
import numpy as np
import pytest
from fastapi.testclient import TestClient

from woebox.data import SyntheticSpec, generate_synthetic
from woebox.engine import FeaturePartition
from woebox.explain import EXPLANATION_SCHEMA
from woebox.models import fit_gnb
from woebox.service import build_state, create_app


@pytest.fixture(scope="module")
def client():
    data = generate_synthetic(SyntheticSpec(dim=4, n_classes=4, n_samples=1200, seed=41))
    model = fit_gnb(data)
    groups = FeaturePartition.from_groups(
        {"front": ["x0", "x1"], "back": ["x2", "x3"]}, data.feature_names
    )
    state = build_state(data, model, {"groups": groups})
    return TestClient(create_app(state))


class TestMetaAndInstances:
    def test_health(self, client):
        response = client.get("/api/health")
        assert response.status_code == 200
        assert response.json() == {"status": "ok"}

    def test_meta_lists_partitions_and_defaults(self, client):
        body = client.get("/api/meta").json()
        assert body["class_names"] == ["c0", "c1", "c2", "c3"]
        assert set(body["partitions"]) == {"singletons", "groups"}
        assert body["config_defaults"]["salience_threshold"] == 2.0
        assert body["n_instances"] == 1200

    def test_instances_pagination(self, client):
        body = client.get("/api/instances", params={"offset": 10, "limit": 5}).json()
        assert body["total"] == 1200
        assert [row["index"] for row in body["rows"]] == [10, 11, 12, 13, 14]
        row = body["rows"][0]
        assert set(row) == {"index", "features", "label", "prediction"}

    def test_instances_past_end_empty(self, client):
        body = client.get("/api/instances", params={"offset": 5000, "limit": 5}).json()
        assert body["rows"] == []


class TestExplainEndpoint:
    def test_happy_path_validates_schema(self, client):
        response = client.post(
            "/api/explain",
            json={"row_index": 0, "partition_name": "singletons", "mode": "sequential"},
        )
        assert response.status_code == 200
        body = response.json()
        jsonschema.validate(body, EXPLANATION_SCHEMA)
        kept_sizes = [len(s["kept"]) for s in body["steps"]]
        assert kept_sizes == sorted(kept_sizes, reverse=True)
        assert body["steps"][-1]["kept"] == [body["y_star"]]

    def test_oneshot_single_step(self, client):
        body = client.post(
            "/api/explain", json={"row_index": 3, "mode": "oneshot"}
        ).json()
        assert len(body["steps"]) == 1
        assert len(body["steps"][0]["ruled_out"]) == 3

    def test_inline_instance(self, client):
        response = client.post(
            "/api/explain", json={"instance": [0.0, 0.1, -0.2, 0.5], "mode": "sequential"}
        )
        assert response.status_code == 200

    def test_wrong_arity_400(self, client):
        response = client.post("/api/explain", json={"instance": [1.0, 2.0]})
        assert response.status_code == 400
        detail = response.json()
        assert detail["error"] == "validation"
        assert "expected 4 values" in detail["detail"][0]["message"]

    def test_both_row_and_instance_400(self, client):
        response = client.post(
            "/api/explain", json={"row_index": 0, "instance": [0.0, 0.0, 0.0, 0.0]}
        )
        assert response.status_code == 400

    def test_unknown_row_404(self, client):
        assert client.post("/api/explain", json={"row_index": 10_000}).status_code == 404

    def test_unknown_partition_404(self, client):
        response = client.post(
            "/api/explain", json={"row_index": 0, "partition_name": "missing"}
        )
        assert response.status_code == 404

    def test_inline_partition_gap_400_names_missing_feature(self, client):
        response = client.post(
            "/api/explain",
            json={"row_index": 0, "partition": {"only": ["x0", "x1", "x3"]}},
        )
        assert response.status_code == 400
        message = response.json()["detail"][0]["message"]
        assert "x2" in message

    def test_inline_partition_works_when_complete(self, client):
        response = client.post(
            "/api/explain",
            json={"row_index": 0, "partition": {"a": ["x0", "x3"], "b": ["x1", "x2"]}},
        )
        assert response.status_code == 200
        names = {atom["name"] for atom in response.json()["steps"][0]["atoms"]}
        assert names == {"a", "b"}

    def test_malformed_body_returns_field_errors(self, client):
        response = client.post("/api/explain", json={"row_index": "zero"})
        assert response.status_code == 400
        assert response.json()["error"] == "validation"
        assert any("row_index" in item["field"] for item in response.json()["detail"])

    def test_random_order_without_seed_400(self, client):
        response = client.post(
            "/api/explain", json={"row_index": 0, "atom_order_policy": "random"}
        )
        assert response.status_code == 400

    def test_seeded_requests_byte_identical(self, client):
        request = {
            "row_index": 5,
            "partition_name": "groups",
            "mode": "sequential",
            "tau": 1.5,
            "atom_order_policy": "random",
            "seed": 99,
        }
        first = client.post("/api/explain", json=request)
        second = client.post("/api/explain", json=request)
        assert first.status_code == second.status_code == 200
        assert first.content == second.content

    def test_tau_reflected_in_salience(self, client):
        body = client.post("/api/explain", json={"row_index": 1, "tau": 0.0}).json()
        assert all(atom["salient"] for atom in body["steps"][0]["atoms"])


class TestConcurrentRequests:
    def test_parallel_seeded_explains_agree(self, client):
        from concurrent.futures import ThreadPoolExecutor

        request = {"row_index": 7, "partition_name": "groups", "mode": "sequential", "seed": 3}

        def call(_):
            return client.post("/api/explain", json=request).content

        with ThreadPoolExecutor(max_workers=8) as pool:
            bodies = list(pool.map(call, range(16)))
        assert all(body == bodies[0] for body in bodies)


class TestBuildStateValidation:
    def test_name_mismatch_rejected(self):
        from woebox.errors import WoeboxError

        data = generate_synthetic(SyntheticSpec(dim=3, n_classes=2, n_samples=100, seed=1))
        other = generate_synthetic(
            SyntheticSpec(dim=3, n_classes=2, n_samples=100, seed=1, feature_prefix="z")
        )
        model = fit_gnb(other)
        with pytest.raises(WoeboxError, match="feature names"):
            build_state(data, model)
