"""HTTP service tests (FastAPI TestClient, no live sockets)."""

import json
from concurrent.futures import ThreadPoolExecutor

import numpy as np
import pytest
from fastapi.testclient import TestClient

from urbanheat.models import RFParams, TrainingSet, fit_random_forest, model_id, save_model
from urbanheat.service import create_app


@pytest.fixture(scope="module")
def model_file(tmp_path_factory):
    rng = np.random.default_rng(55)
    ts = TrainingSet(
        rng.uniform(0, 1e5, size=(120, 1)),
        rng.uniform(12, 20, size=120),
        ["alpha"] * 60 + ["beta"] * 60,
    )
    model = fit_random_forest(ts, RFParams(n_trees=30, seed=5))
    path = tmp_path_factory.mktemp("model") / "model.json"
    save_model(model, path)
    return path, model


@pytest.fixture()
def client(model_file, tmp_path):
    path, _ = model_file
    app = create_app(model_path=path, data_dir=tmp_path / "scenarios",
                     max_grid_cells=10_000)
    return TestClient(app)


def _grid(values, ncols, nrows, cellsize=1000.0):
    return {
        "ncols": ncols,
        "nrows": nrows,
        "cellsize_m": cellsize,
        "values": [float(v) for v in values],
        "nodata": -999.0,
    }


class TestHealthAndModel:
    def test_healthz(self, client):
        assert client.get("/healthz").status_code == 200

    def test_model_metadata(self, client, model_file):
        path, model = model_file
        resp = client.get("/model")
        assert resp.status_code == 200
        body = resp.json()
        assert body["type"] == "rf"
        assert body["n_trees"] == 30
        assert body["feature_arity"] == 1
        assert body["training_cities"] == ["alpha", "beta"]
        # metadata matches the model file's own header fields
        payload = json.loads(path.read_text())
        assert body["params"]["n_trees"] == payload["params"]["n_trees"]
        assert body["id"] == model_id(model)

    def test_no_model_503(self, tmp_path):
        app = create_app(model_path=None, data_dir=tmp_path)
        c = TestClient(app)
        assert c.get("/model").status_code == 503
        resp = c.post("/predict", json={"grid": _grid([0.0], 1, 1)})
        assert resp.status_code == 503


class TestPredict:
    def test_zero_volume_constant_prediction(self, client):
        resp = client.post("/predict", json={"grid": _grid([0.0] * 63, 9, 7)})
        assert resp.status_code == 200
        body = resp.json()
        values = body["prediction"]["values"]
        assert len(set(values)) == 1
        assert body["t_min"] == body["t_max"] == values[0]
        assert body["sigma"] == 0.85
        assert body["radius"] == 1

    def test_identical_requests_identical_responses(self, client):
        rng = np.random.default_rng(1)
        grid = _grid(rng.uniform(0, 1e5, size=48), 8, 6)
        a = client.post("/predict", json={"grid": grid}).json()
        b = client.post("/predict", json={"grid": grid}).json()
        assert a == b

    def test_blur_overrides_respected(self, client):
        rng = np.random.default_rng(2)
        grid = _grid(rng.uniform(0, 1e5, size=48), 8, 6)
        a = client.post("/predict", json={"grid": grid, "sigma": 2.0, "radius": 2}).json()
        assert a["sigma"] == 2.0
        assert a["radius"] == 2

    def test_malformed_body_400_with_field(self, client):
        resp = client.post(
            "/predict", json={"grid": {"ncols": 2, "nrows": 2, "cellsize_m": 1000.0,
                                       "values": [1.0, 2.0, 3.0]}}
        )
        assert resp.status_code == 400
        detail = resp.json()["detail"]
        assert any("values" in e["field"] or "grid" in e["field"] for e in detail)

    def test_negative_volume_400(self, client):
        resp = client.post("/predict", json={"grid": _grid([-5.0, 1, 2, 3], 2, 2)})
        assert resp.status_code == 400

    def test_grid_too_large_413(self, client):
        big = _grid([0.0] * 10_001, 73, 137)
        # 73*137 = 10001 > limit
        resp = client.post("/predict", json={"grid": big})
        assert resp.status_code == 413

    def test_matches_library_prediction(self, client, model_file):
        _, model = model_file
        from urbanheat.grids import BBox, GridSpec, Raster
        from urbanheat.metrics import predict_grid
        from urbanheat.volume import gaussian_kernel

        rng = np.random.default_rng(3)
        values = rng.uniform(0, 1e5, size=(6, 8))
        resp = client.post(
            "/predict", json={"grid": _grid(values.ravel(), 8, 6)}
        ).json()
        bbox = BBox(0, 8 * 1000.0, 0, 6 * 1000.0)
        spec = GridSpec(bbox=bbox, width=8, height=6, cell_size_m=1000.0)
        expected = predict_grid(model, Raster(spec=spec, values=values),
                                gaussian_kernel(0.85, 1))
        np.testing.assert_array_equal(
            np.array(resp["prediction"]["values"]).reshape(6, 8), expected.values
        )


class TestScenarios:
    def _scenario(self, name="plan A", sid=None):
        base = _grid([1000.0, 2000.0, 3000.0, 4000.0], 2, 2)
        edited = _grid([1000.0, 9000.0, 3000.0, 4000.0], 2, 2)
        body = {"name": name, "base": base, "edited": edited}
        if sid:
            body["id"] = sid
        return body

    def test_create_then_get_identical(self, client):
        created = client.post("/scenarios", json=self._scenario()).json()
        got = client.get(f"/scenarios/{created['id']}").json()
        assert got["base"] == created["base"]
        assert got["edited"] == created["edited"]
        assert got["name"] == "plan A"

    def test_delete_then_404(self, client):
        created = client.post("/scenarios", json=self._scenario()).json()
        assert client.delete(f"/scenarios/{created['id']}").status_code == 204
        assert client.get(f"/scenarios/{created['id']}").status_code == 404

    def test_duplicate_id_409(self, client):
        assert client.post("/scenarios", json=self._scenario(sid="dup")).status_code == 201
        assert client.post("/scenarios", json=self._scenario(sid="dup")).status_code == 409

    def test_unknown_404(self, client):
        assert client.get("/scenarios/nope").status_code == 404
        assert client.delete("/scenarios/nope").status_code == 404

    def test_list_sorted_by_creation(self, client):
        for i in range(4):
            client.post("/scenarios", json=self._scenario(name=f"s{i}", sid=f"s{i}"))
        listed = client.get("/scenarios").json()
        names = [s["name"] for s in listed]
        assert names == sorted(names, key=lambda n: names.index(n))  # stable order
        created = [s["created_at"] for s in listed]
        assert created == sorted(created)

    def test_mismatched_grids_400(self, client):
        body = self._scenario()
        body["edited"] = _grid([1.0, 2.0], 2, 1)
        assert client.post("/scenarios", json=body).status_code == 400

    def test_concurrent_creation_all_retrievable(self, client):
        def create(i):
            return client.post(
                "/scenarios", json=self._scenario(name=f"c{i}", sid=f"conc{i}")
            ).status_code

        with ThreadPoolExecutor(max_workers=8) as pool:
            codes = list(pool.map(create, range(20)))
        assert codes == [201] * 20
        for i in range(20):
            got = client.get(f"/scenarios/conc{i}")
            assert got.status_code == 200
            assert got.json()["name"] == f"c{i}"


def test_storage_failure_507(client, monkeypatch):
    from urbanheat.service.store import ScenarioStore

    def boom(self, path, record):
        raise OSError("disk full")

    monkeypatch.setattr(ScenarioStore, "_write", boom)
    base = _grid([1.0, 2.0, 3.0, 4.0], 2, 2)
    resp = client.post("/scenarios", json={"name": "x", "base": base, "edited": base})
    assert resp.status_code == 507
