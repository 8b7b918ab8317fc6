import math

import numpy as np
import pytest
from fastapi.testclient import TestClient

from drmsurv.service import app

client = TestClient(app)


def test_health():
    reply = client.get("/health")
    assert reply.status_code == 200
    body = reply.json()
    assert body["status"] == "ok"
    assert "version" in body


class TestFitEndpoint:
    def test_km_hand_example(self):
        reply = client.post("/fit", json={
            "estimator": "km",
            "rc": {"times": [1, 2, 3], "status": [1, 0, 1]},
        })
        assert reply.status_code == 200
        body = reply.json()
        assert body["grid"] == [1.0, 3.0]
        assert body["p"] == pytest.approx([1 / 3, 2 / 3])
        assert body["converged"] is True

    def test_ecdf(self):
        reply = client.post("/fit", json={
            "estimator": "ecdf",
            "rc": {"times": [1, 1, 2], "status": [1, 1, 1]},
        })
        assert reply.json()["p"] == pytest.approx([2 / 3, 1 / 3])

    def test_km_ltrc_uses_lbrc_slot(self):
        reply = client.post("/fit", json={
            "estimator": "km-ltrc",
            "lbrc": {"times": [2, 3], "status": [1, 1], "entries": [0.5, 1.0]},
        })
        assert reply.status_code == 200
        assert reply.json()["p"] == pytest.approx([0.5, 0.5])

    def test_npmle_lbrc(self):
        reply = client.post("/fit", json={
            "estimator": "npmle-lbrc",
            "lbrc": {"times": [1, 2], "status": [1, 1], "entries": [0.5, 0.5]},
        })
        body = reply.json()
        assert body["p"] == pytest.approx([2 / 3, 1 / 3], abs=1e-6)
        assert body["pi_hat"] == pytest.approx(2 / 3, abs=1e-6)
        assert body["q"] == pytest.approx(body["p"])

    def test_drm_full_fit(self):
        rng = np.random.default_rng(0)
        times_rc = rng.gamma(1.0, 2.0, 60)
        times_lb = rng.gamma(2.0, 2.0, 60)
        entries = times_lb * rng.uniform(0, 0.8, 60)
        reply = client.post("/fit", json={
            "estimator": "drm",
            "rc": {"times": times_rc.tolist(), "status": [1] * 60},
            "lbrc": {"times": times_lb.tolist(), "status": [1] * 60,
                     "entries": entries.tolist()},
            "basis": ["log"],
            "options": {"tol": 1e-8, "max_iters": 4000},
        })
        assert reply.status_code == 200
        body = reply.json()
        assert len(body["theta"]) == 1
        assert abs(sum(body["p"]) - 1) < 1e-9
        assert abs(sum(body["q"]) - 1) < 1e-7
        assert body["iterations"] >= 1
        trace = body["loglik_trace"]
        assert all(b >= a - 1e-9 for a, b in zip(trace, trace[1:]))

    def test_drm_multi(self):
        rng = np.random.default_rng(1)
        def sample(shape):
            t = rng.gamma(shape, 2.0, 50)
            e = t * rng.uniform(0, 0.8, 50)
            return {"times": t.tolist(), "status": [1] * 50, "entries": e.tolist()}
        reply = client.post("/fit", json={
            "estimator": "drm-multi",
            "rc": {"times": rng.gamma(1.0, 2.0, 50).tolist(), "status": [1] * 50},
            "lbrc": sample(2.0),
            "tilted": [sample(3.0)],
            "basis": ["log"],
        })
        assert reply.status_code == 200
        body = reply.json()
        assert len(body["arms"]) == 2
        for arm in body["arms"]:
            assert abs(sum(arm["q"]) - 1) < 1e-7

    def test_missing_arm_is_a_client_error(self):
        reply = client.post("/fit", json={
            "estimator": "drm",
            "rc": {"times": [1, 2], "status": [1, 1]},
        })
        assert reply.status_code == 400
        assert "lbrc" in reply.json()["detail"]

    def test_domain_error_maps_to_400(self):
        reply = client.post("/fit", json={
            "estimator": "km",
            "rc": {"times": [1, 2], "status": [0, 0]},
        })
        assert reply.status_code == 400
        assert "no events" in reply.json()["detail"]

    def test_unknown_field_rejected(self):
        reply = client.post("/fit", json={"estimator": "km", "bogus": 1})
        assert reply.status_code == 422

    def test_vector_basis_accepted(self):
        rng = np.random.default_rng(2)
        t_rc = rng.gamma(1.0, 2.0, 40)
        t_lb = rng.gamma(2.0, 2.0, 40)
        reply = client.post("/fit", json={
            "estimator": "drm",
            "rc": {"times": t_rc.tolist(), "status": [1] * 40},
            "lbrc": {"times": t_lb.tolist(), "status": [1] * 40,
                     "entries": (t_lb * 0.5).tolist()},
            "basis": ["log", "x"],
        })
        assert reply.status_code == 200
        assert len(reply.json()["theta"]) == 2


class TestSimulateEndpoint:
    def test_tiny_study(self):
        reply = client.post("/simulate", json={
            "config": {
                "rc_dist": {"family": "gamma", "shape": 1.0, "scale": 2.0},
                "lbrc_dist": {"family": "gamma", "shape": 2.0, "scale": 2.0},
                "rc_cens": [0.0, 0.15],
                "lbrc_cens": 0.0,
                "n_rc": 25,
                "n_lbrc": 25,
                "n_replications": 3,
                "seed": 9,
                "estimators": ["KM_RC", "DRM"],
            },
            "workers": 1,
        })
        assert reply.status_code == 200
        body = reply.json()
        assert body["estimators"] == ["KM_RC", "DRM"]
        assert len(body["rows"]) == 2
        assert body["rows"][0]["rc_cens"] == 0.0
        assert body["rows"][1]["rc_cens"] == 0.15
        for row in body["rows"]:
            for est in row["estimates"].values():
                assert est["n_used"] + est["n_failed"] == 3

    def test_unknown_config_key_rejected(self):
        reply = client.post("/simulate", json={
            "config": {"rc_dist": {}, "lbrc_dist": {}, "bogus_key": 1},
        })
        assert reply.status_code == 422


class TestBootstrapEndpoint:
    def test_small_bootstrap(self):
        rng = np.random.default_rng(3)
        t_rc = rng.gamma(1.0, 2.0, 40)
        t_lb = rng.gamma(2.0, 2.0, 40)
        reply = client.post("/bootstrap", json={
            "rc": {"times": t_rc.tolist(), "status": [1] * 40},
            "lbrc": {"times": t_lb.tolist(), "status": [1] * 40,
                     "entries": (t_lb * 0.4).tolist()},
            "B": 12,
            "level": 0.9,
            "seed": 4,
        })
        assert reply.status_code == 200
        body = reply.json()
        assert body["B"] == 12
        assert len(body["theta_ci"]) == 1
        lo, hi = body["theta_ci"][0]
        assert lo <= hi
        assert len(body["band_points"]) == len(body["band_lower"]) \
            == len(body["band_upper"])
        assert isinstance(body["zero_outside_ci"], bool)

    def test_bad_level(self):
        reply = client.post("/bootstrap", json={
            "rc": {"times": [1, 2], "status": [1, 1]},
            "lbrc": {"times": [1, 2], "status": [1, 1], "entries": [0.5, 0.5]},
            "B": 5,
            "level": 2.0,
        })
        assert reply.status_code == 400
