import numpy as np
import pytest
from fastapi.testclient import TestClient

from trigdisc import __version__
from trigdisc.grids import parse_pointset
from trigdisc.service import app

client = TestClient(app, raise_server_exceptions=False)


def post(path, payload, expect=200):
    resp = client.post(path, json=payload)
    assert resp.status_code == expect, resp.text
    return resp.json()


class TestHealth:
    def test_health(self):
        body = client.get("/health").json()
        assert body == {"status": "ok", "version": __version__}


class TestIndexSetEndpoint:
    def test_hyperbolic(self):
        body = post("/indexset", {"spec": {"kind": "hyperbolic", "n": 1, "d": 2}})
        assert body["count"] == 5 and body["lambda_size"] == 13
        assert body["serialized"].startswith("dim=2 count=5")

    def test_box(self):
        body = post("/indexset", {"spec": {"kind": "box", "bounds": [1, 1]}})
        assert body["count"] == 9

    def test_difference_transform(self):
        spec = {"kind": "explicit", "freqs": [[0], [1]]}
        body = post("/indexset", {"spec": spec, "transform": "difference"})
        assert body["count"] == 3  # {-1, 0, 1}

    def test_missing_parameters(self):
        post("/indexset", {"spec": {"kind": "hyperbolic", "n": 1}}, expect=400)

    def test_dyadic(self):
        body = post("/indexset", {"spec": {"kind": "dyadic", "s": [2, 0]}})
        assert body["count"] == 4


class TestKorobovEndpoint:
    def test_certify_level_one(self):
        body = post("/korobov", {"spec": {"kind": "hyperbolic", "n": 1, "d": 2}})
        assert body["ok"] and body["p"] == 29 and body["within_safe_bound"]
        assert abs(body["lambda_min"] - 1) < 1e-9 and abs(body["lambda_max"] - 1) < 1e-9
        nodes = parse_pointset(body["nodes"])
        assert len(nodes) == 29

    def test_verify_roundtrip_and_tamper(self):
        spec = {"kind": "hyperbolic", "n": 1, "d": 2}
        built = post("/korobov", {"spec": spec})
        ok = post("/korobov/verify", {
            "spec": spec, "certificate": built["certificate"], "nodes": built["nodes"],
        })
        assert ok["ok"] and not ok["failures"]
        lines = built["nodes"].splitlines()
        toks = lines[3].split()
        toks[1] = repr(float(toks[1]) + 1e-3)
        lines[3] = " ".join(toks)
        bad = post("/korobov/verify", {
            "spec": spec, "certificate": built["certificate"], "nodes": "\n".join(lines) + "\n",
        })
        assert not bad["ok"] and bad["failures"]

    def test_wrong_set_hash_detected(self):
        built = post("/korobov", {"spec": {"kind": "hyperbolic", "n": 1, "d": 2}})
        other = post("/korobov/verify", {
            "spec": {"kind": "box", "bounds": [1, 1]},
            "certificate": built["certificate"],
            "nodes": built["nodes"],
        })
        assert not other["ok"]


class TestMcEndpoints:
    def test_search_success(self):
        body = post("/mc/search", {
            "spec": {"kind": "hyperbolic", "n": 1, "d": 2},
            "q": 2.0, "m": 80, "eta": 0.25, "attempts": 5, "trials": 1, "seed": 0,
            "level": 1, "include_nodes": True,
        })
        assert body["success"] and body["report"]["n"] == 1
        assert body["nodes"] is not None and parse_pointset(body["nodes"]).dim == 2

    def test_search_failure_is_200(self):
        body = post("/mc/search", {
            "spec": {"kind": "hyperbolic", "n": 1, "d": 2},
            "q": 2.0, "m": 4, "eta": 0.25, "attempts": 2, "trials": 1, "seed": 0,
        })
        assert not body["success"] and body["nodes"] is None
        assert body["report"]["attempts"] == 2

    def test_ladder(self):
        body = post("/mc/ladder", {
            "spec": {"kind": "hyperbolic", "n": 1, "d": 2},
            "ms": [8, 16], "seeds": 4, "level": 1,
        })
        assert [row["m"] for row in body["rows"]] == [8, 16]

    def test_validation_422(self):
        post("/mc/search", {
            "spec": {"kind": "hyperbolic", "n": 1, "d": 2}, "m": 0,
        }, expect=422)


class TestSparsifyEndpoint:
    def test_korobov_route(self):
        body = post("/sparsify", {
            "spec": {"kind": "hyperbolic", "n": 1, "d": 2}, "grid": "korobov",
            "oversample": 4.0,
        })
        assert body["m"] == 29 and body["n_space"] == 5
        assert body["nonzeros"] <= 20 and body["kappa"] <= body["kappa_bound"] + 1e-9
        ps = parse_pointset(body["weighted_nodes"])
        assert len(ps) == 29 and not ps.normalized
        assert np.count_nonzero(ps.weights) == body["nonzeros"]

    def test_full_grid_square(self):
        body = post("/sparsify", {
            "spec": {"kind": "box", "bounds": [1]}, "grid": "full", "oversample": 2.0,
        })
        assert body["m"] == 3 and body["kappa"] == pytest.approx(1.0, abs=1e-9)

    def test_oversample_validated(self):
        post("/sparsify", {
            "spec": {"kind": "box", "bounds": [1]}, "oversample": 1.0,
        }, expect=422)


class TestWaveletEndpoint:
    def test_all_checks_pass_on_wide_window(self):
        body = post("/wavelet", {
            "delta": 1 / 3, "smoothness": 1, "kmax": 31, "gram_kmax": 7,
            "decay_levels": [4, 5, 6, 7],
        })
        assert body["passed"]
        assert set(body["results"]) == {"partition", "support", "orthonormality", "decay"}

    def test_decay_transient_reported_as_failure(self):
        body = post("/wavelet", {
            "delta": 1 / 6, "smoothness": 3, "checks": ["decay"],
            "decay_levels": [4, 5, 6],
        })
        assert not body["passed"]
        assert body["results"]["decay"]["max_step_ratio"] > 1.05

    def test_subset_of_checks(self):
        body = post("/wavelet", {"checks": ["partition"], "partition_points": 64})
        assert list(body["results"]) == ["partition"] and body["passed"]
