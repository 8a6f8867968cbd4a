"""HTTP service tests: uploads, discovery, caching, and net post-processing."""
from __future__ import annotations

import tempfile

import pytest
from fastapi.testclient import TestClient

from alphappp import log_to_json
from alphappp.service import create_app

from helpers import l1, l_loop, rtfm_scale_log, write_xes


@pytest.fixture()
def client():
    return TestClient(create_app())


def upload_xes(client, log, name="log.xes"):
    with tempfile.NamedTemporaryFile(suffix=".xes") as handle:
        write_xes(log, handle.name)
        handle.seek(0)
        data = handle.read()
    response = client.post("/logs", files={"file": (name, data, "application/xml")})
    assert response.status_code == 200, response.text
    return response.json()


def upload_json(client, log, name="log.json"):
    data = log_to_json(log).encode("utf-8")
    response = client.post("/logs", files={"file": (name, data, "application/json")})
    assert response.status_code == 200, response.text
    return response.json()


def test_upload_xes_reports_stats(client):
    doc = upload_xes(client, l_loop())
    assert doc["stats"] == {"events": 11, "activities": 4, "traces": 2, "variants": 2}
    assert len(doc["log_id"]) == 16


def test_upload_is_content_addressed(client):
    first = upload_xes(client, l_loop())
    second = upload_xes(client, l_loop(), name="other-name.xes")
    assert first["log_id"] == second["log_id"]


def test_upload_rtfm_scale_json_stats(client):
    doc = upload_json(client, rtfm_scale_log())
    assert doc["stats"] == {
        "events": 561_470,
        "activities": 11,
        "traces": 150_370,
        "variants": 231,
    }


def test_upload_gzipped_xes(client):
    with tempfile.NamedTemporaryFile(suffix=".xes.gz") as handle:
        write_xes(l_loop(), handle.name, gzipped=True)
        handle.seek(0)
        data = handle.read()
    response = client.post("/logs", files={"file": ("log.xes.gz", data, "application/gzip")})
    assert response.status_code == 200
    assert response.json()["stats"]["traces"] == 2


def test_upload_csv_with_column_mapping(client):
    csv = "who,step\n1,a\n1,b\n2,a\n2,c\n"
    response = client.post(
        "/logs",
        files={"file": ("log.csv", csv.encode(), "text/csv")},
        data={"case_column": "who", "activity_column": "step"},
    )
    assert response.status_code == 200, response.text
    assert response.json()["stats"] == {
        "events": 4,
        "activities": 3,
        "traces": 2,
        "variants": 2,
    }


def test_upload_rejects_garbage_with_422(client):
    response = client.post("/logs", files={"file": ("log.xes", b"not xml", "text/xml")})
    assert response.status_code == 422


def test_upload_rejects_unknown_extension_with_422(client):
    response = client.post("/logs", files={"file": ("log.txt", b"a,b", "text/plain")})
    assert response.status_code == 422
    assert "unsupported log format" in response.json()["detail"]


def test_upload_cap_yields_413():
    small = TestClient(create_app(max_upload_bytes=64))
    response = small.post("/logs", files={"file": ("log.xes", b"x" * 65, "text/xml")})
    assert response.status_code == 413


def test_dfg_endpoint_weights_and_filtering(client):
    log_id = upload_xes(client, l1())["log_id"]
    doc = client.get(f"/logs/{log_id}/dfg").json()
    weights = {(a["source"], a["target"]): a["weight"] for a in doc["arcs"]}
    assert weights[("a", "b")] == 656
    assert weights[("▶", "d")] == 6
    assert "▶" in doc["nodes"] and "■" in doc["nodes"]
    assert "digraph" in doc["dot"]

    filtered = client.get(f"/logs/{log_id}/dfg", params={"min_weight": 400}).json()
    kept = {(a["source"], a["target"]) for a in filtered["arcs"]}
    assert kept == {("▶", "a"), ("a", "b"), ("b", "c"), ("c", "d"), ("d", "■")}
    # node set stays intact when arcs are filtered away
    assert filtered["nodes"] == doc["nodes"]


def test_dfg_rejects_negative_min_weight(client):
    log_id = upload_xes(client, l_loop())["log_id"]
    assert client.get(f"/logs/{log_id}/dfg", params={"min_weight": -1}).status_code == 400


def test_dfg_unknown_log_is_404(client):
    assert client.get("/logs/feedfeedfeedfeed/dfg").status_code == 404


def test_discover_loop_log_absolute_threshold(client):
    log_id = upload_xes(client, l_loop())["log_id"]
    response = client.post(
        f"/logs/{log_id}/discover",
        json={"algorithm": "alphappp", "config": {"d": {"value": 1, "mode": "absolute"}}},
    )
    assert response.status_code == 200, response.text
    doc = response.json()
    assert doc["stage_report"]["funnel"] == {
        "cnd0": 9,
        "cnd1": 7,
        "cnd2": 7,
        "sel": 5,
        "places": 5,
    }
    silent = [t for t in doc["net"]["transitions"] if t["silent"]]
    assert len(silent) == 1
    assert doc["stage_report"]["repair"]["loops"] == [{"from": "c", "to": "a"}]
    assert "digraph" in doc["dot"]


def test_discover_rejects_unknown_algorithm(client):
    log_id = upload_xes(client, l_loop())["log_id"]
    response = client.post(f"/logs/{log_id}/discover", json={"algorithm": "heuristic"})
    assert response.status_code == 400


def test_discover_rejects_bad_config(client):
    log_id = upload_xes(client, l_loop())["log_id"]
    response = client.post(
        f"/logs/{log_id}/discover",
        json={"algorithm": "alphappp", "config": {"b": 1.5}},
    )
    assert response.status_code == 400
    assert "invalid discovery config" in response.json()["detail"]


def test_discover_rejects_non_object_body(client):
    log_id = upload_xes(client, l_loop())["log_id"]
    response = client.post(f"/logs/{log_id}/discover", json=[1, 2])
    assert response.status_code == 400


def test_discover_empty_log_is_400(client):
    data = '{"variants": [], "augmented": false}'.encode()
    doc = client.post("/logs", files={"file": ("empty.json", data, "application/json")})
    assert doc.status_code == 200
    log_id = doc.json()["log_id"]
    response = client.post(f"/logs/{log_id}/discover", json={"algorithm": "alphappp"})
    assert response.status_code == 400
    assert "empty log" in response.json()["detail"]


def test_discover_classical_alpha(client):
    log_id = upload_xes(client, l1())["log_id"]
    response = client.post(f"/logs/{log_id}/discover", json={"algorithm": "alpha"})
    assert response.status_code == 200
    doc = response.json()
    assert doc["stage_report"] is None
    labels = sorted(t["label"] for t in doc["net"]["transitions"])
    assert labels == ["a", "b", "c", "d"]


def test_pnml_download_matches_library_bytes(client):
    log_id = upload_xes(client, l1())["log_id"]
    doc = client.post(f"/logs/{log_id}/discover", json={"algorithm": "alphappp"}).json()
    response = client.get(f"/nets/{doc['net_id']}.pnml")
    assert response.status_code == 200
    assert response.headers["content-type"].startswith("application/xml")
    assert response.content.startswith(b"<?xml")

    # a second discovery with the same knobs lands on the same net id and bytes
    again = client.post(f"/logs/{log_id}/discover", json={"algorithm": "alphappp"}).json()
    assert again["net_id"] == doc["net_id"]
    assert client.get(f"/nets/{again['net_id']}.pnml").content == response.content


def test_pnml_unknown_net_is_404(client):
    assert client.get("/nets/feedfeedfeedfeed.pnml").status_code == 404


def test_disconnected_listing_and_removal(client):
    log_id = upload_xes(client, l1())["log_id"]
    doc = client.post(
        f"/logs/{log_id}/discover",
        json={"algorithm": "alphappp", "config": {"r": 0.7}},
    ).json()
    assert doc["stage_report"]["funnel"]["places"] == 4

    listing = client.get(f"/nets/{doc['net_id']}/disconnected").json()
    assert listing["count"] == 1
    assert listing["transitions"][0]["label"] == "c"
    assert listing["transitions"][0]["frequency"] == 404

    removal = client.post(
        f"/nets/{doc['net_id']}/remove-disconnected", json={"k": 1}
    ).json()
    assert removal["removed"] == ["c"]
    labels = sorted(t["label"] for t in removal["net"]["transitions"])
    assert labels == ["a", "b", "d"]

    # the reduced net is stored and serves PNML under its own id
    assert removal["net_id"] != doc["net_id"]
    assert client.get(f"/nets/{removal['net_id']}.pnml").status_code == 200
    reduced_listing = client.get(f"/nets/{removal['net_id']}/disconnected").json()
    assert reduced_listing["count"] == 0


def test_remove_disconnected_validates_k(client):
    log_id = upload_xes(client, l1())["log_id"]
    doc = client.post(f"/logs/{log_id}/discover", json={"algorithm": "alphappp"}).json()
    for bad in ({"k": -1}, {"k": "two"}, {}, {"k": True}):
        response = client.post(f"/nets/{doc['net_id']}/remove-disconnected", json=bad)
        assert response.status_code == 400, bad


def test_cache_flags_track_request_level_reuse(client):
    log_id = upload_xes(client, l1())["log_id"]

    first = client.post(f"/logs/{log_id}/discover", json={"algorithm": "alphappp"}).json()
    assert first["stage_report"]["cache"] == {"repair_hit": False, "candidates_hit": False}

    # only r moved: repair and enumeration both reused
    second = client.post(
        f"/logs/{log_id}/discover",
        json={"algorithm": "alphappp", "config": {"r": 0.7}},
    ).json()
    assert second["stage_report"]["cache"] == {"repair_hit": True, "candidates_hit": True}

    # n reshapes the advising graph: repair reused, enumeration redone
    third = client.post(
        f"/logs/{log_id}/discover",
        json={"algorithm": "alphappp", "config": {"n": 5}},
    ).json()
    assert third["stage_report"]["cache"] == {"repair_hit": True, "candidates_hit": False}

    # a different d invalidates everything
    fourth = client.post(
        f"/logs/{log_id}/discover",
        json={"algorithm": "alphappp", "config": {"d": {"value": 4.0, "mode": "relative"}}},
    ).json()
    assert fourth["stage_report"]["cache"] == {"repair_hit": False, "candidates_hit": False}


def test_cached_discovery_is_byte_identical(client):
    log_id = upload_xes(client, l_loop())["log_id"]
    config = {"d": {"value": 1, "mode": "absolute"}}
    first = client.post(
        f"/logs/{log_id}/discover", json={"algorithm": "alphappp", "config": config}
    ).json()
    second = client.post(
        f"/logs/{log_id}/discover", json={"algorithm": "alphappp", "config": config}
    ).json()
    assert first["net"] == second["net"]
    assert first["dot"] == second["dot"]
    assert (
        client.get(f"/nets/{first['net_id']}.pnml").content
        == client.get(f"/nets/{second['net_id']}.pnml").content
    )


def test_data_dir_persists_logs_across_restarts(tmp_path):
    first = TestClient(create_app(data_dir=tmp_path))
    log_id = upload_xes(first, l_loop())["log_id"]
    assert (tmp_path / "logs" / f"{log_id}.json").exists()

    reborn = TestClient(create_app(data_dir=tmp_path))
    response = reborn.get(f"/logs/{log_id}/dfg")
    assert response.status_code == 200
    discover = reborn.post(
        f"/logs/{log_id}/discover",
        json={"algorithm": "alphappp", "config": {"d": {"value": 1, "mode": "absolute"}}},
    )
    assert discover.status_code == 200
    assert discover.json()["stage_report"]["funnel"]["places"] == 5
