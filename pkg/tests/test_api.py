"""Route-by-route conformance: success, 404, and 400 cases plus traversal."""
import gzip
import urllib.parse

import pytest
from fastapi.testclient import TestClient

from voxlab.api import create_app
from voxlab.store import default_state


@pytest.fixture
def client(fixture_store):
    app = create_app(fixture_store)
    with TestClient(app, raise_server_exceptions=False) as c:
        c.store = fixture_store
        yield c


CASE = "BraTS2019/patient_001"
CASE_ENCODED = urllib.parse.quote(CASE, safe="")


# Dataset routes -------------------------------------------------------------------


def test_datasets_list(client):
    response = client.get("/datasets")
    assert response.status_code == 200
    assert response.json() == [{"name": "BraTS2019"}]


def test_dataset_get(client):
    assert client.get("/datasets/BraTS2019").json() == {"name": "BraTS2019"}
    assert client.get("/datasets/Nope").status_code == 404


def test_cases_list(client):
    response = client.get("/datasets/BraTS2019/cases")
    assert response.status_code == 200
    assert response.json() == [
        {"name": "patient_001", "path": "BraTS2019/patient_001"},
        {"name": "patient_002", "path": "BraTS2019/patient_002"},
    ]
    assert client.get("/datasets/Nope/cases").status_code == 404


def test_layers_list(client):
    response = client.get("/datasets/BraTS2019/cases/patient_001/layers")
    assert response.status_code == 200
    assert [l["name"] for l in response.json()] == ["seg", "t1"]
    assert client.get("/datasets/BraTS2019/cases/patient_404/layers").status_code == 404


def test_layer_download_gzip(client):
    response = client.get("/datasets/BraTS2019/cases/patient_001/layers/t1")
    assert response.status_code == 200
    assert response.headers["content-type"] == "application/gzip"
    expected = (client.store.config.dataset_root / CASE / "t1.nii.gz").read_bytes()
    assert response.content == expected


def test_layer_download_plain(client):
    response = client.get("/datasets/BraTS2019/cases/patient_002/layers/t1")
    assert response.status_code == 200
    assert response.headers["content-type"] == "application/octet-stream"
    assert client.get(
        "/datasets/BraTS2019/cases/patient_001/layers/missing").status_code == 404


def test_layer_traversal_segment_rejected(client):
    response = client.get("/datasets/BraTS2019/cases/patient_001/layers/%2e%2e")
    assert response.status_code == 400


# Script routes -------------------------------------------------------------------


def test_scripts_list(client):
    response = client.get("/scripts")
    assert response.status_code == 200
    assert response.json() == [
        {"id": "self_dice", "name": "self dice"},
        {"id": "threshold", "name": "threshold"},
    ]


def test_script_fetch(client):
    response = client.get("/scripts/threshold")
    assert response.status_code == 200
    assert response.headers["content-type"].startswith("text/plain")
    expected = (client.store.config.scripts_root / "threshold.imgql").read_bytes()
    assert response.content == expected
    assert client.get("/scripts/missing").status_code == 404


# Workspace routes ------------------------------------------------------------------


def test_workspace_create_and_list(client):
    response = client.post("/workspaces", json={"name": "a"})
    assert response.status_code == 201
    body = response.json()
    assert body["name"] == "a" and len(body["id"]) >= 12
    assert body["state"]["data"]["openedDatasetsNames"] == []
    listed = client.get("/workspaces").json()
    assert {"id": body["id"], "name": "a"} in listed


def test_workspace_create_missing_name(client):
    assert client.post("/workspaces", json={}).status_code == 400
    assert client.post("/workspaces", content=b"not json").status_code == 400


def test_workspace_clone_unknown_source(client):
    response = client.post("/workspaces", json={"name": "b", "sourceId": "bad"})
    assert response.status_code == 404


def test_workspace_get_put_delete(client):
    ws = client.post("/workspaces", json={"name": "a"}).json()
    got = client.get(f"/workspaces/{ws['id']}")
    assert got.status_code == 200 and got.json()["name"] == "a"

    state = default_state()
    state["ui"]["isDarkMode"] = True
    put = client.put(f"/workspaces/{ws['id']}", json={"name": "renamed", "state": state})
    assert put.status_code == 200 and put.json() == {"ok": True}
    assert client.get(f"/workspaces/{ws['id']}").json()["name"] == "renamed"

    deleted = client.delete(f"/workspaces/{ws['id']}")
    assert deleted.status_code == 200 and deleted.json() == {"ok": True}
    assert client.get(f"/workspaces/{ws['id']}").status_code == 404
    assert client.delete(f"/workspaces/{ws['id']}").status_code == 404
    assert client.put(f"/workspaces/{ws['id']}", json={"name": "x"}).status_code == 404


def test_workspace_put_invalid_state(client):
    ws = client.post("/workspaces", json={"name": "a"}).json()
    bad = default_state()
    bad["lastGlobalStylesByLayerName"] = {"t1": {"opacity": 2.0}}
    response = client.put(f"/workspaces/{ws['id']}", json={"state": bad})
    assert response.status_code == 400
    empty = client.put(f"/workspaces/{ws['id']}", json={})
    assert empty.status_code == 400


def test_workspace_runs_listing(client):
    ws = client.post("/workspaces", json={"name": "a"}).json()
    assert client.get(f"/workspaces/{ws['id']}/runs").json() == []
    assert client.get("/workspaces/none/runs").status_code == 404


# Run routes ---------------------------------------------------------------------


def test_run_end_to_end(client):
    ws = client.post("/workspaces", json={"name": "a"}).json()
    response = client.post("/run", json={
        "workspaceId": ws["id"],
        "scriptContent": 'print "d" dice(t1 > 3, t1 > 3)',
        "cases": [CASE],
    })
    assert response.status_code == 200
    records = response.json()
    assert len(records) == 1
    assert records[0]["status"] == "SUCCEEDED"
    assert records[0]["printOutputs"] == [["d", 1.0]]
    runs = client.get(f"/workspaces/{ws['id']}/runs").json()
    assert len(runs) == 1 and runs[0]["id"] == records[0]["id"]


def test_run_unknown_workspace(client):
    response = client.post("/run", json={
        "workspaceId": "missing", "scriptContent": "x", "cases": [CASE]})
    assert response.status_code == 404


def test_run_missing_fields(client):
    ws = client.post("/workspaces", json={"name": "a"}).json()
    assert client.post("/run", json={
        "workspaceId": ws["id"], "scriptContent": "x"}).status_code == 400
    assert client.post("/run", json={
        "workspaceId": ws["id"], "cases": []}).status_code == 400
    assert client.post("/run", json={
        "scriptContent": "x", "cases": []}).status_code == 400


def test_run_per_case_failures_are_records(client):
    ws = client.post("/workspaces", json={"name": "a"}).json()
    response = client.post("/run", json={
        "workspaceId": ws["id"],
        "scriptContent": 'save "s" t1 > 3',
        "cases": [CASE, "BraTS2019/patient_404"],
    })
    assert response.status_code == 200
    statuses = [r["status"] for r in response.json()]
    assert statuses == ["SUCCEEDED", "FAILED"]


def test_run_output_download(client):
    ws = client.post("/workspaces", json={"name": "a"}).json()
    record = client.post("/run", json={
        "workspaceId": ws["id"],
        "scriptContent": 'save "hi" t1 > 3',
        "cases": [CASE],
    }).json()[0]
    url = f"/workspaces/{ws['id']}/{CASE_ENCODED}/{record['id']}/layers/hi"
    response = client.get(url)
    assert response.status_code == 200
    assert response.headers["content-type"] == "application/gzip"
    stored = (client.store.config.workspaces_root / ws["id"] / "runs"
              / CASE_ENCODED / record["id"] / "outputs" / "hi.nii.gz").read_bytes()
    assert response.content == stored

    assert client.get(
        f"/workspaces/{ws['id']}/{CASE_ENCODED}/{record['id']}/layers/nope"
    ).status_code == 404
    assert client.get(
        f"/workspaces/{ws['id']}/{CASE_ENCODED}/run-unknown/layers/hi"
    ).status_code == 404


def test_failed_run_has_no_output_route(client):
    ws = client.post("/workspaces", json={"name": "a"}).json()
    record = client.post("/run", json={
        "workspaceId": ws["id"],
        "scriptContent": 'save "x" t1',  # sort error
        "cases": [CASE],
    }).json()[0]
    assert record["status"] == "FAILED"
    url = f"/workspaces/{ws['id']}/{CASE_ENCODED}/{record['id']}/layers/x"
    assert client.get(url).status_code == 404


# Traversal fuzzing -----------------------------------------------------------------


TRAVERSAL_SEGMENTS = [
    "..", "%2e%2e", "..%2f..", "....//", "..\\..", "a/../b", "/etc/passwd",
    "C:boot.ini", "..%5c..", "%00", "a%00b", ".",
]


@pytest.mark.parametrize("segment", TRAVERSAL_SEGMENTS)
def test_traversal_segments_never_escape(client, segment):
    quoted = urllib.parse.quote(segment, safe="%")
    for url in (
        f"/datasets/{quoted}",
        f"/datasets/BraTS2019/cases/{quoted}/layers",
        f"/datasets/BraTS2019/cases/patient_001/layers/{quoted}",
        f"/scripts/{quoted}",
        f"/workspaces/{quoted}",
    ):
        response = client.get(url)
        if quoted in str(response.request.url):
            # Segment survived URL normalization: the server must reject it.
            assert response.status_code in (400, 404), (url, response.status_code)
        else:
            # The HTTP stack normalized the dot segment away before routing;
            # whatever route answered is a plain in-root route.
            assert response.status_code in (200, 400, 404)


def test_get_routes_are_side_effect_free(client):
    from test_store import tree_hash

    roots = [client.store.config.dataset_root, client.store.config.scripts_root,
             client.store.config.workspaces_root]
    before = [tree_hash(r) for r in roots]
    client.get("/datasets")
    client.get("/datasets/BraTS2019/cases")
    client.get("/datasets/BraTS2019/cases/patient_001/layers")
    client.get("/scripts")
    client.get("/workspaces")
    assert [tree_hash(r) for r in roots] == before


def test_errors_are_json_with_message(client):
    response = client.get("/datasets/Nope")
    assert response.status_code == 404
    assert "message" in response.json()
