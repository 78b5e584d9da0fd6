"""Store behavior: discovery, workspace lifecycle, atomicity, provenance."""
import hashlib
import json
from pathlib import Path

import pytest

from voxlab.store import (
    LINEAGE_MISSING,
    NotFoundError,
    StateValidationError,
    Store,
    StoreConfig,
    decode_case_path,
    default_state,
    encode_case_path,
    validate_state,
)

from conftest import make_dataset_tree


def tree_hash(root: Path) -> str:
    """Content hash of a directory tree (paths + bytes)."""
    digest = hashlib.sha256()
    for path in sorted(root.rglob("*")):
        digest.update(str(path.relative_to(root)).encode())
        if path.is_file():
            digest.update(path.read_bytes())
    return digest.hexdigest()


# Discovery ---------------------------------------------------------------------


def test_list_datasets(fixture_store):
    assert [d.name for d in fixture_store.list_datasets()] == ["BraTS2019"]


def test_list_datasets_empty_root(tmp_path):
    (tmp_path / "empty").mkdir()
    store = Store(StoreConfig(tmp_path / "empty", tmp_path / "s", tmp_path / "w"))
    assert store.list_datasets() == []


def test_list_datasets_ignores_stray_files(tmp_path):
    root = tmp_path / "datasets"
    root.mkdir()
    (root / "README.txt").write_text("stray")
    (root / "DS").mkdir()
    store = Store(StoreConfig(root, tmp_path / "s", tmp_path / "w"))
    assert [d.name for d in store.list_datasets()] == ["DS"]


def test_list_cases(fixture_store):
    cases = fixture_store.list_cases("BraTS2019")
    assert [(c.name, c.path) for c in cases] == [
        ("patient_001", "BraTS2019/patient_001"),
        ("patient_002", "BraTS2019/patient_002"),
    ]


def test_list_layers_ignores_non_nii(fixture_store):
    layers = fixture_store.list_layers("BraTS2019/patient_001")
    assert [l.name for l in layers] == ["seg", "t1"]
    assert layers[1].path == "BraTS2019/patient_001/t1.nii.gz"


def test_unknown_dataset_and_case(fixture_store):
    with pytest.raises(NotFoundError):
        fixture_store.list_cases("Nope")
    with pytest.raises(NotFoundError):
        fixture_store.list_layers("BraTS2019/patient_404")
    with pytest.raises(NotFoundError):
        fixture_store.layer_file("BraTS2019/patient_001", "missing")


def test_discovery_is_read_only(fixture_store):
    before = tree_hash(fixture_store.config.dataset_root)
    fixture_store.list_datasets()
    fixture_store.list_cases("BraTS2019")
    fixture_store.list_layers("BraTS2019/patient_001")
    assert tree_hash(fixture_store.config.dataset_root) == before


def test_case_path_encoding_round_trip():
    path = "BraTS2019/patient_001"
    encoded = encode_case_path(path)
    assert "/" not in encoded
    assert decode_case_path(encoded) == path


# Scripts ------------------------------------------------------------------------


def test_list_scripts(fixture_store):
    scripts = fixture_store.list_scripts()
    assert [(s.id, s.name) for s in scripts] == [
        ("self_dice", "self dice"),
        ("threshold", "threshold"),
    ]
    assert "bright" in fixture_store.script_text("threshold")
    with pytest.raises(NotFoundError):
        fixture_store.script_text("missing")


# Workspace lifecycle ---------------------------------------------------------------


def test_create_and_get_workspace(fixture_store):
    ws = fixture_store.create_workspace("a")
    assert len(ws.id) >= 12
    assert ws.state["data"]["openedDatasetsNames"] == []
    got = fixture_store.get_workspace(ws.id)
    assert got.name == "a"
    assert got.state == ws.state
    assert got.source_id is None


def test_list_workspaces_reads_meta_only(fixture_store):
    ws = fixture_store.create_workspace("a")
    # Corrupt the state file: listing must still work since it never reads it.
    state_file = fixture_store.config.workspaces_root / ws.id / "workspace.json"
    state_file.write_text("{ not json")
    assert (ws.id, "a") in fixture_store.list_workspaces()


def test_get_after_delete(fixture_store):
    ws = fixture_store.create_workspace("gone")
    fixture_store.delete_workspace(ws.id)
    with pytest.raises(NotFoundError):
        fixture_store.get_workspace(ws.id)
    with pytest.raises(NotFoundError):
        fixture_store.delete_workspace(ws.id)


def test_update_name_and_state(fixture_store):
    ws = fixture_store.create_workspace("old")
    state = default_state()
    state["ui"]["isDarkMode"] = True
    updated = fixture_store.update_workspace(ws.id, name="new", state=state)
    assert updated.name == "new"
    assert updated.state["ui"]["isDarkMode"] is True


def test_save_round_trip_preserves_unknown_fields(fixture_store):
    ws = fixture_store.create_workspace("a")
    state = default_state()
    state["futureFeature"] = {"nested": [1, 2, 3]}
    fixture_store.save_workspace_state(ws.id, state)
    assert fixture_store.get_workspace(ws.id).state["futureFeature"] == {"nested": [1, 2, 3]}


def test_save_rejects_invalid_state(fixture_store):
    ws = fixture_store.create_workspace("a")
    good = default_state()
    fixture_store.save_workspace_state(ws.id, good)
    bad = default_state()
    bad["lastGlobalStylesByLayerName"] = {"t1": {"opacity": 1.5}}
    with pytest.raises(StateValidationError):
        fixture_store.save_workspace_state(ws.id, bad)
    # File untouched by the failed save.
    assert fixture_store.get_workspace(ws.id).state == good


def test_validate_state_rules():
    assert validate_state(default_state()) == []
    assert validate_state("nope")
    assert validate_state({"ui": {"layerContext": "weird"}})
    assert validate_state({"data": {"openedCasesPaths": ["../evil"]}})
    assert validate_state({"ui": {"isDarkMode": "yes"}})
    state = default_state()
    state["runsLayersStates"] = {"run-1": {"openedLayersPathsByCasePath": {"d/c": ["x.nii"]},
                                           "stylesByLayerName": {"x": {"opacity": 0.5}}}}
    assert validate_state(state) == []


# Atomicity ---------------------------------------------------------------------


class Boom(RuntimeError):
    pass


@pytest.mark.parametrize("fail_at", ["open", "write", "flush", "fsync", "rename", "done"])
def test_interrupted_save_preserves_old_or_new(fixture_store, fail_at):
    ws = fixture_store.create_workspace("a")
    old = default_state()
    old["ui"]["scriptEditor"] = {"content": "old"}
    fixture_store.save_workspace_state(ws.id, old)

    new = default_state()
    new["ui"]["scriptEditor"] = {"content": "new"}

    def hook(step):
        if step == fail_at:
            raise Boom(step)

    with pytest.raises(Boom):
        fixture_store.save_workspace_state(ws.id, new, fault_hook=hook)

    reloaded = fixture_store.get_workspace(ws.id).state
    assert reloaded in (old, new)
    if fail_at != "done":
        assert reloaded == old
    # No temp litter.
    ws_dir = fixture_store.config.workspaces_root / ws.id
    assert not list(ws_dir.glob("workspace.json.tmp-*"))


# Clones -------------------------------------------------------------------------


def _workspace_with_run(store) -> str:
    from voxlab.engine import execute_run

    ws = store.create_workspace("parent")
    record = execute_run(store, ws.id, "BraTS2019/patient_001", 'save "hi" t1 > 3')
    assert record.status == "SUCCEEDED"
    return ws.id


def test_clone_copies_runs_and_leaves_source_untouched(fixture_store):
    parent_id = _workspace_with_run(fixture_store)
    parent_dir = fixture_store.config.workspaces_root / parent_id
    before = tree_hash(parent_dir)
    before_state = hashlib.sha256((parent_dir / "workspace.json").read_bytes()).hexdigest()

    clone = fixture_store.create_workspace("clone", source_id=parent_id)
    assert clone.source_id == parent_id
    clone_dir = fixture_store.config.workspaces_root / clone.id
    assert (clone_dir / "runs").is_dir()
    cloned_runs = list((clone_dir / "runs").rglob("run.json"))
    assert cloned_runs, "clone owns its own copy of run outputs"

    assert tree_hash(parent_dir) == before
    after_state = hashlib.sha256((parent_dir / "workspace.json").read_bytes()).hexdigest()
    assert after_state == before_state

    # Mutating the clone must not touch the parent.
    state = fixture_store.get_workspace(clone.id).state
    state["ui"]["isDarkMode"] = True
    fixture_store.save_workspace_state(clone.id, state)
    for run_file in cloned_runs:
        run_file.write_text("{}")
    fixture_store.delete_workspace(clone.id)
    assert tree_hash(parent_dir) == before


def test_clone_of_missing_source(fixture_store):
    with pytest.raises(NotFoundError):
        fixture_store.create_workspace("x", source_id="nope-nope-nope")


def test_delete_clone_keeps_parent(fixture_store):
    parent = fixture_store.create_workspace("p")
    clone = fixture_store.create_workspace("c", source_id=parent.id)
    parent_dir = fixture_store.config.workspaces_root / parent.id
    before = tree_hash(parent_dir)
    fixture_store.delete_workspace(clone.id)
    assert tree_hash(parent_dir) == before
    assert fixture_store.get_workspace(parent.id).name == "p"


# Lineage ------------------------------------------------------------------------


def test_lineage_chains(fixture_store):
    root = fixture_store.create_workspace("root")
    c1 = fixture_store.create_workspace("c1", source_id=root.id)
    c2 = fixture_store.create_workspace("c2", source_id=c1.id)
    assert fixture_store.lineage(root.id) == [root.id]
    assert fixture_store.lineage(c2.id) == [c2.id, c1.id, root.id]


def test_lineage_with_deleted_ancestor(fixture_store):
    # The deleted ancestor's id is still known from c2's meta; the chain
    # beyond it is not, so the marker terminates it.
    root = fixture_store.create_workspace("root")
    c1 = fixture_store.create_workspace("c1", source_id=root.id)
    c2 = fixture_store.create_workspace("c2", source_id=c1.id)
    fixture_store.delete_workspace(c1.id)
    assert fixture_store.lineage(c2.id) == [c2.id, c1.id, LINEAGE_MISSING]


def test_lineage_unknown_start(fixture_store):
    with pytest.raises(NotFoundError):
        fixture_store.lineage("missing-id")


# Runs listing ----------------------------------------------------------------------


def test_list_runs_empty(fixture_store):
    ws = fixture_store.create_workspace("a")
    assert fixture_store.list_run_records(ws.id) == []


def test_list_runs_returns_record(fixture_store):
    ws_id = _workspace_with_run(fixture_store)
    records = fixture_store.list_run_records(ws_id)
    assert len(records) == 1
    assert records[0]["status"] == "SUCCEEDED"


def test_list_runs_skips_corrupt_records(fixture_store, caplog):
    ws_id = _workspace_with_run(fixture_store)
    runs_root = fixture_store.config.workspaces_root / ws_id / "runs"
    bad_dir = next(iter(runs_root.iterdir())) / "run-bogus"
    bad_dir.mkdir()
    (bad_dir / "run.json").write_text("{ corrupt")
    with caplog.at_level("WARNING"):
        records = fixture_store.list_run_records(ws_id)
    assert len(records) == 1
    assert any("corrupt" in message for message in caplog.messages)
