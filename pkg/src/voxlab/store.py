"""Filesystem-backed data layer: datasets, example scripts, and workspaces.

Layout:

    <DATASET_PATH>/<dataset>/<case>/<layer>.nii[.gz]
    <SCRIPTS_PATH>/<name>.imgql
    <WORKSPACES_PATH>/<id>/meta.json          identity + provenance
    <WORKSPACES_PATH>/<id>/workspace.json     session state (atomic writes)
    <WORKSPACES_PATH>/<id>/runs/<case>/<run>/ run artifacts

Dataset layers are only ever referenced by relative path; derived run
outputs are owned by (and copied with) their workspace, so cloning never
creates dependencies between directories.
"""
from __future__ import annotations

import copy
import json
import logging
import os
import secrets
import shutil
import threading
import urllib.parse
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable

logger = logging.getLogger(__name__)

LINEAGE_MISSING = "<missing>"

ENV_DATASET_PATH = "DATASET_PATH"
ENV_SCRIPTS_PATH = "SCRIPTS_PATH"
ENV_WORKSPACES_PATH = "WORKSPACES_PATH"

_NII_SUFFIXES = (".nii.gz", ".nii")


class StoreError(Exception):
    pass


class NotFoundError(StoreError):
    pass


class StateValidationError(StoreError):
    def __init__(self, problems: list[str]):
        super().__init__("; ".join(problems))
        self.problems = problems


@dataclass(frozen=True)
class DatasetRef:
    name: str


@dataclass(frozen=True)
class CaseRef:
    name: str
    path: str  # "dataset/case"


@dataclass(frozen=True)
class LayerRef:
    name: str
    path: str  # relative to the dataset root


@dataclass(frozen=True)
class ScriptRef:
    id: str
    name: str


@dataclass
class Workspace:
    id: str
    name: str
    created_at: str
    source_id: str | None
    state: dict[str, Any]

    def to_json(self) -> dict[str, Any]:
        return {
            "id": self.id,
            "name": self.name,
            "createdAt": self.created_at,
            "sourceId": self.source_id,
            "state": self.state,
        }


@dataclass(frozen=True)
class StoreConfig:
    dataset_root: Path
    scripts_root: Path
    workspaces_root: Path

    @classmethod
    def from_env(cls, base: str = "./static") -> "StoreConfig":
        return cls(
            dataset_root=Path(os.environ.get(ENV_DATASET_PATH, f"{base}/datasets")),
            scripts_root=Path(os.environ.get(ENV_SCRIPTS_PATH, f"{base}/scripts")),
            workspaces_root=Path(os.environ.get(ENV_WORKSPACES_PATH, f"{base}/workspaces")),
        )


def encode_case_path(case_path: str) -> str:
    """Percent-encode a "dataset/case" path into a single URL/dirname segment."""
    return urllib.parse.quote(case_path, safe="")


def decode_case_path(segment: str) -> str:
    return urllib.parse.unquote(segment)


def default_state() -> dict[str, Any]:
    return {
        "data": {
            "openedDatasetsNames": [],
            "openedCasesPaths": [],
            "openedRunsIds": [],
        },
        "lastGlobalStylesByLayerName": {},
        "datasetLayersState": {
            "openedLayersPathsByCasePath": {},
            "stylesByLayerName": {},
        },
        "runsLayersStates": {},
        "ui": {
            "isDarkMode": False,
            "sidebars": {"navigation": True, "layers": True, "scriptEditor": True},
            "fullscreenCasePath": None,
            "layerContext": "dataset",
            "scriptEditor": {"content": ""},
        },
    }


# State schema validation ------------------------------------------------------
#
# Hand-rolled on purpose: unknown fields must survive a round trip, so the
# validator only checks what it knows about and leaves the rest alone.


def _is_relative_path(value: str) -> bool:
    if not value or value.startswith("/") or "\\" in value:
        return False
    return all(part not in ("", "..", ".") for part in value.split("/"))


def _check_style(style: Any, where: str, problems: list[str]) -> None:
    if not isinstance(style, dict):
        problems.append(f"{where}: style must be an object")
        return
    colormap = style.get("colormap")
    if colormap is not None and not isinstance(colormap, str):
        problems.append(f"{where}.colormap: must be a string")
    opacity = style.get("opacity")
    if opacity is not None:
        if not isinstance(opacity, (int, float)) or isinstance(opacity, bool):
            problems.append(f"{where}.opacity: must be a number")
        elif not 0.0 <= float(opacity) <= 1.0:
            problems.append(f"{where}.opacity: {opacity} outside [0, 1]")
    visible = style.get("visible")
    if visible is not None and not isinstance(visible, bool):
        problems.append(f"{where}.visible: must be a boolean")


def _check_layers_state(value: Any, where: str, problems: list[str]) -> None:
    if not isinstance(value, dict):
        problems.append(f"{where}: must be an object")
        return
    opened = value.get("openedLayersPathsByCasePath", {})
    if not isinstance(opened, dict):
        problems.append(f"{where}.openedLayersPathsByCasePath: must be an object")
    else:
        for case_path, layer_paths in opened.items():
            if not _is_relative_path(case_path):
                problems.append(f"{where}: case path {case_path!r} not relative/normalized")
            if not isinstance(layer_paths, list) or not all(
                isinstance(p, str) and _is_relative_path(p) for p in layer_paths
            ):
                problems.append(f"{where}[{case_path!r}]: layer paths must be relative")
    styles = value.get("stylesByLayerName", {})
    if not isinstance(styles, dict):
        problems.append(f"{where}.stylesByLayerName: must be an object")
    else:
        for name, style in styles.items():
            _check_style(style, f"{where}.stylesByLayerName[{name!r}]", problems)


def validate_state(state: Any) -> list[str]:
    """Schema problems in a workspace state; empty means valid."""
    problems: list[str] = []
    if not isinstance(state, dict):
        return ["state must be an object"]

    data = state.get("data", {})
    if not isinstance(data, dict):
        problems.append("data: must be an object")
    else:
        for key in ("openedDatasetsNames", "openedCasesPaths", "openedRunsIds"):
            value = data.get(key, [])
            if not isinstance(value, list) or not all(isinstance(v, str) for v in value):
                problems.append(f"data.{key}: must be a list of strings")
        for case_path in data.get("openedCasesPaths", []) or []:
            if isinstance(case_path, str) and not _is_relative_path(case_path):
                problems.append(f"data.openedCasesPaths: {case_path!r} not relative/normalized")

    styles = state.get("lastGlobalStylesByLayerName", {})
    if not isinstance(styles, dict):
        problems.append("lastGlobalStylesByLayerName: must be an object")
    else:
        for name, style in styles.items():
            _check_style(style, f"lastGlobalStylesByLayerName[{name!r}]", problems)

    if "datasetLayersState" in state:
        _check_layers_state(state["datasetLayersState"], "datasetLayersState", problems)

    runs_states = state.get("runsLayersStates", {})
    if not isinstance(runs_states, dict):
        problems.append("runsLayersStates: must be an object")
    else:
        for run_id, value in runs_states.items():
            _check_layers_state(value, f"runsLayersStates[{run_id!r}]", problems)

    ui = state.get("ui", {})
    if not isinstance(ui, dict):
        problems.append("ui: must be an object")
    else:
        if "isDarkMode" in ui and not isinstance(ui["isDarkMode"], bool):
            problems.append("ui.isDarkMode: must be a boolean")
        context = ui.get("layerContext")
        if context is not None and context not in ("dataset", "run"):
            problems.append(f"ui.layerContext: {context!r} not one of 'dataset', 'run'")
        fullscreen = ui.get("fullscreenCasePath")
        if fullscreen is not None and not (
            isinstance(fullscreen, str) and _is_relative_path(fullscreen)
        ):
            problems.append("ui.fullscreenCasePath: must be null or a relative path")
        sidebars = ui.get("sidebars", {})
        if not isinstance(sidebars, dict) or not all(
            isinstance(v, bool) for v in sidebars.values()
        ):
            problems.append("ui.sidebars: must be an object of booleans")
        editor = ui.get("scriptEditor", {})
        if not isinstance(editor, dict) or (
            "content" in editor and not isinstance(editor["content"], str)
        ):
            problems.append("ui.scriptEditor.content: must be a string")
    return problems


# Store ------------------------------------------------------------------------

FaultHook = Callable[[str], None]

_SAVE_STEPS = ("open", "write", "flush", "fsync", "rename")


def layer_name_of(filename: str) -> str | None:
    """Stem before .nii/.nii.gz, or None when the file is not a layer."""
    for suffix in _NII_SUFFIXES:
        if filename.endswith(suffix):
            return filename[: -len(suffix)]
    return None


class Store:
    """All filesystem access for the service, with one lock per workspace."""

    def __init__(self, config: StoreConfig):
        self.config = config
        self._locks: dict[str, threading.Lock] = {}
        self._locks_guard = threading.Lock()

    # Locks

    def workspace_lock(self, workspace_id: str) -> threading.Lock:
        with self._locks_guard:
            lock = self._locks.get(workspace_id)
            if lock is None:
                lock = self._locks.setdefault(workspace_id, threading.Lock())
            return lock

    # Dataset discovery (read-only)

    def list_datasets(self) -> list[DatasetRef]:
        root = self.config.dataset_root
        if not root.is_dir():
            raise StoreError(f"dataset root {root} is not a readable directory")
        return [DatasetRef(p.name) for p in sorted(root.iterdir()) if p.is_dir()]

    def get_dataset(self, dataset: str) -> DatasetRef:
        path = self._dataset_dir(dataset)
        if not path.is_dir():
            raise NotFoundError(f"unknown dataset {dataset!r}")
        return DatasetRef(dataset)

    def list_cases(self, dataset: str) -> list[CaseRef]:
        base = self._dataset_dir(dataset)
        if not base.is_dir():
            raise NotFoundError(f"unknown dataset {dataset!r}")
        return [
            CaseRef(p.name, f"{dataset}/{p.name}")
            for p in sorted(base.iterdir())
            if p.is_dir()
        ]

    def list_layers(self, case_path: str) -> list[LayerRef]:
        base = self.case_dir(case_path)
        layers = []
        for p in sorted(base.iterdir()):
            if not p.is_file():
                continue
            name = layer_name_of(p.name)
            if name is not None:
                layers.append(LayerRef(name, f"{case_path}/{p.name}"))
        return layers

    def case_dir(self, case_path: str) -> Path:
        parts = case_path.split("/")
        if len(parts) != 2 or not all(self._safe_segment(p) for p in parts):
            raise NotFoundError(f"unknown case {case_path!r}")
        base = self.config.dataset_root / parts[0] / parts[1]
        if not base.is_dir():
            raise NotFoundError(f"unknown case {case_path!r}")
        return base

    def layer_file(self, case_path: str, layer_name: str) -> Path:
        for layer in self.list_layers(case_path):
            if layer.name == layer_name:
                return self.config.dataset_root / layer.path
        raise NotFoundError(f"unknown layer {layer_name!r} in case {case_path!r}")

    @staticmethod
    def _safe_segment(segment: str) -> bool:
        return bool(segment) and segment not in (".", "..") and "/" not in segment \
            and "\\" not in segment and "\x00" not in segment

    def _dataset_dir(self, dataset: str) -> Path:
        if not self._safe_segment(dataset):
            raise NotFoundError(f"unknown dataset {dataset!r}")
        return self.config.dataset_root / dataset

    # Example scripts

    def list_scripts(self) -> list[ScriptRef]:
        root = self.config.scripts_root
        if not root.is_dir():
            return []
        return [
            ScriptRef(p.stem, p.stem.replace("_", " "))
            for p in sorted(root.glob("*.imgql"))
            if p.is_file()
        ]

    def script_text(self, script_id: str) -> str:
        if not self._safe_segment(script_id):
            raise NotFoundError(f"unknown script {script_id!r}")
        path = self.config.scripts_root / f"{script_id}.imgql"
        if not path.is_file():
            raise NotFoundError(f"unknown script {script_id!r}")
        return path.read_text(encoding="utf-8")

    def import_resolver(self) -> Callable[[str], str | None]:
        """Resolver for script imports, confined to the scripts directory."""
        from .imgql import resolve_inside
        from .imgql.analysis import SandboxViolation

        def resolve(path: str) -> str | None:
            try:
                target = resolve_inside(self.config.scripts_root, path)
            except SandboxViolation:
                return None
            if not target.is_file():
                return None
            return target.read_text(encoding="utf-8")

        return resolve

    # Workspace lifecycle

    def _workspace_dir(self, workspace_id: str) -> Path:
        if not self._safe_segment(workspace_id):
            raise NotFoundError(f"unknown workspace {workspace_id!r}")
        return self.config.workspaces_root / workspace_id

    def _require_workspace_dir(self, workspace_id: str) -> Path:
        path = self._workspace_dir(workspace_id)
        if not (path / "meta.json").is_file():
            raise NotFoundError(f"unknown workspace {workspace_id!r}")
        return path

    def create_workspace(self, name: str, source_id: str | None = None,
                         now: Callable[[], str] | None = None) -> Workspace:
        """Create a fresh workspace, or clone one including its run outputs."""
        source_dir = None
        source_state: dict[str, Any] | None = None
        if source_id is not None:
            source_dir = self._require_workspace_dir(source_id)
            source_state = self._read_state(source_dir)

        root = self.config.workspaces_root
        root.mkdir(parents=True, exist_ok=True)
        for _ in range(16):
            workspace_id = secrets.token_urlsafe(9)  # 12 URL-safe chars
            target = root / workspace_id
            try:
                target.mkdir()
            except FileExistsError:
                continue
            break
        else:
            raise StoreError("could not allocate a workspace id")

        created_at = (now or _utc_now_iso)()
        state = copy.deepcopy(source_state) if source_state is not None else default_state()
        workspace = Workspace(
            id=workspace_id,
            name=name,
            created_at=created_at,
            source_id=source_id,
            state=state,
        )
        _write_json(target / "meta.json", {
            "id": workspace.id,
            "name": workspace.name,
            "createdAt": workspace.created_at,
            "sourceId": workspace.source_id,
        })
        self.save_workspace_state(workspace_id, state)
        if source_dir is not None and (source_dir / "runs").is_dir():
            # Derived layers are owned per workspace: clones copy them.
            shutil.copytree(source_dir / "runs", target / "runs")
        return workspace

    def get_workspace(self, workspace_id: str) -> Workspace:
        path = self._require_workspace_dir(workspace_id)
        meta = _read_json(path / "meta.json")
        return Workspace(
            id=meta["id"],
            name=meta.get("name", ""),
            created_at=meta.get("createdAt", ""),
            source_id=meta.get("sourceId"),
            state=self._read_state(path),
        )

    def _read_state(self, workspace_dir: Path) -> dict[str, Any]:
        state_file = workspace_dir / "workspace.json"
        if not state_file.is_file():
            return default_state()
        return _read_json(state_file)

    def save_workspace_state(self, workspace_id: str, state: dict[str, Any],
                             fault_hook: FaultHook | None = None) -> None:
        """Atomically replace ``workspace.json``.

        The new state lands in a uniquely named temp file in the same
        directory, is flushed and fsynced, then renamed over the target, so
        a reader observes either the old or the new state, never a blend.
        ``fault_hook`` is called around each I/O step (steps: open, write,
        flush, fsync, rename, done) and may raise to simulate a crash.
        """
        problems = validate_state(state)
        if problems:
            raise StateValidationError(problems)
        target_dir = self._workspace_dir(workspace_id)
        if not target_dir.is_dir():
            raise NotFoundError(f"unknown workspace {workspace_id!r}")
        hook = fault_hook or (lambda step: None)
        payload = json.dumps(state, indent=2, sort_keys=True)
        tmp_path = target_dir / f"workspace.json.tmp-{secrets.token_hex(6)}"
        try:
            hook("open")
            with open(tmp_path, "w", encoding="utf-8") as fh:
                hook("write")
                fh.write(payload)
                hook("flush")
                fh.flush()
                hook("fsync")
                os.fsync(fh.fileno())
            hook("rename")
            os.replace(tmp_path, target_dir / "workspace.json")
            hook("done")
        finally:
            if tmp_path.exists():
                try:
                    tmp_path.unlink()
                except OSError:
                    pass

    def update_workspace(self, workspace_id: str, name: str | None = None,
                         state: dict[str, Any] | None = None) -> Workspace:
        path = self._require_workspace_dir(workspace_id)
        with self.workspace_lock(workspace_id):
            if state is not None:
                self.save_workspace_state(workspace_id, state)
            if name is not None:
                meta = _read_json(path / "meta.json")
                meta["name"] = name
                _write_json(path / "meta.json", meta)
        return self.get_workspace(workspace_id)

    def delete_workspace(self, workspace_id: str) -> None:
        path = self._require_workspace_dir(workspace_id)
        shutil.rmtree(path)

    def list_workspaces(self) -> list[tuple[str, str]]:
        """(id, name) pairs only; never loads state files."""
        root = self.config.workspaces_root
        if not root.is_dir():
            return []
        out = []
        for path in sorted(root.iterdir()):
            meta_file = path / "meta.json"
            if not meta_file.is_file():
                continue
            try:
                meta = _read_json(meta_file)
            except (OSError, json.JSONDecodeError):
                logger.warning("skipping workspace with unreadable meta: %s", path.name)
                continue
            out.append((meta.get("id", path.name), meta.get("name", "")))
        return out

    def lineage(self, workspace_id: str) -> list[str]:
        """Provenance chain from this workspace back to its root.

        A deleted ancestor still appears by id (its child's meta records it),
        but the chain past it cannot be followed, so it is terminated with a
        marker entry. Cycles are impossible to create through cloning but the
        walk is bounded anyway.
        """
        self._require_workspace_dir(workspace_id)
        chain = [workspace_id]
        seen = {workspace_id}
        current = workspace_id
        limit = len(list(self.config.workspaces_root.iterdir())) + 1
        for _ in range(limit):
            meta_file = self._workspace_dir(current) / "meta.json"
            if not meta_file.is_file():
                chain.append(LINEAGE_MISSING)
                break
            source = _read_json(meta_file).get("sourceId")
            if source is None or source in seen:
                break
            chain.append(source)
            seen.add(source)
            current = source
        return chain

    # Runs

    def runs_root(self, workspace_id: str) -> Path:
        return self._require_workspace_dir(workspace_id) / "runs"

    def allocate_run_dir(self, workspace_id: str, case_path: str, run_id: str) -> Path:
        run_dir = self.runs_root(workspace_id) / encode_case_path(case_path) / run_id
        if run_dir.exists():
            raise FileExistsError(run_dir)
        run_dir.mkdir(parents=True)
        return run_dir

    def run_dir(self, workspace_id: str, case_path: str, run_id: str) -> Path:
        if not self._safe_segment(run_id):
            raise NotFoundError(f"unknown run {run_id!r}")
        path = self.runs_root(workspace_id) / encode_case_path(case_path) / run_id
        if not path.is_dir():
            raise NotFoundError(f"unknown run {run_id!r}")
        return path

    def list_run_records(self, workspace_id: str) -> list[dict[str, Any]]:
        """All run.json payloads for a workspace, timestamp-sorted.

        Corrupt records are skipped with a warning rather than failing the
        listing.
        """
        root = self.runs_root(workspace_id)
        records = []
        if root.is_dir():
            for record_file in root.glob("*/*/run.json"):
                try:
                    records.append(_read_json(record_file))
                except (OSError, json.JSONDecodeError) as exc:
                    logger.warning("skipping corrupt run record %s: %s", record_file, exc)
        records.sort(key=lambda r: (r.get("timestamp", ""), r.get("id", "")))
        return records


def _utc_now_iso() -> str:
    import datetime

    return datetime.datetime.now(datetime.timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")


def _read_json(path: Path) -> dict[str, Any]:
    with open(path, "r", encoding="utf-8") as fh:
        return json.load(fh)


def _write_json(path: Path, payload: dict[str, Any]) -> None:
    path.write_text(json.dumps(payload, indent=2, sort_keys=True), encoding="utf-8")
