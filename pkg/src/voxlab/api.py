"""REST surface over the store and engine.

Routes mirror the domain hierarchy (datasets/cases/layers, scripts,
workspaces, runs) and answer with 200/201 on success, 400 for malformed
requests, 404 for unknown resources, and 500 for internal faults. Every
path segment is screened against traversal before it can touch the
filesystem.
"""
from __future__ import annotations

import logging
from pathlib import Path
from typing import Any

from fastapi import FastAPI, Request, Response
from fastapi.concurrency import run_in_threadpool
from fastapi.responses import JSONResponse

from .engine import RunRecord, execute_run, run_output_file
from .store import (
    NotFoundError,
    StateValidationError,
    Store,
    StoreConfig,
    StoreError,
)

logger = logging.getLogger(__name__)


class ApiError(Exception):
    def __init__(self, status: int, message: str):
        super().__init__(message)
        self.status = status
        self.message = message


_FORBIDDEN_SEGMENT_PARTS = ("..", "/", "\\", "\x00")


def _check_segment(segment: str) -> str:
    """Reject traversal attempts in a single decoded path segment with a 400."""
    if not segment or segment in (".", ".."):
        raise ApiError(400, f"invalid path segment {segment!r}")
    if any(part in segment for part in _FORBIDDEN_SEGMENT_PARTS):
        raise ApiError(400, f"invalid path segment {segment!r}")
    if len(segment) > 2 and segment[1] == ":" and segment[0].isalpha():
        raise ApiError(400, f"invalid path segment {segment!r}")
    return segment


def _check_case_path(case_path: str) -> str:
    parts = case_path.split("/")
    if len(parts) != 2:
        raise ApiError(400, f"invalid case path {case_path!r}")
    for part in parts:
        _check_segment(part)
    return case_path


def _layer_media_type(path: Path) -> str:
    return "application/gzip" if path.name.endswith(".gz") else "application/octet-stream"


def create_app(store: Store | None = None, *, cors_origin: str | None = None) -> FastAPI:
    store = store or Store(StoreConfig.from_env())
    app = FastAPI(title="voxlab", docs_url=None, redoc_url=None)

    if cors_origin:
        from fastapi.middleware.cors import CORSMiddleware

        app.add_middleware(
            CORSMiddleware,
            allow_origins=[cors_origin] if cors_origin != "*" else ["*"],
            allow_methods=["*"],
            allow_headers=["*"],
        )

    @app.exception_handler(ApiError)
    async def handle_api_error(_request: Request, exc: ApiError):
        return JSONResponse(status_code=exc.status, content={"message": exc.message})

    @app.exception_handler(Exception)
    async def handle_internal_error(_request: Request, exc: Exception):
        logger.exception("internal error: %s", exc)
        return JSONResponse(status_code=500, content={"message": "internal error"})

    def run_404(exc: NotFoundError) -> ApiError:
        return ApiError(404, str(exc))

    # Datasets ----------------------------------------------------------------

    @app.get("/datasets")
    def list_datasets():
        try:
            return [{"name": d.name} for d in store.list_datasets()]
        except NotFoundError as exc:
            raise run_404(exc)
        except StoreError as exc:
            raise ApiError(500, str(exc))

    @app.get("/datasets/{dataset}")
    def get_dataset(dataset: str):
        _check_segment(dataset)
        try:
            return {"name": store.get_dataset(dataset).name}
        except NotFoundError as exc:
            raise run_404(exc)

    @app.get("/datasets/{dataset}/cases")
    def list_cases(dataset: str):
        _check_segment(dataset)
        try:
            return [{"name": c.name, "path": c.path} for c in store.list_cases(dataset)]
        except NotFoundError as exc:
            raise run_404(exc)

    @app.get("/datasets/{dataset}/cases/{case}/layers")
    def list_layers(dataset: str, case: str):
        _check_segment(dataset)
        _check_segment(case)
        try:
            layers = store.list_layers(f"{dataset}/{case}")
        except NotFoundError as exc:
            raise run_404(exc)
        return [{"name": l.name, "path": l.path} for l in layers]

    @app.get("/datasets/{dataset}/cases/{case}/layers/{layer}")
    def get_layer(dataset: str, case: str, layer: str):
        _check_segment(dataset)
        _check_segment(case)
        _check_segment(layer)
        try:
            path = store.layer_file(f"{dataset}/{case}", layer)
        except NotFoundError as exc:
            raise run_404(exc)
        return Response(content=path.read_bytes(), media_type=_layer_media_type(path))

    # Scripts -----------------------------------------------------------------

    @app.get("/scripts")
    def list_scripts():
        return [{"id": s.id, "name": s.name} for s in store.list_scripts()]

    @app.get("/scripts/{script}")
    def get_script(script: str):
        _check_segment(script)
        try:
            text = store.script_text(script)
        except NotFoundError as exc:
            raise run_404(exc)
        return Response(content=text, media_type="text/plain; charset=utf-8")

    # Workspaces ----------------------------------------------------------------

    @app.get("/workspaces")
    def list_workspaces():
        return [{"id": i, "name": n} for i, n in store.list_workspaces()]

    @app.post("/workspaces", status_code=201)
    async def create_workspace(request: Request):
        body = await _json_body(request)
        name = body.get("name")
        if not isinstance(name, str) or not name:
            raise ApiError(400, "missing field 'name'")
        source_id = body.get("sourceId")
        if source_id is not None and not isinstance(source_id, str):
            raise ApiError(400, "'sourceId' must be a string")
        try:
            workspace = store.create_workspace(name, source_id)
        except NotFoundError as exc:
            raise run_404(exc)
        return workspace.to_json()

    @app.get("/workspaces/{workspace_id}/runs")
    def list_runs(workspace_id: str):
        _check_segment(workspace_id)
        try:
            return store.list_run_records(workspace_id)
        except NotFoundError as exc:
            raise run_404(exc)

    @app.get("/workspaces/{workspace_id}")
    def get_workspace(workspace_id: str):
        _check_segment(workspace_id)
        try:
            return store.get_workspace(workspace_id).to_json()
        except NotFoundError as exc:
            raise run_404(exc)

    @app.put("/workspaces/{workspace_id}")
    async def update_workspace(workspace_id: str, request: Request):
        _check_segment(workspace_id)
        body = await _json_body(request)
        name = body.get("name")
        state = body.get("state")
        if name is None and state is None:
            raise ApiError(400, "nothing to update: provide 'name' and/or 'state'")
        if name is not None and not isinstance(name, str):
            raise ApiError(400, "'name' must be a string")
        try:
            store.update_workspace(workspace_id, name=name, state=state)
        except StateValidationError as exc:
            raise ApiError(400, f"invalid state: {exc}")
        except NotFoundError as exc:
            raise run_404(exc)
        return {"ok": True}

    @app.delete("/workspaces/{workspace_id}")
    def delete_workspace(workspace_id: str):
        _check_segment(workspace_id)
        try:
            store.delete_workspace(workspace_id)
        except NotFoundError as exc:
            raise run_404(exc)
        return {"ok": True}

    # Runs ----------------------------------------------------------------------

    @app.post("/run")
    async def run_script(request: Request):
        body = await _json_body(request)
        workspace_id = body.get("workspaceId")
        script_content = body.get("scriptContent")
        cases = body.get("cases")
        if not isinstance(workspace_id, str) or not workspace_id:
            raise ApiError(400, "missing field 'workspaceId'")
        if not isinstance(script_content, str):
            raise ApiError(400, "missing field 'scriptContent'")
        if not isinstance(cases, list) or not all(isinstance(c, str) for c in cases):
            raise ApiError(400, "missing field 'cases' (array of case paths)")
        for case_path in cases:
            _check_case_path(case_path)
        records: list[RunRecord] = []
        for case_path in cases:
            try:
                # Threadpool keeps long evaluations from stalling the event loop.
                record = await run_in_threadpool(
                    execute_run, store, workspace_id, case_path, script_content
                )
            except NotFoundError as exc:
                raise run_404(exc)
            records.append(record)
        return [record.to_json() for record in records]

    @app.get("/workspaces/{workspace_id}/{case_id:path}/{run_id}/layers/{layer}")
    def get_run_output(workspace_id: str, case_id: str, run_id: str, layer: str):
        _check_segment(workspace_id)
        _check_case_path(case_id)
        _check_segment(run_id)
        _check_segment(layer)
        try:
            path = run_output_file(store, workspace_id, case_id, run_id, layer)
        except NotFoundError as exc:
            raise run_404(exc)
        return Response(content=path.read_bytes(), media_type="application/gzip")

    return app


async def _json_body(request: Request) -> dict[str, Any]:
    try:
        body = await request.json()
    except Exception:
        raise ApiError(400, "request body must be JSON")
    if not isinstance(body, dict):
        raise ApiError(400, "request body must be a JSON object")
    return body
