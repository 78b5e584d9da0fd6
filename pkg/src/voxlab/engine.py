"""Script execution: bind case layers, build the voxel model, evaluate, persist.

A run compiles the query script down to formulas over threshold atoms, checks
them against a face-connected voxel space, and records everything under the
workspace's run directory:

    runs/<encoded case path>/<run id>/
        script.imgql   effective script (generated header + user text)
        run.json       the run record
        log.txt        per-statement timing or failure diagnostics
        outputs/       one <label>.nii.gz per save statement (successes only)

Failures of any stage (parse, types, sandbox, I/O, geometry) surface as a
FAILED record with diagnostics in the log and no output files.
"""
from __future__ import annotations

import datetime
import os
import random
import shutil
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable

from . import logic
from .imgql import (
    BoolLit,
    Call,
    Compare,
    Diagnostic,
    Expr,
    LoadStmt,
    Name,
    NotExpr,
    AndExpr,
    OrExpr,
    NumberLit,
    PrintStmt,
    SaveStmt,
    expand,
    generate_header,
    parse,
    typecheck,
    validate_sandbox,
)
from .imgql.analysis import SandboxViolation, resolve_inside
from .nifti import NiftiError, read_nifti, write_nifti
from .pointset import PointSet
from .space import Connectivity, GridSpace, GridSpec
from .store import NotFoundError, Store, encode_case_path
from .volumes import (
    BinaryMask,
    ThresholdOp,
    VoxelVolume,
    dice,
    mask_stats,
    mask_to_volume,
    pointset_to_mask,
    threshold,
)

STATUS_SUCCEEDED = "SUCCEEDED"
STATUS_FAILED = "FAILED"

_RUN_ID_RNG = random.Random(f"{os.getpid()}-{time.time_ns()}")

_CMP_OPS = {
    ">": ThresholdOp.GT,
    ">=": ThresholdOp.GE,
    "<": ThresholdOp.LT,
    "<=": ThresholdOp.LE,
}


@dataclass
class RunRecord:
    id: str
    workspace_id: str
    case_path: str
    timestamp: str
    script_text: str
    status: str
    print_outputs: list[tuple[str, float]] = field(default_factory=list)
    output_layers: list[tuple[str, str]] = field(default_factory=list)
    log: str = ""

    def to_json(self) -> dict[str, Any]:
        return {
            "id": self.id,
            "workspaceId": self.workspace_id,
            "casePath": self.case_path,
            "timestamp": self.timestamp,
            "scriptText": self.script_text,
            "status": self.status,
            "printOutputs": [[label, value] for label, value in self.print_outputs],
            "outputLayers": [[label, path] for label, path in self.output_layers],
            "log": self.log,
        }

    @classmethod
    def from_json(cls, payload: dict[str, Any]) -> "RunRecord":
        return cls(
            id=payload["id"],
            workspace_id=payload.get("workspaceId", ""),
            case_path=payload.get("casePath", ""),
            timestamp=payload.get("timestamp", ""),
            script_text=payload.get("scriptText", ""),
            status=payload.get("status", STATUS_FAILED),
            print_outputs=[(l, v) for l, v in payload.get("printOutputs", [])],
            output_layers=[(l, p) for l, p in payload.get("outputLayers", [])],
            log=payload.get("log", ""),
        )


def new_run_id(now: datetime.datetime | None = None) -> str:
    stamp = (now or datetime.datetime.now(datetime.timezone.utc)).strftime("%Y%m%dT%H%M%SZ")
    return f"run-{stamp}-{_RUN_ID_RNG.getrandbits(24):06x}"


class RunFailure(Exception):
    """Internal control flow: aborts evaluation with diagnostics for the log."""

    def __init__(self, lines: list[str]):
        super().__init__("; ".join(lines))
        self.lines = lines


class _Evaluator:
    """Compile expressions to formulas over threshold atoms and check them."""

    def __init__(self, load_volume: Callable[[str], VoxelVolume]):
        self._load_volume = load_volume
        self._volumes: dict[str, VoxelVolume] = {}
        self._atoms: dict[str, PointSet] = {}
        self._model: logic.ClosureModel | None = None
        self._memo: dict[logic.Formula, PointSet] = {}
        self.notes: list[str] = []

    def _volume(self, name: str) -> VoxelVolume:
        volume = self._volumes.get(name)
        if volume is None:
            volume = self._load_volume(name)
            if self._volumes:
                reference = next(iter(self._volumes.values()))
                if volume.dims != reference.dims:
                    raise RunFailure([
                        f"layer {name!r} has dims {volume.dims}, "
                        f"other layers have {reference.dims}"
                    ])
            self._volumes[name] = volume
        return volume

    def _require_model(self) -> logic.ClosureModel:
        if self._model is None:
            if not self._volumes:
                raise RunFailure([
                    "script references no layers; image geometry is undetermined"
                ])
            reference = next(iter(self._volumes.values()))
            space = GridSpace(GridSpec(
                dims=reference.dims,
                spacing=reference.spacing,
                connectivity=Connectivity.FACE6,
            ))
            self._model = logic.ClosureModel(space, self._atoms)
        return self._model

    @property
    def dims(self) -> tuple[int, int, int]:
        return next(iter(self._volumes.values())).dims

    @property
    def spacing(self) -> tuple[float, float, float]:
        return next(iter(self._volumes.values())).spacing

    def _atom_for(self, e: Compare) -> logic.Formula:
        if not isinstance(e.operand, Name):
            raise RunFailure(["comparison operand must be a loaded layer"])
        volume = self._volume(e.operand.name)
        atom_name = f"{e.operand.name}{e.op}{e.value.text}"
        if atom_name not in self._atoms:
            mask = threshold(volume, _CMP_OPS[e.op], e.value.value)
            self._atoms[atom_name] = mask.points
        return logic.Atom(atom_name)

    def formula(self, e: Expr) -> logic.Formula:
        if isinstance(e, BoolLit):
            return logic.TRUE if e.value else logic.FALSE
        if isinstance(e, Compare):
            return self._atom_for(e)
        if isinstance(e, NotExpr):
            return logic.Not(self.formula(e.operand))
        if isinstance(e, AndExpr):
            return logic.And(self.formula(e.left), self.formula(e.right))
        if isinstance(e, OrExpr):
            return logic.or_(self.formula(e.left), self.formula(e.right))
        if isinstance(e, Call):
            if e.name == "through":
                return logic.ForwardReach(self.formula(e.args[0]), self.formula(e.args[1]))
            if e.name == "reachedBy":
                return logic.BackwardReach(self.formula(e.args[0]), self.formula(e.args[1]))
            if e.name == "near":
                return logic.Near(self.formula(e.args[0]))
            if e.name == "interior":
                return logic.interior(self.formula(e.args[0]))
        raise RunFailure([f"expression cannot be evaluated as an image: {e!r}"])

    def mask(self, e: Expr) -> BinaryMask:
        f = self.formula(e)
        model = self._require_model()
        # The valuation grows as atoms appear; rebuild the model view so the
        # checker sees them (the space itself is reused).
        model = logic.ClosureModel(model.space, dict(self._atoms))
        points = logic.check(model, f, self._memo)
        return pointset_to_mask(self.dims, points)

    def number(self, e: Expr) -> float:
        if isinstance(e, NumberLit):
            return e.value
        if isinstance(e, Call) and e.name == "dice":
            x = self.mask(e.args[0])
            y = self.mask(e.args[1])
            if x.count() == 0 and y.count() == 0:
                self.notes.append("note: dice of two empty masks defined as 1.0")
            return dice(x, y)
        if isinstance(e, Call) and e.name == "volume":
            mask = self.mask(e.args[0])
            return mask_stats(mask, self.spacing).volume_mm3
        raise RunFailure([f"expression cannot be evaluated as a number: {e!r}"])


def execute_script(
    *,
    case_layers: list[tuple[str, str]],
    layer_file: Callable[[str], Path],
    user_script_text: str,
    run_dir: Path,
    scripts_root: Path | None,
    run_id: str,
    timestamp: str,
    workspace_id: str = "",
    case_path: str = "",
    import_resolver: Callable[[str], str | None] | None = None,
    output_path_prefix: str = "",
) -> RunRecord:
    """Run one script against one set of layers; never raises for script faults.

    ``case_layers`` holds (identifier, relative path) pairs for the header;
    ``layer_file`` maps a header identifier to the layer's file on disk.
    Recorded output paths are ``output_path_prefix`` + "outputs/<label>.nii.gz";
    workspace runs pass the run directory's workspace-relative prefix.
    """
    record = RunRecord(
        id=run_id,
        workspace_id=workspace_id,
        case_path=case_path,
        timestamp=timestamp,
        script_text=user_script_text,
        status=STATUS_FAILED,
    )
    header = generate_header(case_layers)
    effective_script = header + user_script_text
    log_lines: list[str] = []
    if header:
        log_lines.append(f"header: generated {header.count(chr(10)) - 1} load statement(s)")

    staging = run_dir / "outputs.staging"
    try:
        record.print_outputs, record.output_layers = _run_pipeline(
            effective_script=effective_script,
            header=header,
            layer_file=layer_file,
            scripts_root=scripts_root,
            staging=staging,
            run_dir=run_dir,
            import_resolver=import_resolver,
            log_lines=log_lines,
            output_path_prefix=output_path_prefix,
        )
        record.status = STATUS_SUCCEEDED
    except RunFailure as failure:
        log_lines.extend(failure.lines)
        record.print_outputs = []
        record.output_layers = []
        if staging.is_dir():
            shutil.rmtree(staging, ignore_errors=True)

    record.log = "\n".join(log_lines) + ("\n" if log_lines else "")
    _persist_record(record, run_dir, effective_script)
    return record


def _diag_lines(stage: str, diagnostics: list[Diagnostic]) -> list[str]:
    return [f"{stage}: {diag}" for diag in diagnostics]


def _run_pipeline(
    *,
    effective_script: str,
    header: str,
    layer_file: Callable[[str], Path],
    scripts_root: Path | None,
    staging: Path,
    run_dir: Path,
    import_resolver: Callable[[str], str | None] | None,
    log_lines: list[str],
    output_path_prefix: str = "",
) -> tuple[list[tuple[str, float]], list[tuple[str, str]]]:
    header_line_count = header.count("\n")

    parsed = parse(effective_script)
    if parsed.ast is None:
        raise RunFailure(_diag_lines("parse", parsed.diagnostics))

    # The header is the only place load statements may appear.
    user_loads = [
        stmt for stmt in parsed.ast.statements
        if isinstance(stmt, LoadStmt) and stmt.pos[0] > header_line_count
    ]
    if user_loads:
        raise RunFailure([
            f"sandbox: {stmt.pos[0]}:{stmt.pos[1]}: error: load statements are "
            "generated from the case; remove this one"
            for stmt in user_loads
        ])

    expanded = expand(parsed.ast, import_resolver)
    if expanded.ast is None:
        raise RunFailure(_diag_lines("expand", expanded.diagnostics))

    type_diags = typecheck(expanded.ast)
    if type_diags:
        raise RunFailure(_diag_lines("typecheck", type_diags))

    sandbox_diags = validate_sandbox(expanded.ast, scripts_root=scripts_root)
    if sandbox_diags:
        raise RunFailure(_diag_lines("sandbox", sandbox_diags))

    load_paths = {
        stmt.name: stmt.path
        for stmt in expanded.ast.statements
        if isinstance(stmt, LoadStmt)
    }

    def load_volume(name: str) -> VoxelVolume:
        path = layer_file(name)
        try:
            volume = read_nifti(path.read_bytes())
        except (OSError, NiftiError) as exc:
            raise RunFailure([f"load {name} ({load_paths.get(name, '?')}): {exc}"])
        return volume

    evaluator = _Evaluator(load_volume)
    prints: list[tuple[str, float]] = []
    outputs: list[tuple[str, str]] = []

    for stmt in expanded.ast.statements:
        started = time.perf_counter()
        if isinstance(stmt, SaveStmt):
            mask = evaluator.mask(stmt.expr)
            volume = mask_to_volume(mask, evaluator.spacing, description=stmt.label[:80])
            staging.mkdir(parents=True, exist_ok=True)
            try:
                (staging / f"{stmt.label}.nii.gz").write_bytes(
                    write_nifti(volume, compress=True)
                )
            except OSError as exc:
                raise RunFailure([f"save {stmt.label}: {exc}"])
            outputs.append((stmt.label, f"{output_path_prefix}outputs/{stmt.label}.nii.gz"))
            log_lines.append(
                f"save {stmt.label}: {(time.perf_counter() - started) * 1000:.1f} ms"
            )
        elif isinstance(stmt, PrintStmt):
            value = evaluator.number(stmt.expr)
            prints.append((stmt.label, value))
            log_lines.append(
                f"print {stmt.label}: {(time.perf_counter() - started) * 1000:.1f} ms"
            )
    log_lines.extend(evaluator.notes)

    if outputs:
        final = run_dir / "outputs"
        os.replace(staging, final)
    return prints, outputs


def _persist_record(record: RunRecord, run_dir: Path, effective_script: str) -> None:
    import json

    run_dir.mkdir(parents=True, exist_ok=True)
    (run_dir / "script.imgql").write_text(effective_script, encoding="utf-8")
    (run_dir / "log.txt").write_text(record.log, encoding="utf-8")
    (run_dir / "run.json").write_text(
        json.dumps(record.to_json(), indent=2, sort_keys=True), encoding="utf-8"
    )


def execute_run(store: Store, workspace_id: str, case_path: str,
                user_script_text: str) -> RunRecord:
    """Execute a script against one case of a workspace.

    Raises :class:`NotFoundError` only for an unknown workspace; everything
    else (including an unknown case) is reported in a FAILED record.
    """
    store.get_workspace(workspace_id)  # 404 surface for the API
    timestamp = datetime.datetime.now(datetime.timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")

    with store.workspace_lock(workspace_id):
        for _ in range(16):
            run_id = new_run_id()
            try:
                run_dir = store.allocate_run_dir(workspace_id, case_path, run_id)
                break
            except FileExistsError:
                continue
        else:
            raise RuntimeError("could not allocate a run id")

    try:
        layers = store.list_layers(case_path)
        case_dir = store.case_dir(case_path)
    except NotFoundError as exc:
        record = RunRecord(
            id=run_id,
            workspace_id=workspace_id,
            case_path=case_path,
            timestamp=timestamp,
            script_text=user_script_text,
            status=STATUS_FAILED,
            log=f"case: {exc}\n",
        )
        _persist_record(record, run_dir, user_script_text)
        return record

    case_layers = [(layer.name, Path(layer.path).name) for layer in layers]
    header_idents = _header_identifiers(case_layers)

    def layer_file(ident: str) -> Path:
        try:
            relative = header_idents[ident]
        except KeyError:
            raise RunFailure([f"load {ident}: no such layer in case"])
        try:
            return resolve_inside(case_dir, relative)
        except SandboxViolation as exc:
            raise RunFailure([f"load {ident}: {exc}"])

    return execute_script(
        case_layers=case_layers,
        layer_file=layer_file,
        user_script_text=user_script_text,
        run_dir=run_dir,
        scripts_root=store.config.scripts_root,
        run_id=run_id,
        timestamp=timestamp,
        workspace_id=workspace_id,
        case_path=case_path,
        import_resolver=store.import_resolver(),
        output_path_prefix=f"runs/{encode_case_path(case_path)}/{run_id}/",
    )


def _header_identifiers(case_layers: list[tuple[str, str]]) -> dict[str, str]:
    """Map header identifiers to relative layer paths, mirroring the header rules."""
    from .imgql.header import sanitize_identifier

    idents: dict[str, str] = {}
    used: dict[str, int] = {}
    for name, path in sorted(case_layers, key=lambda pair: pair[0]):
        ident = sanitize_identifier(name)
        count = used.get(ident, 0) + 1
        used[ident] = count
        if count > 1:
            ident = f"{ident}_{count}"
        idents[ident] = path
    return idents


def list_run_outputs(store: Store, workspace_id: str, case_path: str,
                     run_id: str) -> list[tuple[str, str]]:
    """(label, path) pairs exactly as recorded for a run."""
    import json

    run_dir = store.run_dir(workspace_id, case_path, run_id)
    record_file = run_dir / "run.json"
    if not record_file.is_file():
        raise NotFoundError(f"unknown run {run_id!r}")
    record = RunRecord.from_json(json.loads(record_file.read_text(encoding="utf-8")))
    return list(record.output_layers)


def run_output_file(store: Store, workspace_id: str, case_path: str,
                    run_id: str, label: str) -> Path:
    workspace_dir = store.runs_root(workspace_id).parent
    for output_label, rel_path in list_run_outputs(store, workspace_id, case_path, run_id):
        if output_label == label:
            path = (workspace_dir / rel_path).resolve()
            if workspace_dir.resolve() not in path.parents:
                raise NotFoundError(f"unknown output layer {label!r}")
            if path.is_file():
                return path
    raise NotFoundError(f"unknown output layer {label!r}")
