"""Static passes over parsed scripts: expansion, sorts, sandbox rules."""
from __future__ import annotations

import enum
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Callable

from .syntax import (
    AndExpr,
    BoolLit,
    Call,
    Compare,
    Diagnostic,
    Expr,
    ImportStmt,
    LetStmt,
    LoadStmt,
    Name,
    NotExpr,
    NumberLit,
    OrExpr,
    PrintStmt,
    SaveStmt,
    ScriptAst,
    Stmt,
    error,
    parse,
)

# Builtins and their arities. These are the only callables besides lets.
BUILTIN_ARITY = {
    "through": 2,
    "reachedBy": 2,
    "near": 1,
    "interior": 1,
    "dice": 2,
    "volume": 1,
}

MAX_EXPANSION_DEPTH = 64


@dataclass
class ExpandResult:
    ast: ScriptAst | None
    diagnostics: list[Diagnostic]

    @property
    def ok(self) -> bool:
        return self.ast is not None


ImportResolver = Callable[[str], "str | None"]


def _merge_imports(ast: ScriptAst, resolver: ImportResolver,
                   diagnostics: list[Diagnostic]) -> list[Stmt]:
    """Inline imported scripts depth-first, each file exactly once."""
    seen: set[str] = set()
    stack: list[str] = []

    def walk(statements: tuple[Stmt, ...]) -> list[Stmt]:
        out: list[Stmt] = []
        for stmt in statements:
            if not isinstance(stmt, ImportStmt):
                out.append(stmt)
                continue
            if stmt.path in stack:
                diagnostics.append(error(f"import cycle through {stmt.path!r}", stmt.pos))
                continue
            if stmt.path in seen:
                continue
            seen.add(stmt.path)
            source = resolver(stmt.path)
            if source is None:
                diagnostics.append(error(f"missing import file {stmt.path!r}", stmt.pos))
                continue
            nested = parse(source)
            if nested.ast is None:
                for diag in nested.diagnostics:
                    diagnostics.append(
                        error(f"in import {stmt.path!r}: {diag.message}", stmt.pos)
                    )
                continue
            stack.append(stmt.path)
            out.extend(walk(nested.ast.statements))
            stack.pop()
        return out

    return walk(ast.statements)


class _ExpandError(Exception):
    def __init__(self, diagnostic: Diagnostic):
        self.diagnostic = diagnostic


def _substitute(e: Expr, bindings: dict[str, Expr]) -> Expr:
    if isinstance(e, Name) and e.name in bindings:
        return bindings[e.name]
    if isinstance(e, NotExpr):
        return NotExpr(_substitute(e.operand, bindings), pos=e.pos)
    if isinstance(e, AndExpr):
        return AndExpr(_substitute(e.left, bindings), _substitute(e.right, bindings), pos=e.pos)
    if isinstance(e, OrExpr):
        return OrExpr(_substitute(e.left, bindings), _substitute(e.right, bindings), pos=e.pos)
    if isinstance(e, Compare):
        return Compare(_substitute(e.operand, bindings), e.op, e.value, pos=e.pos)
    if isinstance(e, Call):
        return Call(e.name, tuple(_substitute(a, bindings) for a in e.args), pos=e.pos)
    return e


def expand(ast: ScriptAst, import_resolver: ImportResolver | None = None) -> ExpandResult:
    """Resolve imports and substitute ``let`` definitions away.

    The result contains only load/save/print statements. Substitution is
    capture-avoiding because arguments are fully expanded before they are
    bound to parameters, so no free parameter name can survive into a body.
    """
    diagnostics: list[Diagnostic] = []
    resolver = import_resolver or (lambda path: None)
    statements = _merge_imports(ast, resolver, diagnostics)

    lets: dict[str, LetStmt] = {}
    loads: dict[str, LoadStmt] = {}

    def expand_expr(e: Expr, stack: tuple[str, ...], depth: int) -> Expr:
        if depth > MAX_EXPANSION_DEPTH:
            raise _ExpandError(error("expansion depth exceeded", _pos_of(e)))
        if isinstance(e, Name):
            if e.name in lets:
                return expand_let(lets[e.name], [], e.pos, stack, depth)
            if e.name in loads:
                return e
            if e.name in BUILTIN_ARITY:
                raise _ExpandError(error(
                    f"{e.name} expects {BUILTIN_ARITY[e.name]} argument(s)", e.pos))
            raise _ExpandError(error(f"unknown identifier {e.name!r}", e.pos))
        if isinstance(e, Call):
            args = [expand_expr(a, stack, depth + 1) for a in e.args]
            if e.name in BUILTIN_ARITY:
                if len(args) != BUILTIN_ARITY[e.name]:
                    raise _ExpandError(error(
                        f"{e.name} expects {BUILTIN_ARITY[e.name]} argument(s), "
                        f"got {len(args)}", e.pos))
                return Call(e.name, tuple(args), pos=e.pos)
            if e.name in lets:
                return expand_let(lets[e.name], args, e.pos, stack, depth)
            if e.name in loads:
                raise _ExpandError(error(f"{e.name!r} is a layer, not a function", e.pos))
            raise _ExpandError(error(f"unknown identifier {e.name!r}", e.pos))
        if isinstance(e, NotExpr):
            return NotExpr(expand_expr(e.operand, stack, depth + 1), pos=e.pos)
        if isinstance(e, AndExpr):
            return AndExpr(expand_expr(e.left, stack, depth + 1),
                           expand_expr(e.right, stack, depth + 1), pos=e.pos)
        if isinstance(e, OrExpr):
            return OrExpr(expand_expr(e.left, stack, depth + 1),
                          expand_expr(e.right, stack, depth + 1), pos=e.pos)
        if isinstance(e, Compare):
            return Compare(expand_expr(e.operand, stack, depth + 1), e.op, e.value, pos=e.pos)
        return e

    def expand_let(let: LetStmt, args: list[Expr], pos, stack: tuple[str, ...],
                   depth: int) -> Expr:
        if let.name in stack:
            raise _ExpandError(error(f"recursive let {let.name!r}", pos))
        if len(args) != len(let.params):
            raise _ExpandError(error(
                f"{let.name} expects {len(let.params)} argument(s), got {len(args)}", pos))
        body = _substitute(let.body, dict(zip(let.params, args)))
        return expand_expr(body, stack + (let.name,), depth + 1)

    out: list[Stmt] = []
    for stmt in statements:
        if isinstance(stmt, LetStmt):
            if stmt.name in lets or stmt.name in loads:
                diagnostics.append(error(f"duplicate definition of {stmt.name!r}", stmt.pos))
            else:
                lets[stmt.name] = stmt
        elif isinstance(stmt, LoadStmt):
            if stmt.name in lets or stmt.name in loads:
                diagnostics.append(error(f"duplicate definition of {stmt.name!r}", stmt.pos))
            else:
                loads[stmt.name] = stmt
                out.append(stmt)
        elif isinstance(stmt, SaveStmt):
            try:
                out.append(SaveStmt(stmt.label, expand_expr(stmt.expr, (), 0), pos=stmt.pos))
            except _ExpandError as exc:
                diagnostics.append(exc.diagnostic)
        elif isinstance(stmt, PrintStmt):
            try:
                out.append(PrintStmt(stmt.label, expand_expr(stmt.expr, (), 0), pos=stmt.pos))
            except _ExpandError as exc:
                diagnostics.append(exc.diagnostic)
    if diagnostics:
        return ExpandResult(None, diagnostics)
    return ExpandResult(ScriptAst(tuple(out)), [])


def _pos_of(e: Expr):
    return getattr(e, "pos", (0, 0))


# Type checking -----------------------------------------------------------------


class Sort(enum.Enum):
    SCALAR_IMAGE = "scalar image"
    BOOL_IMAGE = "boolean image"
    NUMBER = "number"


_BUILTIN_SIGNATURES: dict[str, tuple[tuple[Sort, ...], Sort]] = {
    "through": ((Sort.BOOL_IMAGE, Sort.BOOL_IMAGE), Sort.BOOL_IMAGE),
    "reachedBy": ((Sort.BOOL_IMAGE, Sort.BOOL_IMAGE), Sort.BOOL_IMAGE),
    "near": ((Sort.BOOL_IMAGE,), Sort.BOOL_IMAGE),
    "interior": ((Sort.BOOL_IMAGE,), Sort.BOOL_IMAGE),
    "dice": ((Sort.BOOL_IMAGE, Sort.BOOL_IMAGE), Sort.NUMBER),
    "volume": ((Sort.BOOL_IMAGE,), Sort.NUMBER),
}


def infer_sort(e: Expr, loads: set[str], diagnostics: list[Diagnostic]) -> Sort | None:
    """Sort of an expanded expression; records a diagnostic and returns None on error."""
    if isinstance(e, BoolLit):
        return Sort.BOOL_IMAGE
    if isinstance(e, NumberLit):
        return Sort.NUMBER
    if isinstance(e, Name):
        if e.name in loads:
            return Sort.SCALAR_IMAGE
        diagnostics.append(error(f"unknown identifier {e.name!r}", e.pos))
        return None
    if isinstance(e, Compare):
        operand = infer_sort(e.operand, loads, diagnostics)
        if operand is not None and operand is not Sort.SCALAR_IMAGE:
            diagnostics.append(error(
                f"comparison requires a scalar image, got {operand.value}", e.pos))
            return None
        return Sort.BOOL_IMAGE if operand is not None else None
    if isinstance(e, NotExpr):
        return _require(e.operand, Sort.BOOL_IMAGE, loads, diagnostics)
    if isinstance(e, (AndExpr, OrExpr)):
        left = _require(e.left, Sort.BOOL_IMAGE, loads, diagnostics)
        right = _require(e.right, Sort.BOOL_IMAGE, loads, diagnostics)
        return Sort.BOOL_IMAGE if left and right else None
    if isinstance(e, Call):
        signature = _BUILTIN_SIGNATURES.get(e.name)
        if signature is None:
            diagnostics.append(error(f"unknown function {e.name!r}", e.pos))
            return None
        params, result = signature
        ok = True
        for arg, want in zip(e.args, params):
            if _require(arg, want, loads, diagnostics) is None:
                ok = False
        return result if ok else None
    diagnostics.append(error("unsupported expression", _pos_of(e)))
    return None


def _require(e: Expr, want: Sort, loads: set[str],
             diagnostics: list[Diagnostic]) -> Sort | None:
    got = infer_sort(e, loads, diagnostics)
    if got is None:
        return None
    if got is not want:
        diagnostics.append(error(f"expected a {want.value}, got {got.value}", _pos_of(e)))
        return None
    return got


def typecheck(ast: ScriptAst) -> list[Diagnostic]:
    """Sort-check an expanded script; an empty result means well-typed."""
    diagnostics: list[Diagnostic] = []
    loads: set[str] = set()
    for stmt in ast.statements:
        if isinstance(stmt, LoadStmt):
            loads.add(stmt.name)
        elif isinstance(stmt, SaveStmt):
            got = infer_sort(stmt.expr, loads, diagnostics)
            if got is not None and got is not Sort.BOOL_IMAGE:
                diagnostics.append(error(
                    f"save requires a boolean image, got {got.value}", stmt.pos))
        elif isinstance(stmt, PrintStmt):
            got = infer_sort(stmt.expr, loads, diagnostics)
            if got is not None and got is not Sort.NUMBER:
                diagnostics.append(error(
                    f"print requires a number, got {got.value}", stmt.pos))
        elif isinstance(stmt, (LetStmt, ImportStmt)):
            diagnostics.append(error("script must be expanded before type checking", stmt.pos))
    return diagnostics


# Sandbox -----------------------------------------------------------------------

LABEL_RE = re.compile(r"^[A-Za-z0-9_-]{1,64}$")
_DRIVE_RE = re.compile(r"^[A-Za-z]:")


class SandboxViolation(ValueError):
    """A path resolved outside its permitted root."""


def path_violation(path: str) -> str | None:
    """Why a script path is rejected, or None if it passes the string rules."""
    if not path:
        return "empty path"
    if "\\" in path:
        return "backslashes are not allowed in paths"
    if path.startswith("/"):
        return "absolute paths are not allowed"
    if _DRIVE_RE.match(path):
        return "drive-prefixed paths are not allowed"
    if any(part == ".." for part in path.split("/")):
        return "'..' segments are not allowed"
    if "\x00" in path:
        return "NUL bytes are not allowed in paths"
    return None


def resolve_inside(root: Path, relative: str) -> Path:
    """Join and canonicalize, refusing any result that escapes ``root``."""
    violation = path_violation(relative)
    if violation is not None:
        raise SandboxViolation(f"{relative!r}: {violation}")
    resolved = (root / relative).resolve()
    root_resolved = root.resolve()
    if not (resolved == root_resolved or root_resolved in resolved.parents):
        raise SandboxViolation(f"{relative!r} escapes {root}")
    return resolved


def validate_sandbox(ast: ScriptAst, case_root: Path | None = None,
                     scripts_root: Path | None = None) -> list[Diagnostic]:
    """Path and label hygiene for a parsed script.

    String rules always apply; when roots are supplied, each path is also
    canonicalized after joining to prove it cannot escape.
    """
    diagnostics: list[Diagnostic] = []

    def check_path(path: str, root: Path | None, pos):
        violation = path_violation(path)
        if violation is not None:
            diagnostics.append(error(f"{path!r}: {violation}", pos))
            return
        if root is not None:
            try:
                resolve_inside(root, path)
            except SandboxViolation as exc:
                diagnostics.append(error(str(exc), pos))

    for stmt in ast.statements:
        if isinstance(stmt, LoadStmt):
            check_path(stmt.path, case_root, stmt.pos)
        elif isinstance(stmt, ImportStmt):
            check_path(stmt.path, scripts_root, stmt.pos)
        elif isinstance(stmt, (SaveStmt, PrintStmt)):
            if not LABEL_RE.match(stmt.label):
                diagnostics.append(error(
                    f"label {stmt.label!r} must match [A-Za-z0-9_-]{{1,64}}", stmt.pos))
    return diagnostics
