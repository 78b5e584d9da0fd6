"""ImgQL-style declarative query language: parsing, expansion, checks."""

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
    ParseResult,
    PrintStmt,
    SaveStmt,
    ScriptAst,
    Stmt,
    format_script,
    parse,
)
from .analysis import (
    BUILTIN_ARITY,
    ExpandResult,
    Sort,
    expand,
    resolve_inside,
    typecheck,
    validate_sandbox,
)
from .header import generate_header

__all__ = [
    "AndExpr",
    "BoolLit",
    "BUILTIN_ARITY",
    "Call",
    "Compare",
    "Diagnostic",
    "ExpandResult",
    "Expr",
    "ImportStmt",
    "LetStmt",
    "LoadStmt",
    "Name",
    "NotExpr",
    "NumberLit",
    "OrExpr",
    "ParseResult",
    "PrintStmt",
    "SaveStmt",
    "ScriptAst",
    "Sort",
    "Stmt",
    "expand",
    "format_script",
    "generate_header",
    "parse",
    "resolve_inside",
    "typecheck",
    "validate_sandbox",
]
