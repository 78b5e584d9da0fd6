"""Lexer, AST, recursive-descent parser, and printer for the query language.

The surface grammar:

    script := stmt*
    stmt   := 'import' STRING
            | 'load' IDENT '=' STRING
            | 'let' IDENT ['(' IDENT (',' IDENT)*  ')'] '=' expr
            | 'save' STRING expr
            | 'print' STRING expr
    expr   := or ;  or := and ('|' and)* ;  and := not ('&' not)*
    not    := '!' not | cmp
    cmp    := prim [('>' | '>=' | '<' | '<=') NUMBER]
    prim   := 'tt' | 'ff' | NUMBER | IDENT ['(' expr (',' expr)* ')'] | '(' expr ')'

Comments run from ``//`` to end of line. Parsing is total: bad input yields
diagnostics with positions, never an exception.
"""
from __future__ import annotations

from dataclasses import dataclass, field

Pos = tuple[int, int]

KEYWORDS = frozenset({"import", "load", "let", "save", "print", "tt", "ff"})
STATEMENT_KEYWORDS = frozenset({"import", "load", "let", "save", "print"})


@dataclass(frozen=True)
class Diagnostic:
    severity: str
    message: str
    line: int
    col: int

    def __str__(self) -> str:
        return f"{self.line}:{self.col}: {self.severity}: {self.message}"


def error(message: str, pos: Pos) -> Diagnostic:
    return Diagnostic("error", message, pos[0], pos[1])


# AST -------------------------------------------------------------------------


@dataclass(frozen=True)
class Expr:
    pass


@dataclass(frozen=True)
class BoolLit(Expr):
    value: bool
    pos: Pos = field(default=(0, 0), compare=False)


@dataclass(frozen=True)
class NumberLit(Expr):
    value: float
    text: str = field(default="", compare=False)
    pos: Pos = field(default=(0, 0), compare=False)

    def __post_init__(self):
        if not self.text:
            text = repr(self.value) if self.value != int(self.value) else str(int(self.value))
            object.__setattr__(self, "text", text)


@dataclass(frozen=True)
class Name(Expr):
    name: str
    pos: Pos = field(default=(0, 0), compare=False)


@dataclass(frozen=True)
class Call(Expr):
    name: str
    args: tuple[Expr, ...]
    pos: Pos = field(default=(0, 0), compare=False)


@dataclass(frozen=True)
class NotExpr(Expr):
    operand: Expr
    pos: Pos = field(default=(0, 0), compare=False)


@dataclass(frozen=True)
class AndExpr(Expr):
    left: Expr
    right: Expr
    pos: Pos = field(default=(0, 0), compare=False)


@dataclass(frozen=True)
class OrExpr(Expr):
    left: Expr
    right: Expr
    pos: Pos = field(default=(0, 0), compare=False)


@dataclass(frozen=True)
class Compare(Expr):
    operand: Expr
    op: str
    value: NumberLit
    pos: Pos = field(default=(0, 0), compare=False)


@dataclass(frozen=True)
class Stmt:
    pass


@dataclass(frozen=True)
class ImportStmt(Stmt):
    path: str
    pos: Pos = field(default=(0, 0), compare=False)


@dataclass(frozen=True)
class LoadStmt(Stmt):
    name: str
    path: str
    pos: Pos = field(default=(0, 0), compare=False)


@dataclass(frozen=True)
class LetStmt(Stmt):
    name: str
    params: tuple[str, ...]
    body: Expr
    pos: Pos = field(default=(0, 0), compare=False)


@dataclass(frozen=True)
class SaveStmt(Stmt):
    label: str
    expr: Expr
    pos: Pos = field(default=(0, 0), compare=False)


@dataclass(frozen=True)
class PrintStmt(Stmt):
    label: str
    expr: Expr
    pos: Pos = field(default=(0, 0), compare=False)


@dataclass(frozen=True)
class ScriptAst:
    statements: tuple[Stmt, ...]


@dataclass
class ParseResult:
    ast: ScriptAst | None
    diagnostics: list[Diagnostic]

    @property
    def ok(self) -> bool:
        return self.ast is not None


# Lexer -----------------------------------------------------------------------

_PUNCT = {"(", ")", ",", "=", "&", "|", "!", ">", ">=", "<", "<="}


@dataclass(frozen=True)
class _Token:
    kind: str  # IDENT NUMBER STRING PUNCT EOF
    value: str
    pos: Pos


class _LexError(Exception):
    def __init__(self, diagnostic: Diagnostic):
        self.diagnostic = diagnostic


def _tokenize(text: str) -> list[_Token]:
    tokens: list[_Token] = []
    i = 0
    line, col = 1, 1
    n = len(text)

    def advance(k: int = 1):
        nonlocal i, line, col
        for _ in range(k):
            if i < n and text[i] == "\n":
                line += 1
                col = 1
            else:
                col += 1
            i += 1

    while i < n:
        ch = text[i]
        if ch in " \t\r\n":
            advance()
            continue
        if ch == "/" and text[i : i + 2] == "//":
            while i < n and text[i] != "\n":
                advance()
            continue
        pos = (line, col)
        if ch == '"':
            advance()
            start = i
            while i < n and text[i] not in '"\n':
                advance()
            if i >= n or text[i] != '"':
                raise _LexError(error("unterminated string", pos))
            value = text[start:i]
            advance()
            tokens.append(_Token("STRING", value, pos))
            continue
        if ch.isdigit() or (ch == "-" and i + 1 < n and text[i + 1].isdigit()):
            start = i
            advance()
            while i < n and text[i].isdigit():
                advance()
            if i < n and text[i] == "." and i + 1 < n and text[i + 1].isdigit():
                advance()
                while i < n and text[i].isdigit():
                    advance()
            tokens.append(_Token("NUMBER", text[start:i], pos))
            continue
        if ch.isalpha() or ch == "_":
            start = i
            while i < n and (text[i].isalnum() or text[i] == "_"):
                advance()
            tokens.append(_Token("IDENT", text[start:i], pos))
            continue
        two = text[i : i + 2]
        if two in (">=", "<="):
            advance(2)
            tokens.append(_Token("PUNCT", two, pos))
            continue
        if ch in "(),=&|!><":
            advance()
            tokens.append(_Token("PUNCT", ch, pos))
            continue
        raise _LexError(error(f"unexpected character {ch!r}", pos))
    tokens.append(_Token("EOF", "", (line, col)))
    return tokens


# Parser ----------------------------------------------------------------------


class _ParseError(Exception):
    def __init__(self, diagnostic: Diagnostic):
        self.diagnostic = diagnostic


class _Parser:
    def __init__(self, tokens: list[_Token]):
        self.tokens = tokens
        self.i = 0

    def peek(self) -> _Token:
        return self.tokens[self.i]

    def next(self) -> _Token:
        tok = self.tokens[self.i]
        if tok.kind != "EOF":
            self.i += 1
        return tok

    def fail(self, message: str, tok: _Token | None = None):
        tok = tok or self.peek()
        raise _ParseError(error(message, tok.pos))

    def expect_punct(self, value: str) -> _Token:
        tok = self.peek()
        if tok.kind != "PUNCT" or tok.value != value:
            self.fail(f"expected {value!r}", tok)
        return self.next()

    def expect_ident(self, what: str) -> _Token:
        tok = self.peek()
        if tok.kind != "IDENT" or tok.value in KEYWORDS:
            self.fail(f"expected {what}", tok)
        return self.next()

    def expect_string(self, what: str) -> _Token:
        tok = self.peek()
        if tok.kind != "STRING":
            self.fail(f"expected {what} (a quoted string)", tok)
        return self.next()

    def at_punct(self, value: str) -> bool:
        tok = self.peek()
        return tok.kind == "PUNCT" and tok.value == value

    def sync_to_statement(self):
        """Panic-mode recovery: skip to the next statement keyword."""
        while True:
            tok = self.peek()
            if tok.kind == "EOF":
                return
            if tok.kind == "IDENT" and tok.value in STATEMENT_KEYWORDS:
                return
            self.next()

    # Statements

    def parse_script(self) -> tuple[list[Stmt], list[Diagnostic]]:
        statements: list[Stmt] = []
        diagnostics: list[Diagnostic] = []
        while self.peek().kind != "EOF":
            try:
                statements.append(self.parse_statement())
            except _ParseError as exc:
                diagnostics.append(exc.diagnostic)
                self.next()
                self.sync_to_statement()
        return statements, diagnostics

    def parse_statement(self) -> Stmt:
        tok = self.peek()
        if tok.kind != "IDENT" or tok.value not in STATEMENT_KEYWORDS:
            self.fail("expected a statement (import, load, let, save, print)", tok)
        keyword = self.next()
        if keyword.value == "import":
            path = self.expect_string("import path")
            return ImportStmt(path.value, pos=keyword.pos)
        if keyword.value == "load":
            name = self.expect_ident("layer name")
            self.expect_punct("=")
            path = self.expect_string("layer path")
            return LoadStmt(name.value, path.value, pos=keyword.pos)
        if keyword.value == "let":
            name = self.expect_ident("definition name")
            params: list[str] = []
            if self.at_punct("("):
                self.next()
                params.append(self.expect_ident("parameter name").value)
                while self.at_punct(","):
                    self.next()
                    params.append(self.expect_ident("parameter name").value)
                self.expect_punct(")")
            self.expect_punct("=")
            body = self.parse_expr()
            return LetStmt(name.value, tuple(params), body, pos=keyword.pos)
        if keyword.value == "save":
            label = self.expect_string("save label")
            expr = self.parse_expr()
            return SaveStmt(label.value, expr, pos=keyword.pos)
        label = self.expect_string("print label")
        expr = self.parse_expr()
        return PrintStmt(label.value, expr, pos=keyword.pos)

    # Expressions

    def parse_expr(self) -> Expr:
        return self.parse_or()

    def parse_or(self) -> Expr:
        left = self.parse_and()
        while self.at_punct("|"):
            pos = self.next().pos
            left = OrExpr(left, self.parse_and(), pos=pos)
        return left

    def parse_and(self) -> Expr:
        left = self.parse_not()
        while self.at_punct("&"):
            pos = self.next().pos
            left = AndExpr(left, self.parse_not(), pos=pos)
        return left

    def parse_not(self) -> Expr:
        if self.at_punct("!"):
            pos = self.next().pos
            return NotExpr(self.parse_not(), pos=pos)
        return self.parse_cmp()

    def parse_cmp(self) -> Expr:
        operand = self.parse_prim()
        tok = self.peek()
        if tok.kind == "PUNCT" and tok.value in (">", ">=", "<", "<="):
            self.next()
            num = self.peek()
            if num.kind != "NUMBER":
                self.fail("expected a number after comparison operator", num)
            self.next()
            lit = NumberLit(float(num.value), text=num.value, pos=num.pos)
            return Compare(operand, tok.value, lit, pos=tok.pos)
        return operand

    def parse_prim(self) -> Expr:
        tok = self.peek()
        if tok.kind == "NUMBER":
            self.next()
            return NumberLit(float(tok.value), text=tok.value, pos=tok.pos)
        if tok.kind == "IDENT":
            if tok.value == "tt":
                self.next()
                return BoolLit(True, pos=tok.pos)
            if tok.value == "ff":
                self.next()
                return BoolLit(False, pos=tok.pos)
            if tok.value in KEYWORDS:
                self.fail(f"unexpected keyword {tok.value!r} in expression", tok)
            self.next()
            if self.at_punct("("):
                self.next()
                args = [self.parse_expr()]
                while self.at_punct(","):
                    self.next()
                    args.append(self.parse_expr())
                self.expect_punct(")")
                return Call(tok.value, tuple(args), pos=tok.pos)
            return Name(tok.value, pos=tok.pos)
        if self.at_punct("("):
            self.next()
            inner = self.parse_expr()
            self.expect_punct(")")
            return inner
        self.fail("expected an expression", tok)


def _structural_checks(statements: list[Stmt]) -> list[Diagnostic]:
    """Duplicate-name rules that are script invariants, not grammar."""
    diagnostics: list[Diagnostic] = []
    bound: dict[str, Pos] = {}
    labels: dict[str, Pos] = {}
    for stmt in statements:
        if isinstance(stmt, (LoadStmt, LetStmt)):
            if stmt.name in bound:
                diagnostics.append(error(f"duplicate definition of {stmt.name!r}", stmt.pos))
            else:
                bound[stmt.name] = stmt.pos
        elif isinstance(stmt, (SaveStmt, PrintStmt)):
            if stmt.label in labels:
                diagnostics.append(error(f"duplicate output label {stmt.label!r}", stmt.pos))
            else:
                labels[stmt.label] = stmt.pos
    return diagnostics


def parse(text: str) -> ParseResult:
    """Parse source text; returns an AST or diagnostics, never both."""
    try:
        tokens = _tokenize(text)
    except _LexError as exc:
        return ParseResult(None, [exc.diagnostic])
    statements, diagnostics = _Parser(tokens).parse_script()
    if not diagnostics:
        diagnostics.extend(_structural_checks(statements))
    if diagnostics:
        return ParseResult(None, diagnostics)
    return ParseResult(ScriptAst(tuple(statements)), [])


# Printer ---------------------------------------------------------------------

_PREC_OR, _PREC_AND, _PREC_NOT, _PREC_CMP, _PREC_PRIM = 1, 2, 3, 4, 5


def _expr_prec(e: Expr) -> int:
    if isinstance(e, OrExpr):
        return _PREC_OR
    if isinstance(e, AndExpr):
        return _PREC_AND
    if isinstance(e, NotExpr):
        return _PREC_NOT
    if isinstance(e, Compare):
        return _PREC_CMP
    return _PREC_PRIM


def format_expr(e: Expr, parent_prec: int = 0) -> str:
    prec = _expr_prec(e)
    if isinstance(e, BoolLit):
        text = "tt" if e.value else "ff"
    elif isinstance(e, NumberLit):
        text = e.text
    elif isinstance(e, Name):
        text = e.name
    elif isinstance(e, Call):
        text = f"{e.name}({', '.join(format_expr(a) for a in e.args)})"
    elif isinstance(e, NotExpr):
        text = f"!{format_expr(e.operand, prec)}"
    elif isinstance(e, AndExpr):
        text = f"{format_expr(e.left, prec)} & {format_expr(e.right, prec + 1)}"
    elif isinstance(e, OrExpr):
        text = f"{format_expr(e.left, prec)} | {format_expr(e.right, prec + 1)}"
    elif isinstance(e, Compare):
        text = f"{format_expr(e.operand, prec + 1)} {e.op} {e.value.text}"
    else:
        raise TypeError(f"not an expression node: {e!r}")
    if prec < parent_prec:
        return f"({text})"
    return text


def format_script(ast: ScriptAst) -> str:
    lines = []
    for stmt in ast.statements:
        if isinstance(stmt, ImportStmt):
            lines.append(f'import "{stmt.path}"')
        elif isinstance(stmt, LoadStmt):
            lines.append(f'load {stmt.name} = "{stmt.path}"')
        elif isinstance(stmt, LetStmt):
            params = f"({', '.join(stmt.params)})" if stmt.params else ""
            lines.append(f"let {stmt.name}{params} = {format_expr(stmt.body)}")
        elif isinstance(stmt, SaveStmt):
            lines.append(f'save "{stmt.label}" {format_expr(stmt.expr)}')
        elif isinstance(stmt, PrintStmt):
            lines.append(f'print "{stmt.label}" {format_expr(stmt.expr)}')
        else:
            raise TypeError(f"not a statement node: {stmt!r}")
    return "\n".join(lines) + ("\n" if lines else "")
