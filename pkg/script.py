#!/usr/bin/env python3
"""
Script Language - Torsion Calculator
Tokenizer, recursive descent parser, renderer and runner for torscalc scripts
"""

import logging
import re
from dataclasses import dataclass, field
from typing import Any, Dict, List, Tuple

from bundles import (
    BundlePair, DiskBundle, Double, FiberProduct, FiberStats, Handle, Hatcher,
    MorseBundle, RelDiskBundle, SphereBundle, Trivial, UnionHandle, UnionVertical,
    VerticalBoundary, Workspace, stats, validate,
)
from chern import GradedClass, VirtualBundle, bundle_to_text, complement, parse_class
from errors import DegreeMismatch, ParseError, SemanticError, TorsCalcError
from scalars import Scalar, format_rational, parse_scalar, to_text
from torsion import (
    TorsionTheory, decompose, difference_torsion, fr_theory, mmm_theory, tau,
    tau_absolute, tau_even, tau_odd,
)
from transfer import TotalSpaceClass, m2k_degree_zero, m2k_direct

logger = logging.getLogger(__name__)

_TOKEN_SPEC = [
    ("COMMENT", r"#[^\n]*"),
    ("NEWLINE", r"\n"),
    ("SKIP", r"[ \t\r]+"),
    ("NUMBER", r"\d+"),
    ("NAME", r"[A-Za-z_][A-Za-z0-9_]*"),
    ("OP", r"[()\[\],=+\-*/^;]"),
    ("MISMATCH", r"."),
]
_TOKEN_RE = re.compile("|".join(f"(?P<{name}>{pattern})" for name, pattern in _TOKEN_SPEC))

STATEMENT_KEYWORDS = {"root", "vb", "theory", "query"}
EXPR_CONSTRUCTORS = {
    "sphere", "disk", "reldisk", "double", "dv", "union", "glue", "prod", "morse", "hatcher", "trivial",
}
BUNDLE_CONSTRUCTORS = {"line", "trivial", "complement"}
THEORY_CONSTRUCTORS = {"fr", "mmm", "custom"}
RESERVED = STATEMENT_KEYWORDS | EXPR_CONSTRUCTORS | BUNDLE_CONSTRUCTORS | THEORY_CONSTRUCTORS

QUERY_SIGNATURES = {
    "tau": ("theory", "expr"),
    "tau_even": ("theory", "expr"),
    "tau_odd": ("theory", "expr"),
    "tdelta": ("theory", "expr"),
    "tau_abs": ("theory", "expr"),
    "m2k": ("expr", "int"),
    "chi": ("expr",),
    "transfer": ("expr", "class"),
    "decompose": ("theory",),
}


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    line: int
    column: int
    offset: int

    @property
    def end(self) -> int:
        return self.offset + len(self.text)


def tokenize(source: str) -> List[Token]:
    """Tokens with positions; ';' and newlines outside brackets become SEP"""
    tokens: List[Token] = []
    line, line_start, nesting = 1, 0, 0
    for match in _TOKEN_RE.finditer(source):
        kind, text = match.lastgroup, match.group()
        column = match.start() - line_start + 1
        if kind == "NEWLINE":
            if nesting == 0:
                tokens.append(Token("SEP", "\n", line, column, match.start()))
            line += 1
            line_start = match.end()
            continue
        if kind in ("SKIP", "COMMENT"):
            continue
        if kind == "MISMATCH":
            raise ParseError(f"unexpected character {text!r}", line, column)
        if text in "([":
            nesting += 1
        elif text in ")]":
            nesting = max(0, nesting - 1)
        tokens.append(Token("SEP" if text == ";" else kind, text, line, column, match.start()))
    tokens.append(Token("EOF", "", line, len(source) - line_start + 1, len(source)))
    return tokens


# Statements

@dataclass(frozen=True)
class RootDecl:
    name: str
    line: int = field(default=0, compare=False)


@dataclass(frozen=True)
class VbDef:
    name: str
    bundle: VirtualBundle
    line: int = field(default=0, compare=False)


@dataclass(frozen=True)
class ExprDef:
    name: str
    expr: BundlePair
    line: int = field(default=0, compare=False)


@dataclass(frozen=True)
class TheoryDef:
    name: str
    theory: TorsionTheory
    line: int = field(default=0, compare=False)


@dataclass(frozen=True)
class Query:
    """A query with its arguments resolved to values"""
    kind: str
    args: Tuple[Any, ...]
    line: int = field(default=0, compare=False)


@dataclass
class Script:
    statements: List[Any] = field(default_factory=list)

    @property
    def queries(self) -> List[Query]:
        return [s for s in self.statements if isinstance(s, Query)]

    def __str__(self) -> str:
        return render(self)


class Parser:
    """Recursive descent over the token list, resolving names as they are defined"""

    def __init__(self, source: str):
        self.source = source
        self.lines = source.splitlines()
        self.tokens = tokenize(source)
        self.position = 0
        self.names: Dict[str, Tuple[str, Any]] = {}
        self.workspace = Workspace()
        self.statement_line = 1

    # Token helpers

    def peek(self, ahead: int = 0) -> Token:
        return self.tokens[min(self.position + ahead, len(self.tokens) - 1)]

    def advance(self) -> Token:
        token = self.peek()
        self.position += 1
        return token

    def error(self, message: str, expected=()) -> ParseError:
        token = self.peek()
        found = token.text if token.kind not in ("EOF", "SEP") else token.kind.lower()
        return ParseError(f"{message}, found {found!r}", token.line, token.column, expected)

    def expect(self, text: str) -> Token:
        token = self.peek()
        if token.text != text or token.kind not in ("OP", "NAME"):
            raise self.error("unexpected token", [repr(text)])
        return self.advance()

    def accept(self, text: str) -> bool:
        if self.peek().text == text and self.peek().kind in ("OP", "NAME"):
            self.advance()
            return True
        return False

    def name(self) -> Token:
        if self.peek().kind != "NAME":
            raise self.error("expected a name", ["name"])
        return self.advance()

    def integer(self) -> int:
        sign = -1 if self.accept("-") else 1
        if self.peek().kind != "NUMBER":
            raise self.error("expected an integer", ["integer"])
        return sign * int(self.advance().text)

    def keyword_int(self, keyword: str) -> int:
        self.expect(keyword)
        self.expect("=")
        return self.integer()

    def semantic(self, message: str) -> SemanticError:
        statement = self.lines[self.statement_line - 1].strip() if self.statement_line <= len(self.lines) else ""
        return SemanticError(message, self.statement_line, statement)

    # Names

    def define(self, name: str, kind: str, value: Any):
        if name in RESERVED or re.fullmatch(r"z\d+", name):
            raise self.semantic(f"{name} is a reserved name")
        if name in self.names:
            raise self.semantic(f"{name} is already defined")
        self.names[name] = (kind, value)

    def lookup(self, token: Token, kind: str) -> Any:
        entry = self.names.get(token.text)
        if entry is None:
            raise self.semantic(f"{token.text} is not defined")
        if entry[0] != kind:
            raise self.semantic(f"{token.text} is a {entry[0]}, not a {kind}")
        return entry[1]

    # Grammar

    def parse(self) -> Script:
        statements: List[Any] = []
        while True:
            while self.peek().kind == "SEP":
                self.advance()
            if self.peek().kind == "EOF":
                return Script(statements)
            self.statement_line = self.peek().line
            statements.extend(self.statement())
            if self.peek().kind not in ("SEP", "EOF"):
                raise self.error("expected end of statement", ["';'", "newline"])

    def statement(self) -> List[Any]:
        line = self.statement_line
        head = self.name()
        if head.text == "root":
            declared = []
            while True:
                name = self.name().text
                self.define(name, "root", name)
                self.workspace.declare_root(name)
                declared.append(RootDecl(name, line))
                if not self.accept(","):
                    return declared
        if head.text == "vb":
            name = self.name().text
            self.expect("=")
            bundle = self.bundle()
            self.define(name, "bundle", bundle)
            self.workspace.define_bundle(name, bundle)
            return [VbDef(name, bundle, line)]
        if head.text == "theory":
            name = self.name().text
            self.expect("=")
            theory = self.theory()
            self.define(name, "theory", theory)
            return [TheoryDef(name, theory, line)]
        if head.text == "query":
            return [self.query(line)]
        if self.peek().text == "=":
            self.advance()
            expr = self.checked_expression()
            self.define(head.text, "expression", expr)
            return [ExprDef(head.text, expr, line)]
        raise ParseError(f"unknown statement {head.text!r}", head.line, head.column,
                         ["root", "vb", "theory", "query", "name ="])

    def query(self, line: int) -> Query:
        kind = self.name()
        signature = QUERY_SIGNATURES.get(kind.text)
        if signature is None:
            raise ParseError(f"unknown query {kind.text!r}", kind.line, kind.column, sorted(QUERY_SIGNATURES))
        self.expect("(")
        args = []
        for index, slot in enumerate(signature):
            if index:
                self.expect(",")
            if slot == "theory":
                args.append(self.theory())
            elif slot == "expr":
                args.append(self.checked_expression())
            elif slot == "int":
                args.append(self.integer())
            else:
                args.append(self.transfer_class(args[0]))
        self.expect(")")
        return Query(kind.text, tuple(args), line)

    def span(self, what: str) -> Tuple[str, Token]:
        """Raw source text up to the next ',' or ')' at bracket depth zero"""
        start = self.peek()
        nesting = 0
        last = None
        while True:
            token = self.peek()
            if token.kind in ("EOF", "SEP"):
                break
            if nesting == 0 and token.text in (",", ")"):
                break
            if token.text in "([":
                nesting += 1
            elif token.text in ")]":
                nesting -= 1
            last = self.advance()
        if last is None:
            raise self.error(f"expected {what}", [what])
        return self.source[start.offset:last.end], start

    def scalar(self) -> Scalar:
        text, start = self.span("scalar")
        try:
            return parse_scalar(text)
        except ValueError as e:
            raise ParseError(str(e), start.line, start.column, ["scalar"]) from e

    def transfer_class(self, expr: BundlePair) -> GradedClass:
        text, start = self.span("class")
        try:
            cls = parse_class(text)
        except (ValueError, DegreeMismatch) as e:
            raise ParseError(str(e), start.line, start.column, ["class"]) from e
        undeclared = [r for r in cls.root_names() if r not in self.workspace.roots]
        if undeclared:
            raise self.semantic(f"root {undeclared[0]} is not declared")
        try:
            TotalSpaceClass(expr, cls)
        except ValueError as e:
            raise self.semantic(str(e)) from e
        return cls

    def theory(self) -> TorsionTheory:
        head = self.name()
        if self.peek().text != "(":
            return self.lookup(head, "theory")
        if head.text not in THEORY_CONSTRUCTORS:
            raise ParseError(f"unknown theory {head.text!r}", head.line, head.column, sorted(THEORY_CONSTRUCTORS))
        self.expect("(")
        k = self.integer()
        try:
            if head.text == "custom":
                self.expect(",")
                s1 = self.scalar()
                self.expect(",")
                theory = TorsionTheory(k, s1, self.scalar())
            elif head.text == "fr":
                theory = fr_theory(k)
            else:
                theory = mmm_theory(k)
        except ValueError as e:
            raise self.semantic(str(e)) from e
        self.expect(")")
        return theory

    def bundle(self) -> VirtualBundle:
        result = self.bundle_term()
        while self.accept("+"):
            result = result + self.bundle_term()
        return result

    def bundle_term(self) -> VirtualBundle:
        head = self.name()
        if self.peek().text != "(":
            return self.lookup(head, "bundle")
        self.expect("(")
        if head.text == "line":
            root = self.name()
            self.lookup(root, "root")
            result = VirtualBundle.line(root.text)
        elif head.text == "trivial":
            result = VirtualBundle.trivial(self.integer())
        elif head.text == "complement":
            inner = self.bundle()
            self.expect(",")
            result = complement(inner, self.integer())
        else:
            raise ParseError(f"unknown bundle {head.text!r}", head.line, head.column, sorted(BUNDLE_CONSTRUCTORS))
        self.expect(")")
        return result

    def checked_expression(self) -> BundlePair:
        expr = self.expression()
        found = validate(expr, self.workspace)
        if found:
            raise self.semantic(str(found[0]))
        return expr

    def expression(self) -> BundlePair:
        head = self.name()
        if self.peek().text != "(":
            return self.lookup(head, "expression")
        kind = head.text
        if kind not in EXPR_CONSTRUCTORS:
            raise ParseError(f"unknown expression {kind!r}", head.line, head.column, sorted(EXPR_CONSTRUCTORS))
        self.expect("(")
        if kind == "sphere":
            xi = self.bundle()
            self.expect(",")
            node = SphereBundle(xi, self.keyword_int("n"))
        elif kind in ("disk", "reldisk"):
            xi = self.bundle()
            node = DiskBundle(xi) if kind == "disk" else RelDiskBundle(xi)
        elif kind in ("double", "dv"):
            inner = self.expression()
            node = Double(inner) if kind == "double" else VerticalBoundary(inner)
        elif kind in ("union", "glue", "prod"):
            first = self.expression()
            self.expect(",")
            second = self.expression()
            node = {"union": UnionVertical, "glue": UnionHandle, "prod": FiberProduct}[kind](first, second)
        elif kind == "morse":
            node = self.morse()
        elif kind == "hatcher":
            xi = self.bundle()
            self.expect(",")
            n = self.keyword_int("n")
            self.expect(",")
            node = Hatcher(xi, n, self.keyword_int("total"))
        else:
            node = self.trivial_pair()
        self.expect(")")
        return node

    def morse(self) -> MorseBundle:
        base = None
        if self.peek().text == "base" and self.peek(1).text == "=":
            self.advance()
            self.advance()
            base = self.expression()
            self.expect(",")
        self.expect("handles")
        self.expect("=")
        self.expect("[")
        handles = []
        while self.peek().text != "]":
            if handles:
                self.expect(",")
                if self.peek().text == "]":
                    break
            self.expect("(")
            index = self.integer()
            self.expect(",")
            xi = self.bundle()
            self.expect(",")
            eta = self.bundle()
            self.expect(")")
            handles.append(Handle(index, xi, eta))
        self.expect("]")
        return MorseBundle(base, tuple(handles))

    def trivial_pair(self) -> Trivial:
        values = {"n": None, "chi": 0, "d0": 0, "d1": 0, "corner": 0}
        while self.peek().text != ")":
            if self.peek().kind == "OP" and self.peek().text == ",":
                self.advance()
            key = self.name()
            if key.text not in values:
                raise ParseError(f"unknown field {key.text!r}", key.line, key.column, list(values))
            self.expect("=")
            values[key.text] = self.integer()
        if values["n"] is None:
            raise self.error("trivial pairs need n=", ["n="])
        n = values["n"]
        return Trivial(n, FiberStats(n, values["chi"], values["d0"], values["d1"], values["corner"]))


def parse(text: str) -> Script:
    """Parse and resolve a script; raises ParseError or SemanticError"""
    script = Parser(text).parse()
    logger.debug(f"📜 Parsed {len(script.statements)} statements")
    return script


# Rendering

def render_bundle(xi: VirtualBundle) -> str:
    return bundle_to_text(xi)


def render_theory(theory: TorsionTheory) -> str:
    if theory == fr_theory(theory.k):
        return f"fr({theory.k})"
    if theory == mmm_theory(theory.k):
        return f"mmm({theory.k})"
    return f"custom({theory.k}, {to_text(theory.s1)}, {to_text(theory.s2)})"


def render_expr(expr: BundlePair) -> str:
    """Inline expression text that parses back to an equal tree"""
    if isinstance(expr, Trivial):
        s = expr.stats
        return f"trivial(n={expr.dim}, chi={s.chiF}, d0={s.chiD0}, d1={s.chiD1}, corner={s.chiCorner})"
    if isinstance(expr, SphereBundle):
        return f"sphere({render_bundle(expr.xi)}, n={expr.n})"
    if isinstance(expr, DiskBundle):
        return f"disk({render_bundle(expr.xi)})"
    if isinstance(expr, RelDiskBundle):
        return f"reldisk({render_bundle(expr.xi)})"
    if isinstance(expr, Double):
        return f"double({render_expr(expr.inner)})"
    if isinstance(expr, VerticalBoundary):
        return f"dv({render_expr(expr.inner)})"
    if isinstance(expr, (UnionVertical, UnionHandle, FiberProduct)):
        keyword = {UnionVertical: "union", UnionHandle: "glue", FiberProduct: "prod"}[type(expr)]
        return f"{keyword}({render_expr(expr.first)}, {render_expr(expr.second)})"
    if isinstance(expr, MorseBundle):
        handles = ", ".join(
            f"({h.index}, {render_bundle(h.xi)}, {render_bundle(h.eta)})" for h in expr.handles
        )
        base = f"base={render_expr(expr.base)}, " if expr.base is not None else ""
        return f"morse({base}handles=[{handles}])"
    if isinstance(expr, Hatcher):
        return f"hatcher({render_bundle(expr.xi)}, n={expr.n}, total={expr.total_rank})"
    raise TypeError(f"cannot render {type(expr).__name__}")


def _render_arg(value: Any) -> str:
    if isinstance(value, TorsionTheory):
        return render_theory(value)
    if isinstance(value, BundlePair):
        return render_expr(value)
    return str(value)


def render_statement(statement: Any) -> str:
    if isinstance(statement, RootDecl):
        return f"root {statement.name}"
    if isinstance(statement, VbDef):
        return f"vb {statement.name} = {render_bundle(statement.bundle)}"
    if isinstance(statement, TheoryDef):
        return f"theory {statement.name} = {render_theory(statement.theory)}"
    if isinstance(statement, ExprDef):
        return f"{statement.name} = {render_expr(statement.expr)}"
    if isinstance(statement, Query):
        return f"query {statement.kind}({', '.join(_render_arg(a) for a in statement.args)})"
    raise TypeError(f"cannot render {type(statement).__name__}")


def render(script: Script) -> str:
    return "".join(render_statement(s) + "\n" for s in script.statements)


# Running

@dataclass
class ScriptRun:
    """Output lines of the queries that succeeded and messages of those that failed"""
    lines: List[str] = field(default_factory=list)
    errors: List[str] = field(default_factory=list)

    @property
    def exit_code(self) -> int:
        return 2 if self.errors else 0

    @property
    def output(self) -> str:
        return "".join(line + "\n" for line in self.lines)


def evaluate_query(query: Query) -> str:
    """Canonical text of one query result"""
    kind, args = query.kind, query.args
    if kind == "tau":
        return str(tau(*args))
    if kind == "tau_even":
        return str(tau_even(*args))
    if kind == "tau_odd":
        return str(tau_odd(*args))
    if kind == "tdelta":
        return str(difference_torsion(*args))
    if kind == "tau_abs":
        return str(tau_absolute(*args))
    if kind == "m2k":
        expr, k = args
        if k == 0:
            return format_rational(m2k_degree_zero(expr))
        return str(m2k_direct(expr, k))
    if kind == "chi":
        return str(stats(args[0]).chi_rel)
    if kind == "transfer":
        return str(TotalSpaceClass(*args).transfer())
    if kind == "decompose":
        a, b = decompose(args[0])
        return f"a={a} b={b}"
    raise TorsCalcError(f"unknown query {kind}")


def run(script: Script) -> ScriptRun:
    """Evaluate every query in order; a failing query is reported and skipped"""
    result = ScriptRun()
    for query in script.queries:
        try:
            result.lines.append(evaluate_query(query))
        except (TorsCalcError, ValueError) as e:
            logger.error(f"❌ Query {query.kind} on line {query.line} failed: {e}")
            result.errors.append(f"line {query.line}: {query.kind}: {e}")
    return result


def run_text(text: str) -> ScriptRun:
    return run(parse(text))
