"""AST node definitions and pretty printing for the mini-language.

Types are plain strings: "int", "boolean", "int[]", "void".
Statement ids are assigned sequentially in parse order and are stable
for a given source text.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

INT = "int"
BOOLEAN = "boolean"
INT_ARRAY = "int[]"
VOID = "void"

TYPES = (INT, BOOLEAN, INT_ARRAY)

BINARY_OPS = ("+", "-", "*", "/", "%", "==", "!=", "<", "<=", ">", ">=", "&&", "||")
UNARY_OPS = ("-", "!")


# ---------------------------------------------------------------- expressions

@dataclass(eq=False)
class Expr:
    ty: Optional[str] = field(default=None, init=False, compare=False)


@dataclass(eq=False)
class IntLit(Expr):
    value: int


@dataclass(eq=False)
class BoolLit(Expr):
    value: bool


@dataclass(eq=False)
class Var(Expr):
    name: str


@dataclass(eq=False)
class Index(Expr):
    base: str
    index: Expr


@dataclass(eq=False)
class Unary(Expr):
    op: str
    operand: Expr


@dataclass(eq=False)
class Binary(Expr):
    op: str
    left: Expr
    right: Expr


@dataclass(eq=False)
class CallExpr(Expr):
    method: str
    args: list


# ----------------------------------------------------------------- statements

@dataclass(eq=False)
class Stmt:
    sid: int
    line: int
    span: tuple  # (start, end) offsets into the source text


@dataclass(eq=False)
class VarDecl(Stmt):
    decls: list  # list of (name, type)


@dataclass(eq=False)
class Assign(Stmt):
    target: str
    index: Optional[Expr]  # element assignment when not None
    expr: Expr
    from_decl: bool = False  # came from an initialized declarator


@dataclass(eq=False)
class If(Stmt):
    cond: Expr
    then: list
    els: list


@dataclass(eq=False)
class While(Stmt):
    cond: Expr
    body: list


@dataclass(eq=False)
class CallStmt(Stmt):
    call: CallExpr


@dataclass(eq=False)
class Return(Stmt):
    expr: Optional[Expr]


@dataclass(eq=False)
class MethodDecl:
    name: str
    params: list  # ordered (name, type)
    return_type: str
    body: list
    line: int
    locals: list = field(default_factory=list)  # (name, type), collected by the checker


@dataclass(eq=False)
class Program:
    methods: list
    source_name: str
    source_text: str
    class_name: Optional[str] = None

    def method(self, name):
        for m in self.methods:
            if m.name == name:
                return m
        return None

    def statements(self):
        """All statements of all methods, in parse order."""
        out = []
        for m in self.methods:
            _collect(m.body, out)
        return out

    def statement(self, sid):
        for s in self.statements():
            if s.sid == sid:
                return s
        return None


def all_statements(stmts):
    out = []
    _collect(stmts, out)
    return out


def _collect(stmts, out):
    for s in stmts:
        out.append(s)
        if isinstance(s, If):
            _collect(s.then, out)
            _collect(s.els, out)
        elif isinstance(s, While):
            _collect(s.body, out)


def executable(stmts):
    """Executable statements of a block: everything but pure declarations."""
    return [s for s in stmts if not isinstance(s, VarDecl)]


def expr_vars(e):
    """Variable names read by an expression (array reads count the array)."""
    out = []

    def walk(x):
        if isinstance(x, Var):
            out.append(x.name)
        elif isinstance(x, Index):
            out.append(x.base)
            walk(x.index)
        elif isinstance(x, Unary):
            walk(x.operand)
        elif isinstance(x, Binary):
            walk(x.left)
            walk(x.right)
        elif isinstance(x, CallExpr):
            for a in x.args:
                walk(a)

    walk(e)
    return out


def expr_calls(e):
    out = []

    def walk(x):
        if isinstance(x, CallExpr):
            out.append(x)
            for a in x.args:
                walk(a)
        elif isinstance(x, Index):
            walk(x.index)
        elif isinstance(x, Unary):
            walk(x.operand)
        elif isinstance(x, Binary):
            walk(x.left)
            walk(x.right)

    walk(e)
    return out


def subexpressions(e):
    """All sub-expressions of e, outermost first."""
    out = []

    def walk(x):
        out.append(x)
        if isinstance(x, Index):
            walk(x.index)
        elif isinstance(x, Unary):
            walk(x.operand)
        elif isinstance(x, Binary):
            walk(x.left)
            walk(x.right)
        elif isinstance(x, CallExpr):
            for a in x.args:
                walk(a)

    walk(e)
    return out


# -------------------------------------------------------------- pretty printer

_PREC = {
    "||": 1, "&&": 2,
    "==": 3, "!=": 3, "<": 4, "<=": 4, ">": 4, ">=": 4,
    "+": 5, "-": 5, "*": 6, "/": 6, "%": 6,
}


def format_expr(e, parent_prec=0):
    if isinstance(e, IntLit):
        return str(e.value)
    if isinstance(e, BoolLit):
        return "true" if e.value else "false"
    if isinstance(e, Var):
        return e.name
    if isinstance(e, Index):
        return f"{e.base}[{format_expr(e.index)}]"
    if isinstance(e, Unary):
        s = f"{e.op}{format_expr(e.operand, 7)}"
        return s
    if isinstance(e, Binary):
        prec = _PREC[e.op]
        s = f"{format_expr(e.left, prec)} {e.op} {format_expr(e.right, prec + 1)}"
        if prec < parent_prec:
            return f"({s})"
        return s
    if isinstance(e, CallExpr):
        return f"{e.method}({', '.join(format_expr(a) for a in e.args)})"
    raise TypeError(f"unknown expression node {e!r}")


def format_stmt(s, indent):
    pad = "    " * indent
    if isinstance(s, VarDecl):
        by_type = {}
        for name, ty in s.decls:
            by_type.setdefault(ty, []).append(name)
        return [pad + f"{ty} {', '.join(names)};" for ty, names in by_type.items()]
    if isinstance(s, Assign):
        lhs = s.target if s.index is None else f"{s.target}[{format_expr(s.index)}]"
        return [pad + f"{lhs} = {format_expr(s.expr)};"]
    if isinstance(s, If):
        lines = [pad + f"if ({format_expr(s.cond)}) {{"]
        for c in s.then:
            lines += format_stmt(c, indent + 1)
        if s.els:
            lines.append(pad + "} else {")
            for c in s.els:
                lines += format_stmt(c, indent + 1)
        lines.append(pad + "}")
        return lines
    if isinstance(s, While):
        lines = [pad + f"while ({format_expr(s.cond)}) {{"]
        for c in s.body:
            lines += format_stmt(c, indent + 1)
        lines.append(pad + "}")
        return lines
    if isinstance(s, CallStmt):
        return [pad + format_expr(s.call) + ";"]
    if isinstance(s, Return):
        if s.expr is None:
            return [pad + "return;"]
        return [pad + f"return {format_expr(s.expr)};"]
    raise TypeError(f"unknown statement node {s!r}")


def pretty_print(program):
    lines = []
    indent = 0
    if program.class_name is not None:
        lines.append(f"class {program.class_name} {{")
        indent = 1
    for m in program.methods:
        pad = "    " * indent
        params = ", ".join(f"{t} {n}" for n, t in m.params)
        lines.append(pad + f"{m.return_type} {m.name}({params}) {{")
        for s in m.body:
            lines += format_stmt(s, indent + 1)
        lines.append(pad + "}")
    if program.class_name is not None:
        lines.append("}")
    return "\n".join(lines) + "\n"


# --------------------------------------------------------- structural equality

def normalize_expr(e):
    if isinstance(e, IntLit):
        return ("int", e.value)
    if isinstance(e, BoolLit):
        return ("bool", e.value)
    if isinstance(e, Var):
        return ("var", e.name)
    if isinstance(e, Index):
        return ("index", e.base, normalize_expr(e.index))
    if isinstance(e, Unary):
        return ("unary", e.op, normalize_expr(e.operand))
    if isinstance(e, Binary):
        return ("binary", e.op, normalize_expr(e.left), normalize_expr(e.right))
    if isinstance(e, CallExpr):
        return ("call", e.method, tuple(normalize_expr(a) for a in e.args))
    raise TypeError


def normalize_stmt(s):
    if isinstance(s, VarDecl):
        return ("decl", tuple(sorted(s.decls)))
    if isinstance(s, Assign):
        idx = None if s.index is None else normalize_expr(s.index)
        return ("assign", s.target, idx, normalize_expr(s.expr))
    if isinstance(s, If):
        return ("if", normalize_expr(s.cond),
                tuple(normalize_stmt(c) for c in s.then),
                tuple(normalize_stmt(c) for c in s.els))
    if isinstance(s, While):
        return ("while", normalize_expr(s.cond),
                tuple(normalize_stmt(c) for c in s.body))
    if isinstance(s, CallStmt):
        return ("callstmt", normalize_expr(s.call))
    if isinstance(s, Return):
        return ("return", None if s.expr is None else normalize_expr(s.expr))
    raise TypeError


def normalize_program(p):
    return tuple(
        (m.name, tuple(m.params), m.return_type,
         tuple(normalize_stmt(s) for s in m.body))
        for m in p.methods
    )


def structurally_equal(p1, p2):
    return normalize_program(p1) == normalize_program(p2)
