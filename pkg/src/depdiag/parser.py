"""Recursive descent parser for `.mjv` sources.

Grammar (informally):

    program    := classdecl | methoddecl+
    classdecl  := "class" IDENT "{" methoddecl* "}"
    methoddecl := modifier* ("void"|type) IDENT "(" params ")" block
    params     := [type IDENT ("," [type] IDENT)*]       -- shared-type shorthand allowed
    stmt       := type declarator ("," declarator)* ";"
                | lvalue "=" expr ";"
                | "if" "(" expr ")" block ["else" block]
                | "while" "(" expr ")" block
                | IDENT "(" args ")" ";"
                | "return" [expr] ";"
    declarator := IDENT ["=" expr]
    lvalue     := IDENT | IDENT "[" expr "]"

Comments run from `//` to end of line.  `public`/`static` modifiers are
accepted and ignored so sources written in Java style parse unchanged.
A declarator with an initializer produces a separate assignment statement
on the same line; pure declarations are not executable.
"""

from __future__ import annotations

import re

from . import syntax as S
from .errors import ParseError

KEYWORDS = {
    "class", "void", "int", "boolean", "if", "else", "while", "return",
    "true", "false", "public", "static",
}

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<comment>//[^\n]*)
  | (?P<num>\d+)
  | (?P<ident>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<op>&&|\|\||==|!=|<=|>=|[+\-*/%<>=!(){}\[\],;])
    """,
    re.VERBOSE,
)


class Token:
    __slots__ = ("kind", "text", "line", "col", "pos")

    def __init__(self, kind, text, line, col, pos):
        self.kind = kind
        self.text = text
        self.line = line
        self.col = col
        self.pos = pos

    def __repr__(self):
        return f"Token({self.kind},{self.text!r},{self.line}:{self.col})"


def tokenize(source):
    tokens = []
    pos = 0
    line = 1
    line_start = 0
    n = len(source)
    while pos < n:
        m = _TOKEN_RE.match(source, pos)
        if m is None:
            col = pos - line_start + 1
            raise ParseError(f"unexpected character {source[pos]!r}", line, col)
        kind = m.lastgroup
        text = m.group()
        if kind not in ("ws", "comment"):
            col = m.start() - line_start + 1
            if kind == "ident" and text in KEYWORDS:
                kind = "kw"
            tokens.append(Token(kind, text, line, col, m.start()))
        nl = text.count("\n")
        if nl:
            line += nl
            line_start = m.start() + text.rindex("\n") + 1
        pos = m.end()
    tokens.append(Token("eof", "", line, pos - line_start + 1, pos))
    return tokens


class Parser:
    def __init__(self, source, source_name="<string>"):
        self.source = source
        self.source_name = source_name
        self.tokens = tokenize(source)
        self.i = 0
        self.next_sid = 0

    # ---------------------------------------------------------------- helpers

    @property
    def cur(self):
        return self.tokens[self.i]

    def advance(self):
        tok = self.tokens[self.i]
        if tok.kind != "eof":
            self.i += 1
        return tok

    def error(self, expected):
        tok = self.cur
        got = tok.text if tok.kind != "eof" else "end of input"
        raise ParseError(f"expected {expected}, got {got!r}", tok.line, tok.col)

    def expect(self, text):
        if self.cur.text != text or self.cur.kind == "eof":
            self.error(repr(text))
        return self.advance()

    def accept(self, text):
        if self.cur.text == text and self.cur.kind != "eof":
            return self.advance()
        return None

    def fresh_sid(self):
        sid = self.next_sid
        self.next_sid += 1
        return sid

    # ---------------------------------------------------------------- program

    def parse_program(self):
        methods = []
        class_name = None
        if self.cur.text == "class":
            self.advance()
            if self.cur.kind != "ident":
                self.error("class name")
            class_name = self.advance().text
            self.expect("{")
            while self.cur.text != "}":
                methods.append(self.parse_method())
            self.expect("}")
        else:
            while self.cur.kind != "eof":
                methods.append(self.parse_method())
        if not methods:
            self.error("a method declaration")
        if self.cur.kind != "eof":
            self.error("end of input")
        return S.Program(methods, self.source_name, self.source, class_name)

    def parse_type(self):
        tok = self.cur
        if tok.text not in ("int", "boolean"):
            self.error("a type")
        self.advance()
        base = tok.text
        if self.accept("["):
            self.expect("]")
            if base != "int":
                self.error("int[]")
            return S.INT_ARRAY
        return base

    def at_type(self):
        return self.cur.text in ("int", "boolean")

    def parse_method(self):
        while self.cur.text in ("public", "static"):
            self.advance()
        line = self.cur.line
        if self.cur.text == "void":
            rtype = S.VOID
            self.advance()
        elif self.at_type():
            rtype = self.parse_type()
        else:
            self.error("a return type")
        if self.cur.kind != "ident":
            self.error("a method name")
        name = self.advance().text
        self.expect("(")
        params = []
        if self.cur.text != ")":
            ptype = self.parse_type()
            if self.cur.kind != "ident":
                self.error("a parameter name")
            params.append((self.advance().text, ptype))
            while self.accept(","):
                if self.at_type():
                    ptype = self.parse_type()
                # else: shared-type shorthand, reuse the previous type
                if self.cur.kind != "ident":
                    self.error("a parameter name")
                params.append((self.advance().text, ptype))
        self.expect(")")
        body = self.parse_block()
        return S.MethodDecl(name, params, rtype, body, line)

    def parse_block(self):
        self.expect("{")
        stmts = []
        while self.cur.text != "}":
            stmts.extend(self.parse_stmt())
        self.expect("}")
        return stmts

    # -------------------------------------------------------------- statements

    def parse_stmt(self):
        """Parse one source statement; declarations with initializers expand
        into a declaration plus assignment statements, hence the list."""
        tok = self.cur
        if tok.kind == "eof":
            self.error("a statement")
        start = tok.pos
        line = tok.line

        if self.at_type():
            ty = self.parse_type()
            decls = []
            inits = []
            while True:
                if self.cur.kind != "ident":
                    self.error("a variable name")
                name = self.advance().text
                decls.append((name, ty))
                if self.accept("="):
                    inits.append((name, self.parse_expr()))
                if not self.accept(","):
                    break
            end_tok = self.expect(";")
            span = (start, end_tok.pos + 1)
            out = [S.VarDecl(self.fresh_sid(), line, span, decls)]
            for name, expr in inits:
                out.append(S.Assign(self.fresh_sid(), line, span, name, None, expr,
                                    from_decl=True))
            return out

        if tok.text == "if":
            self.advance()
            self.expect("(")
            cond = self.parse_expr()
            close = self.expect(")")
            sid = self.fresh_sid()
            then = self.parse_block()
            els = []
            if self.accept("else"):
                els = self.parse_block()
            span = (start, close.pos + 1)
            return [S.If(sid, line, span, cond, then, els)]

        if tok.text == "while":
            self.advance()
            self.expect("(")
            cond = self.parse_expr()
            close = self.expect(")")
            sid = self.fresh_sid()
            body = self.parse_block()
            span = (start, close.pos + 1)
            return [S.While(sid, line, span, cond, body)]

        if tok.text == "return":
            self.advance()
            expr = None
            if self.cur.text != ";":
                expr = self.parse_expr()
            end_tok = self.expect(";")
            return [S.Return(self.fresh_sid(), line, (start, end_tok.pos + 1), expr)]

        if tok.kind == "ident":
            name = self.advance().text
            if self.cur.text == "(":
                call = self.parse_call(name)
                end_tok = self.expect(";")
                return [S.CallStmt(self.fresh_sid(), line, (start, end_tok.pos + 1), call)]
            index = None
            if self.accept("["):
                index = self.parse_expr()
                self.expect("]")
            self.expect("=")
            expr = self.parse_expr()
            end_tok = self.expect(";")
            return [S.Assign(self.fresh_sid(), line, (start, end_tok.pos + 1),
                             name, index, expr)]

        self.error("a statement")

    def parse_call(self, name):
        self.expect("(")
        args = []
        if self.cur.text != ")":
            args.append(self.parse_expr())
            while self.accept(","):
                args.append(self.parse_expr())
        self.expect(")")
        return S.CallExpr(name, args)

    # ------------------------------------------------------------- expressions

    def parse_expr(self):
        return self.parse_or()

    def parse_or(self):
        e = self.parse_and()
        while self.cur.text == "||":
            self.advance()
            e = S.Binary("||", e, self.parse_and())
        return e

    def parse_and(self):
        e = self.parse_equality()
        while self.cur.text == "&&":
            self.advance()
            e = S.Binary("&&", e, self.parse_equality())
        return e

    def parse_equality(self):
        e = self.parse_relational()
        while self.cur.text in ("==", "!="):
            op = self.advance().text
            e = S.Binary(op, e, self.parse_relational())
        return e

    def parse_relational(self):
        e = self.parse_additive()
        while self.cur.text in ("<", "<=", ">", ">="):
            op = self.advance().text
            e = S.Binary(op, e, self.parse_additive())
        return e

    def parse_additive(self):
        e = self.parse_multiplicative()
        while self.cur.text in ("+", "-"):
            op = self.advance().text
            e = S.Binary(op, e, self.parse_multiplicative())
        return e

    def parse_multiplicative(self):
        e = self.parse_unary()
        while self.cur.text in ("*", "/", "%"):
            op = self.advance().text
            e = S.Binary(op, e, self.parse_unary())
        return e

    def parse_unary(self):
        if self.cur.text in ("-", "!"):
            op = self.advance().text
            return S.Unary(op, self.parse_unary())
        return self.parse_primary()

    def parse_primary(self):
        tok = self.cur
        if tok.kind == "num":
            self.advance()
            return S.IntLit(int(tok.text))
        if tok.text == "true":
            self.advance()
            return S.BoolLit(True)
        if tok.text == "false":
            self.advance()
            return S.BoolLit(False)
        if tok.text == "(":
            self.advance()
            e = self.parse_expr()
            self.expect(")")
            return e
        if tok.kind == "ident":
            name = self.advance().text
            if self.cur.text == "(":
                return self.parse_call(name)
            if self.accept("["):
                idx = self.parse_expr()
                self.expect("]")
                return S.Index(name, idx)
            return S.Var(name)
        self.error("an expression")


def parse(source, source_name="<string>"):
    return Parser(source, source_name).parse_program()


def locate(program, sid):
    """Line number and verbatim source excerpt for a statement."""
    from .errors import UnknownStatementError

    stmt = program.statement(sid)
    if stmt is None:
        raise UnknownStatementError(f"no statement with id {sid}")
    start, end = stmt.span
    return stmt.line, program.source_text[start:end].strip()
