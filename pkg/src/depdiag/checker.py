"""Name resolution, type checking and static well-formedness checks.

Beyond names and types the checker enforces three shape rules the rest of
the toolkit relies on:

  * method names are unique and calls resolve within the program
  * every local is definitely assigned before it is read
  * `return` may only appear as the last statement of a method body
"""

from __future__ import annotations

from dataclasses import dataclass

from . import syntax as S
from .errors import ArityError, NameResolutionError, TypeCheckError


@dataclass
class CheckedProgram:
    program: S.Program

    def method(self, name):
        return self.program.method(name)

    @property
    def methods(self):
        return self.program.methods

    @property
    def source_text(self):
        return self.program.source_text


def check(program):
    seen = set()
    for m in program.methods:
        if m.name in seen:
            raise NameResolutionError(f"duplicate method {m.name}", m.line)
        seen.add(m.name)
    sigs = {m.name: m for m in program.methods}
    for m in program.methods:
        _check_method(m, sigs)
    return CheckedProgram(program)


def _check_method(method, sigs):
    names = set()
    env = {}
    for name, ty in method.params:
        if name in names:
            raise NameResolutionError(
                f"duplicate parameter {name} in {method.name}", method.line)
        names.add(name)
        env[name] = ty
    method.locals = []
    for s in _all_stmts(method.body):
        if isinstance(s, S.VarDecl):
            for name, ty in s.decls:
                if name in env:
                    raise NameResolutionError(f"duplicate declaration of {name}", s.line)
                env[name] = ty
                method.locals.append((name, ty))
    _check_block(method, method.body, env, sigs, top=True)
    assigned = set(n for n, _ in method.params)
    _check_assigned(method.body, assigned, method)


def _all_stmts(stmts):
    out = []
    S._collect(stmts, out)
    return out


def _check_block(method, stmts, env, sigs, top=False):
    for i, s in enumerate(stmts):
        if isinstance(s, S.Return):
            last = i == len(stmts) - 1
            if not (top and last):
                raise TypeCheckError(
                    "return is only allowed as the last statement of a method body",
                    s.line)
            if s.expr is None:
                if method.return_type != S.VOID:
                    raise TypeCheckError(
                        f"{method.name} must return {method.return_type}", s.line)
            else:
                ty = _type_expr(s.expr, env, sigs, s.line)
                if ty != method.return_type:
                    raise TypeCheckError(
                        f"return type mismatch: {ty} vs {method.return_type}", s.line)
        elif isinstance(s, S.VarDecl):
            pass
        elif isinstance(s, S.Assign):
            _check_assign(s, env, sigs)
        elif isinstance(s, S.If):
            if _type_expr(s.cond, env, sigs, s.line) != S.BOOLEAN:
                raise TypeCheckError("if condition must be boolean", s.line)
            _check_block(method, s.then, env, sigs)
            _check_block(method, s.els, env, sigs)
        elif isinstance(s, S.While):
            if _type_expr(s.cond, env, sigs, s.line) != S.BOOLEAN:
                raise TypeCheckError("while condition must be boolean", s.line)
            _check_block(method, s.body, env, sigs)
        elif isinstance(s, S.CallStmt):
            _type_call(s.call, env, sigs, s.line)


def _check_assign(s, env, sigs):
    if s.target not in env:
        raise NameResolutionError(f"undeclared variable {s.target}", s.line)
    tty = env[s.target]
    if s.index is not None:
        if tty != S.INT_ARRAY:
            raise TypeCheckError(f"{s.target} is not an array", s.line)
        if _type_expr(s.index, env, sigs, s.line) != S.INT:
            raise TypeCheckError("array index must be int", s.line)
        tty = S.INT
    ety = _type_expr(s.expr, env, sigs, s.line)
    if ety != tty:
        raise TypeCheckError(
            f"cannot assign {ety} to {tty} variable {s.target}", s.line)


def _type_expr(e, env, sigs, line):
    if isinstance(e, S.IntLit):
        e.ty = S.INT
    elif isinstance(e, S.BoolLit):
        e.ty = S.BOOLEAN
    elif isinstance(e, S.Var):
        if e.name not in env:
            raise NameResolutionError(f"undeclared variable {e.name}", line)
        e.ty = env[e.name]
    elif isinstance(e, S.Index):
        if e.base not in env:
            raise NameResolutionError(f"undeclared variable {e.base}", line)
        if env[e.base] != S.INT_ARRAY:
            raise TypeCheckError(f"{e.base} is not an array", line)
        if _type_expr(e.index, env, sigs, line) != S.INT:
            raise TypeCheckError("array index must be int", line)
        e.ty = S.INT
    elif isinstance(e, S.Unary):
        ot = _type_expr(e.operand, env, sigs, line)
        if e.op == "-":
            if ot != S.INT:
                raise TypeCheckError("unary - needs int", line)
            e.ty = S.INT
        else:
            if ot != S.BOOLEAN:
                raise TypeCheckError("! needs boolean", line)
            e.ty = S.BOOLEAN
    elif isinstance(e, S.Binary):
        lt = _type_expr(e.left, env, sigs, line)
        rt = _type_expr(e.right, env, sigs, line)
        op = e.op
        if op in ("+", "-", "*", "/", "%"):
            if lt != S.INT or rt != S.INT:
                raise TypeCheckError(f"{op} needs int operands", line)
            e.ty = S.INT
        elif op in ("<", "<=", ">", ">="):
            if lt != S.INT or rt != S.INT:
                raise TypeCheckError(f"{op} needs int operands", line)
            e.ty = S.BOOLEAN
        elif op in ("==", "!="):
            if lt != rt or lt == S.INT_ARRAY:
                raise TypeCheckError(f"{op} needs matching scalar operands", line)
            e.ty = S.BOOLEAN
        else:  # && ||
            if lt != S.BOOLEAN or rt != S.BOOLEAN:
                raise TypeCheckError(f"{op} needs boolean operands", line)
            e.ty = S.BOOLEAN
    elif isinstance(e, S.CallExpr):
        e.ty = _type_call(e, env, sigs, line)
        if e.ty == S.VOID:
            raise TypeCheckError(f"void call {e.method} used as a value", line)
    else:
        raise TypeCheckError(f"unknown expression {e!r}", line)
    return e.ty


def _type_call(call, env, sigs, line):
    if call.method not in sigs:
        raise NameResolutionError(f"unknown method {call.method}", line)
    sig = sigs[call.method]
    if len(call.args) != len(sig.params):
        raise ArityError(
            f"{call.method} takes {len(sig.params)} arguments, got {len(call.args)}",
            line)
    for a, (pname, pty) in zip(call.args, sig.params):
        aty = _type_expr(a, env, sigs, line)
        if aty != pty:
            raise TypeCheckError(
                f"argument {pname} of {call.method}: expected {pty}, got {aty}", line)
    return sig.return_type


def _check_assigned(stmts, assigned, method):
    """Definite-assignment: every read happens after an assignment on all paths."""
    for s in stmts:
        if isinstance(s, S.VarDecl):
            continue
        if isinstance(s, S.Assign):
            _require(S.expr_vars(s.expr), assigned, s, method)
            if s.index is not None:
                _require([s.target], assigned, s, method)
                _require(S.expr_vars(s.index), assigned, s, method)
            for c in S.expr_calls(s.expr):
                pass
            assigned.add(s.target)
        elif isinstance(s, S.If):
            _require(S.expr_vars(s.cond), assigned, s, method)
            a1 = set(assigned)
            _check_assigned(s.then, a1, method)
            a2 = set(assigned)
            _check_assigned(s.els, a2, method)
            assigned |= a1 & a2
        elif isinstance(s, S.While):
            _require(S.expr_vars(s.cond), assigned, s, method)
            a1 = set(assigned)
            _check_assigned(s.body, a1, method)
            # loop may run zero times: nothing new is definitely assigned
        elif isinstance(s, S.CallStmt):
            for a in s.call.args:
                _require(S.expr_vars(a), assigned, s, method)
        elif isinstance(s, S.Return):
            if s.expr is not None:
                _require(S.expr_vars(s.expr), assigned, s, method)


def _require(names, assigned, stmt, method):
    for n in names:
        if n not in assigned:
            raise TypeCheckError(
                f"{n} may be read before assignment in {method.name}", stmt.line)
