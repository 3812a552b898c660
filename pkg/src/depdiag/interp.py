"""Concrete execution of checked programs with full trace recording.

A trace records one step per value written: assignments, and a synthetic
step at each call site for the returned value and for array arguments the
callee mutates.  Steps carry the statement id, the frame path (call-site
statement ids from the entry method down) and an iteration vector with one
1-based counter per enclosing loop in the current frame, so any executed
occurrence can be looked up later.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Optional

from . import syntax as S
from .errors import BudgetExceeded, MissingOutput, NotExecuted, RuntimeFault

DEFAULT_STEP_BUDGET = 10**6


@dataclass(frozen=True)
class Observation:
    """An ok/nok literal over a semantic anchor.

    Anchors are plain tuples:
      ("input", var)                       value of a parameter at entry
      ("final", var)                       value at the variable's last write
      ("after", sid, rounds, var, frames)  value after a statement execution
      ("cond", sid, rounds, frames)        a loop/if condition evaluation
    """
    anchor: tuple
    ok: bool


@dataclass(frozen=True)
class TraceStep:
    sid: int
    line: int
    var: str
    value: object
    itervec: tuple
    frames: tuple


@dataclass(frozen=True)
class CondEvent:
    sid: int
    value: bool
    itervec: tuple
    frames: tuple


@dataclass
class Trace:
    call: tuple  # (method, args)
    steps: list = field(default_factory=list)
    cond_events: list = field(default_factory=list)
    entry_env: dict = field(default_factory=dict)
    final_env: dict = field(default_factory=dict)
    after_env: dict = field(default_factory=dict)  # (sid, itervec, frames) -> env
    return_value: object = None


@dataclass
class TestCase:
    method: str
    args: list
    expect: dict
    expect_return: object = None
    has_expect_return: bool = False

    @staticmethod
    def from_json(data):
        if isinstance(data, str):
            data = json.loads(data)
        return TestCase(
            method=data["method"],
            args=list(data["args"]),
            expect=dict(data.get("expect", {})),
            expect_return=data.get("expect_return"),
            has_expect_return="expect_return" in data,
        )

    def to_json(self):
        out = {"method": self.method, "args": self.args, "expect": self.expect}
        if self.has_expect_return:
            out["expect_return"] = self.expect_return
        return out


def _copy(value):
    return list(value) if isinstance(value, list) else value


def _div(a, b, line):
    if b == 0:
        raise RuntimeFault("division by zero", line)
    q = abs(a) // abs(b)
    return q if (a >= 0) == (b >= 0) else -q


def _mod(a, b, line):
    return a - _div(a, b, line) * b


class _Interp:
    def __init__(self, program, budget):
        self.program = program.program if hasattr(program, "program") else program
        self.budget = budget
        self.trace = None
        self.steps_left = budget

    def run(self, method_name, args):
        method = self.program.method(method_name)
        if method is None:
            raise NotExecuted(f"no method {method_name}")
        if len(args) != len(method.params):
            raise RuntimeFault(
                f"{method_name} takes {len(method.params)} arguments", method.line)
        self.trace = Trace(call=(method_name, [_copy(a) for a in args]))
        env = {}
        for (pname, _), val in zip(method.params, args):
            env[pname] = _copy(val)
        self.trace.entry_env = {k: _copy(v) for k, v in env.items()}
        ret = self.exec_block(method.body, env, frames=(), loops=[])
        self.trace.final_env = {k: _copy(v) for k, v in env.items()}
        self.trace.return_value = ret
        return self.trace

    def tick(self, line):
        self.steps_left -= 1
        if self.steps_left < 0:
            raise BudgetExceeded(f"step budget exhausted at line {line}")

    def record(self, stmt_sid, line, var, value, frames, loops):
        self.trace.steps.append(
            TraceStep(stmt_sid, line, var, _copy(value), tuple(loops), frames))

    def snapshot(self, s, env, frames, loops):
        self.trace.after_env[(s.sid, tuple(loops), frames)] = \
            {k: _copy(v) for k, v in env.items()}

    def exec_block(self, stmts, env, frames, loops):
        for s in stmts:
            if isinstance(s, S.VarDecl):
                continue
            self.tick(s.line)
            if isinstance(s, S.Assign):
                value = self.eval(s.expr, env, frames, loops, s)
                if s.index is None:
                    env[s.target] = value
                else:
                    i = self.eval(s.index, env, frames, loops, s)
                    arr = env[s.target]
                    if not 0 <= i < len(arr):
                        raise RuntimeFault(
                            f"index {i} out of bounds for {s.target}", s.line)
                    arr[i] = value
                self.record(s.sid, s.line, s.target, env[s.target], frames, loops)
                self.snapshot(s, env, frames, loops)
            elif isinstance(s, S.If):
                c = self.eval(s.cond, env, frames, loops, s)
                self.trace.cond_events.append(
                    CondEvent(s.sid, c, tuple(loops), frames))
                self.exec_block(s.then if c else s.els, env, frames, loops)
                self.snapshot(s, env, frames, loops)
            elif isinstance(s, S.While):
                k = 0
                while True:
                    k += 1
                    c = self.eval(s.cond, env, frames, loops, s)
                    self.trace.cond_events.append(
                        CondEvent(s.sid, c, tuple(loops) + (k,), frames))
                    if not c:
                        break
                    self.tick(s.line)
                    self.exec_block(s.body, env, frames, loops + [k])
                self.snapshot(s, env, frames, loops)
            elif isinstance(s, S.CallStmt):
                self.call(s.call, env, frames, loops, s)
                self.snapshot(s, env, frames, loops)
            elif isinstance(s, S.Return):
                if s.expr is None:
                    return None
                return self.eval(s.expr, env, frames, loops, s)
        return None

    def eval(self, e, env, frames, loops, stmt):
        if isinstance(e, S.IntLit):
            return e.value
        if isinstance(e, S.BoolLit):
            return e.value
        if isinstance(e, S.Var):
            return env[e.name]
        if isinstance(e, S.Index):
            i = self.eval(e.index, env, frames, loops, stmt)
            arr = env[e.base]
            if not 0 <= i < len(arr):
                raise RuntimeFault(f"index {i} out of bounds for {e.base}", stmt.line)
            return arr[i]
        if isinstance(e, S.Unary):
            v = self.eval(e.operand, env, frames, loops, stmt)
            return -v if e.op == "-" else not v
        if isinstance(e, S.Binary):
            a = self.eval(e.left, env, frames, loops, stmt)
            if e.op == "&&":
                return bool(a) and bool(self.eval(e.right, env, frames, loops, stmt))
            if e.op == "||":
                return bool(a) or bool(self.eval(e.right, env, frames, loops, stmt))
            b = self.eval(e.right, env, frames, loops, stmt)
            op = e.op
            if op == "+":
                return a + b
            if op == "-":
                return a - b
            if op == "*":
                return a * b
            if op == "/":
                return _div(a, b, stmt.line)
            if op == "%":
                return _mod(a, b, stmt.line)
            if op == "==":
                return a == b
            if op == "!=":
                return a != b
            if op == "<":
                return a < b
            if op == "<=":
                return a <= b
            if op == ">":
                return a > b
            return a >= b
        if isinstance(e, S.CallExpr):
            return self.call(e, env, frames, loops, stmt)
        raise RuntimeFault(f"cannot evaluate {e!r}", stmt.line)

    def call(self, call, env, frames, loops, stmt):
        callee = self.program.method(call.method)
        args = [self.eval(a, env, frames, loops, stmt) for a in call.args]
        cenv = {}
        for (pname, pty), arg, aexpr in zip(callee.params, args, call.args):
            # arrays are passed by reference, scalars by value
            if pty == S.INT_ARRAY and isinstance(aexpr, S.Var):
                cenv[pname] = env[aexpr.name]
            else:
                cenv[pname] = _copy(arg)
        ret = self.exec_block(callee.body, cenv, frames + (stmt.sid,), [])
        mutated = mutated_params(callee)
        for (pname, pty), aexpr in zip(callee.params, call.args):
            if pname in mutated and isinstance(aexpr, S.Var):
                self.record(stmt.sid, stmt.line, aexpr.name, env[aexpr.name],
                            frames, loops)
        return ret


def mutated_params(method):
    """Parameters assigned (as scalar or element) anywhere in the method body."""
    names = {n for n, _ in method.params}
    out = set()
    for s in S.all_statements(method.body):
        if isinstance(s, S.Assign) and s.target in names:
            out.add(s.target)
    return out


def execute(program, method, args, budget=DEFAULT_STEP_BUDGET):
    """Run `method` on `args` and return the recorded trace."""
    return _Interp(program, budget).run(method, args)


def last_write(trace, var, sids, itervec=(), frames=()):
    """The last trace step writing `var` at one of `sids`, restricted to
    steps whose iteration vector starts with `itervec` in frame `frames`."""
    found = None
    for st in trace.steps:
        if (st.var == var and st.sid in sids and st.frames == frames
                and st.itervec[:len(itervec)] == tuple(itervec)):
            found = st
    return found


def lookup_value(trace, var, sid=None, itervec=(), frames=()):
    """Value of `var` immediately after statement `sid` executed.

    With `sid=None` the entry value of parameter `var` is returned.  Inside
    loops, `itervec` selects the iteration (a prefix is enough); the last
    matching execution wins.
    """
    if sid is None:
        if var not in trace.entry_env:
            raise NotExecuted(f"{var} is not a parameter of the traced call")
        return _copy(trace.entry_env[var])
    st = last_write(trace, var, {sid}, itervec, frames)
    if st is None:
        raise NotExecuted(
            f"{var} was not written by statement {sid} at iteration {itervec}")
    return _copy(st.value)


def cond_value(trace, sid, itervec=(), frames=()):
    found = None
    for ev in trace.cond_events:
        if (ev.sid == sid and ev.frames == frames
                and ev.itervec[:len(itervec)] == tuple(itervec)):
            found = ev
    if found is None:
        raise NotExecuted(f"condition of statement {sid} never evaluated at {itervec}")
    return found.value


def derive_observations(trace, test, program):
    """ok literals for every input, ok/nok per expected output."""
    prog = program.program if hasattr(program, "program") else program
    method = prog.method(test.method)
    obs = []
    for pname, _ in method.params:
        obs.append(Observation(("input", pname), True))
    assignable = {n for n, _ in method.params}
    for s in S.all_statements(method.body):
        if isinstance(s, S.Assign):
            assignable.add(s.target)
    for var, expected in sorted(test.expect.items()):
        if var not in assignable:
            raise MissingOutput(f"{var} is never assigned in {test.method}")
        if var not in trace.final_env:
            raise MissingOutput(f"{var} has no value in the trace")
        actual = trace.final_env[var]
        obs.append(Observation(("final", var), actual == expected))
    if test.has_expect_return:
        obs.append(Observation(("final", "@ret"),
                               trace.return_value == test.expect_return))
    return obs
