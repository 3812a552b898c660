"""Minimal diagnoses via conflict-directed hitting sets, plus the
value-propagation candidate filter.

The hitting-set search is a breadth-first HS-DAG: conflicts are produced on
demand by the consistency checker, reused across nodes when disjoint from
the node's path set, and supersets of found diagnoses are pruned, so the
returned set is exactly the subset-minimal diagnoses up to the cardinality
bound.
"""

from __future__ import annotations

from dataclasses import dataclass

from . import deps, logic
from . import syntax as S
from .errors import ObservationClash


def _sort_key(graph):
    def key(d):
        if graph is None:
            return (len(d), tuple(sorted(d)))
        lines = sorted(graph.components[c].line for c in d) or [0]
        return (len(d), lines[0], tuple(lines), tuple(sorted(d)))
    return key


def diagnose(sd, ok_occs, nok_occs, max_card=2, graph=None, stats=None,
             conflicts_out=None):
    """All subset-minimal diagnoses of cardinality <= max_card, ordered by
    (cardinality, earliest line)."""
    if set(ok_occs) & set(nok_occs):
        clash = sorted(set(ok_occs) & set(nok_occs))[0]
        raise ObservationClash(f"both ok and nok observed for {clash}")
    verdict = logic.check_consistency(sd, ok_occs, nok_occs, set(), stats)
    if verdict.consistent:
        return [frozenset()]
    if conflicts_out is None:
        conflicts_out = []
    conflicts = conflicts_out
    conflicts.append(verdict.conflict)
    diagnoses = []
    frontier = [(frozenset(), verdict.conflict)]
    seen = {frozenset()}
    for _ in range(max_card):
        nxt = []
        for h, cs in frontier:
            for c in sorted(cs):
                h2 = h | {c}
                if h2 in seen:
                    continue
                seen.add(h2)
                if any(d <= h2 for d in diagnoses):
                    continue
                reuse = next((k for k in conflicts if not (k & h2)), None)
                if reuse is None:
                    v = logic.check_consistency(sd, ok_occs, nok_occs, h2, stats)
                    if v.consistent:
                        diagnoses.append(h2)
                        continue
                    conflicts.append(v.conflict)
                    reuse = v.conflict
                nxt.append((h2, reuse))
        frontier = nxt
    return sorted(diagnoses, key=_sort_key(graph))


def brute_force_diagnoses(sd, ok_occs, nok_occs, max_card=None, checker=None):
    """Exhaustive enumeration over all AB assignments; search oracle for
    diagnose.  `checker` defaults to check_consistency but can be the
    truth-table decider for full independence."""
    from itertools import combinations

    if checker is None:
        checker = lambda ab: logic.check_consistency(  # noqa: E731
            sd, ok_occs, nok_occs, ab).consistent
    comps = sorted(sd.components)
    minimal = []
    top = len(comps) if max_card is None else max_card
    for k in range(top + 1):
        for combo in combinations(comps, k):
            cand = frozenset(combo)
            if any(d <= cand for d in minimal):
                continue
            if checker(cand):
                minimal.append(cand)
    return sorted(minimal, key=lambda d: (len(d), tuple(sorted(d))))


def minimal_hitting_sets(conflicts, max_card):
    """Subset-minimal hitting sets of size <= max_card for a fixed conflict
    collection."""
    conflicts = [frozenset(c) for c in conflicts]
    if not conflicts:
        return {frozenset()}
    results = []
    frontier = [frozenset()]
    seen = {frozenset()}
    for _ in range(max_card):
        nxt = []
        for h in frontier:
            miss = next((c for c in conflicts if not (c & h)), None)
            if miss is None:
                continue
            for el in sorted(miss):
                h2 = h | {el}
                if h2 in seen:
                    continue
                seen.add(h2)
                if any(r <= h2 for r in results):
                    continue
                if all(c & h2 for c in conflicts):
                    results.append(h2)
                else:
                    nxt.append(h2)
        frontier = nxt
    if all(c for c in conflicts) and not conflicts:
        return {frozenset()}
    return set(results)


def refine(graph, blamed):
    """Expand a blamed composite and recompile its system description."""
    g2 = deps.expand_component(graph, blamed)
    return g2, logic.compile_sd(g2)


# ------------------------------------------------------------- value filter

class _Unknown:
    def __repr__(self):
        return "?"


UNKNOWN = _Unknown()


def component_sids(graph, cid):
    """Statement ids covered by a component (composites cover their body)."""
    comp = graph.components[cid]
    prog = graph.program.program if hasattr(graph.program, "program") \
        else graph.program
    stmt = prog.statement(comp.sid)
    if comp.kind == "cond":
        return {comp.sid}
    if comp.composite or comp.kind == "call-glue":
        return {s.sid for s in S.all_statements([stmt])}
    return {comp.sid}


def value_filter(program, test, candidates, graph):
    """Drop candidates whose unconstrained statements cannot explain the
    expected outputs under concrete forward/backward value propagation."""
    prog = program.program if hasattr(program, "program") else program
    method = prog.method(test.method)
    survivors = []
    for delta in candidates:
        sids = set()
        for cid in delta:
            sids |= component_sids(graph, cid)
        if _contradicts(program, method, test, sids):
            continue
        survivors.append(delta)
    return survivors


def _is_straight_line(method):
    for s in method.body:
        if isinstance(s, (S.VarDecl,)):
            continue
        if isinstance(s, S.Assign) and not S.expr_calls(s.expr):
            continue
        if isinstance(s, S.Return) and (s.expr is None
                                        or not S.expr_calls(s.expr)):
            continue
        return False
    return True


def _contradicts(program, method, test, unconstrained):
    if _is_straight_line(method):
        return _ssa_contradicts(method, test, unconstrained)
    env = _abs_exec(program, method, test.args, unconstrained)
    if env is None:
        return False
    for var, expected in test.expect.items():
        actual = env.get(var, UNKNOWN)
        if actual is not UNKNOWN and actual != expected:
            return True
    if test.has_expect_return:
        ret = env.get("@ret", UNKNOWN)
        if ret is not UNKNOWN and ret != test.expect_return:
            return True
    return False


# -- straight-line SSA propagation

class _Clash(Exception):
    pass


def _ssa_contradicts(method, test, unconstrained):
    occ = {}  # var -> current index
    eqs = []  # (sid, target (var,idx), expr, binding snapshot)
    for s in method.body:
        if isinstance(s, S.VarDecl):
            continue
        binding = dict(occ)
        if isinstance(s, S.Assign):
            occ[s.target] = occ.get(s.target, 0) + 1
            eqs.append((s.sid, (s.target, occ[s.target]), s.expr, binding))
        elif isinstance(s, S.Return) and s.expr is not None:
            occ["@ret"] = 1
            eqs.append((s.sid, ("@ret", 1), s.expr, binding))
    vals = {}
    try:
        for (pname, _), arg in zip(method.params, test.args):
            _set(vals, (pname, 0), arg)
        for var, expected in test.expect.items():
            _set(vals, (var, occ.get(var, 0)), expected)
        if test.has_expect_return and "@ret" in occ:
            _set(vals, ("@ret", 1), test.expect_return)
        changed = True
        while changed:
            changed = False
            for sid, target, expr, binding in eqs:
                if sid in unconstrained:
                    continue
                changed |= _forward(vals, target, expr, binding)
                changed |= _backward(vals, target, expr, binding)
    except _Clash:
        return True
    return False


def _set(vals, key, value):
    if key in vals:
        if vals[key] != value:
            raise _Clash
        return False
    vals[key] = value
    return True


def _atom(vals, e, binding):
    if isinstance(e, S.IntLit):
        return e.value
    if isinstance(e, S.BoolLit):
        return e.value
    if isinstance(e, S.Var):
        return vals.get((e.name, binding.get(e.name, 0)), UNKNOWN)
    return None  # not an atom


def _eval_known(vals, e, binding):
    if isinstance(e, (S.IntLit, S.BoolLit, S.Var)):
        v = _atom(vals, e, binding)
        return UNKNOWN if v is None else v
    if isinstance(e, S.Unary):
        v = _eval_known(vals, e.operand, binding)
        if v is UNKNOWN:
            return UNKNOWN
        return -v if e.op == "-" else not v
    if isinstance(e, S.Binary):
        a = _eval_known(vals, e.left, binding)
        b = _eval_known(vals, e.right, binding)
        if a is UNKNOWN or b is UNKNOWN:
            return UNKNOWN
        return _apply(e.op, a, b)
    return UNKNOWN


def _apply(op, a, b):
    if op == "+":
        return a + b
    if op == "-":
        return a - b
    if op == "*":
        return a * b
    if op == "/":
        if b == 0:
            return UNKNOWN
        q = abs(a) // abs(b)
        return q if (a >= 0) == (b >= 0) else -q
    if op == "%":
        d = _apply("/", a, b)
        return UNKNOWN if d is UNKNOWN else a - d * b
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
    if op == ">=":
        return a >= b
    if op == "&&":
        return a and b
    return a or b


def _forward(vals, target, expr, binding):
    v = _eval_known(vals, expr, binding)
    if v is UNKNOWN:
        return False
    return _set(vals, target, v)


def _backward(vals, target, expr, binding):
    """Solve for a single unknown operand of an invertible expression."""
    tv = vals.get(target, UNKNOWN)
    if tv is UNKNOWN:
        return False
    if isinstance(expr, S.Var):
        key = (expr.name, binding.get(expr.name, 0))
        return _set(vals, key, tv)
    if isinstance(expr, S.Unary) and expr.op == "-" and isinstance(expr.operand, S.Var):
        key = (expr.operand.name, binding.get(expr.operand.name, 0))
        return _set(vals, key, -tv)
    if isinstance(expr, S.Binary) and expr.op in ("+", "-", "*"):
        a = _atom(vals, expr.left, binding)
        b = _atom(vals, expr.right, binding)
        if a is None or b is None:
            return False  # operands are not atoms; no backward step
        left_unknown = a is UNKNOWN
        right_unknown = b is UNKNOWN
        if left_unknown == right_unknown:
            return False
        unk_expr = expr.left if left_unknown else expr.right
        known = b if left_unknown else a
        if expr.op == "+":
            solved = tv - known
        elif expr.op == "-":
            solved = tv + known if left_unknown else (a - tv)
        else:  # *
            if known == 0:
                if tv != 0:
                    raise _Clash
                return False
            if tv % known != 0:
                raise _Clash
            solved = tv // known
        key = (unk_expr.name, binding.get(unk_expr.name, 0))
        return _set(vals, key, solved)
    return False


# -- general programs: forward abstract execution with havoc

def _abs_exec(program, method, args, unconstrained, budget=200000):
    prog = program.program if hasattr(program, "program") else program
    env = {}
    for (pname, _), arg in zip(method.params, args):
        env[pname] = list(arg) if isinstance(arg, list) else arg
    state = {"budget": budget}
    try:
        ret = _abs_block(prog, method.body, env, unconstrained, state)
    except (_Fuel, ZeroDivisionError):
        return None
    if ret is not UNKNOWN and ret is not None:
        env["@ret"] = ret
    return env


class _Fuel(Exception):
    pass


def _abs_block(prog, stmts, env, unconstrained, state):
    for s in stmts:
        state["budget"] -= 1
        if state["budget"] < 0:
            raise _Fuel
        if isinstance(s, S.VarDecl):
            continue
        if isinstance(s, S.Assign):
            if s.sid in unconstrained:
                env[s.target] = UNKNOWN
                continue
            v = _abs_eval(prog, s.expr, env, unconstrained, state)
            if s.index is None:
                env[s.target] = v
            else:
                i = _abs_eval(prog, s.index, env, unconstrained, state)
                arr = env.get(s.target, UNKNOWN)
                if arr is UNKNOWN or i is UNKNOWN:
                    env[s.target] = UNKNOWN
                elif 0 <= i < len(arr):
                    arr[i] = v
                else:
                    env[s.target] = UNKNOWN
        elif isinstance(s, S.If):
            c = UNKNOWN if s.sid in unconstrained else \
                _abs_eval(prog, s.cond, env, unconstrained, state)
            if c is UNKNOWN:
                for v in sorted(_havoc_vars(prog, s)):
                    env[v] = UNKNOWN
            else:
                _abs_block(prog, s.then if c else s.els, env, unconstrained, state)
        elif isinstance(s, S.While):
            while True:
                c = UNKNOWN if s.sid in unconstrained else \
                    _abs_eval(prog, s.cond, env, unconstrained, state)
                if c is UNKNOWN:
                    for v in sorted(_havoc_vars(prog, s)):
                        env[v] = UNKNOWN
                    break
                if not c:
                    break
                state["budget"] -= 1
                if state["budget"] < 0:
                    raise _Fuel
                _abs_block(prog, s.body, env, unconstrained, state)
        elif isinstance(s, S.CallStmt):
            _abs_eval(prog, s.call, env, unconstrained, state)
        elif isinstance(s, S.Return):
            if s.expr is None:
                return None
            return _abs_eval(prog, s.expr, env, unconstrained, state)
    return None


def _havoc_vars(prog, stmt):
    out = set()
    for s in S.all_statements([stmt]):
        if isinstance(s, S.Assign):
            out.add(s.target)
        for e in deps._stmt_exprs(s):
            for call in S.expr_calls(e):
                callee = prog.method(call.method)
                for (pname, pty), a in zip(callee.params, call.args):
                    if pty == S.INT_ARRAY and isinstance(a, S.Var):
                        out.add(a.name)
    return out


def _abs_eval(prog, e, env, unconstrained, state):
    if isinstance(e, S.IntLit):
        return e.value
    if isinstance(e, S.BoolLit):
        return e.value
    if isinstance(e, S.Var):
        return env.get(e.name, UNKNOWN)
    if isinstance(e, S.Index):
        arr = env.get(e.base, UNKNOWN)
        i = _abs_eval(prog, e.index, env, unconstrained, state)
        if arr is UNKNOWN or i is UNKNOWN or not 0 <= i < len(arr):
            return UNKNOWN
        return arr[i]
    if isinstance(e, S.Unary):
        v = _abs_eval(prog, e.operand, env, unconstrained, state)
        if v is UNKNOWN:
            return UNKNOWN
        return -v if e.op == "-" else not v
    if isinstance(e, S.Binary):
        a = _abs_eval(prog, e.left, env, unconstrained, state)
        b = _abs_eval(prog, e.right, env, unconstrained, state)
        if a is UNKNOWN or b is UNKNOWN:
            return UNKNOWN
        return _apply(e.op, a, b)
    if isinstance(e, S.CallExpr):
        callee = prog.method(e.method)
        cenv = {}
        for (pname, pty), a in zip(callee.params, e.args):
            av = _abs_eval(prog, a, env, unconstrained, state)
            if pty == S.INT_ARRAY and isinstance(a, S.Var):
                cenv[pname] = env.get(a.name, UNKNOWN)
            else:
                cenv[pname] = av
        ret = _abs_block(prog, callee.body, cenv, unconstrained, state)
        for (pname, pty), a in zip(callee.params, e.args):
            if pty == S.INT_ARRAY and isinstance(a, S.Var):
                env[a.name] = cenv.get(pname, UNKNOWN)
        return ret
    return UNKNOWN
