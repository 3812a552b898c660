"""Variable occurrence indexing, functional dependencies and the component graph.

Every assignment target gets a fresh per-variable index (inputs are index 0),
uses bind to the occurrence currently in scope, and each diagnosable component
contributes one functional dependency pair per value it establishes.

Granularity is a set of "expanded" statement ids: conditionals, loops and
call statements start folded into single composite components and are only
sub-divided once blamed.  Expanded loops are unrolled a bounded number of
rounds (one per assigned variable) so loop-carried dependencies are captured
while the occurrence graph stays acyclic.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from . import syntax as S
from .errors import CycleDetected, NotComposite, RecursionUnsupported


@dataclass(frozen=True, order=True)
class Occ:
    var: str
    index: int

    def __post_init__(self):
        # hashed constantly during propagation; cache the value
        object.__setattr__(self, "_hash", hash((self.var, self.index)))

    def __hash__(self):
        return self._hash

    def __str__(self):
        return f"{self.var}#{self.index}"


@dataclass(frozen=True)
class FD:
    target: Occ
    antecedents: frozenset


@dataclass
class Component:
    cid: str
    kind: str  # "assign" | "return" | "if" | "while" | "call" | "cond"
    sid: int
    line: int
    lines: frozenset
    fds: list = field(default_factory=list)
    frames: tuple = ()

    @property
    def composite(self):
        return self.kind in ("if", "while", "call")


@dataclass
class OccInfo:
    occ: Occ
    var_display: str  # source variable name; None for condition occurrences
    kind: str  # "input" | "target" | "region" | "merge" | "cond" | "param"
    sid: object  # defining statement id (None for inputs)
    rounds: tuple
    frames: tuple
    region: frozenset  # statement ids whose trace writes realize this value
    seq: int


@dataclass
class Summary:
    """Callee input/output dependencies: which parameters feed the return
    value and each mutated array parameter."""
    ret: frozenset
    mutated: dict


@dataclass
class DepGraph:
    program: object  # CheckedProgram
    method: str
    expanded: frozenset
    components: dict = field(default_factory=dict)  # cid -> Component
    occ_info: dict = field(default_factory=dict)  # Occ -> OccInfo
    producer: dict = field(default_factory=dict)  # Occ -> cid or "input"
    inputs: list = field(default_factory=list)
    final_binding: dict = field(default_factory=dict)  # var -> Occ
    binding_after: dict = field(default_factory=dict)  # (sid, rounds, frames) -> {var: Occ}
    cond_occs: dict = field(default_factory=dict)  # (sid, rounds, frames) -> Occ

    @property
    def outputs(self):
        consumed = set()
        for c in self.components.values():
            for fd in c.fds:
                consumed |= fd.antecedents
        return [o for o in self.occ_info if o not in consumed]

    def component_of_sid(self, sid, frames=()):
        for c in self.components.values():
            if c.sid == sid and c.frames == frames:
                return c
        return None

    def consumers(self):
        cons = getattr(self, "_consumers", None)
        if cons is not None:
            return cons
        cons = {}
        for c in self.components.values():
            for fd in c.fds:
                for a in fd.antecedents:
                    cons.setdefault(a, set()).add(fd.target)
        self._consumers = cons
        return cons

    def occ_edges(self):
        edges = {}
        for c in self.components.values():
            for fd in c.fds:
                edges.setdefault(fd.target, set()).update(fd.antecedents)
        return edges

    def reachable_from(self, cid):
        """All occurrences downstream of (and including) a component's targets."""
        cache = getattr(self, "_reach", None)
        if cache is None:
            cache = self._reach = {}
        if cid in cache:
            return cache[cid]
        cons = self.consumers()
        seen = cache[cid] = set()
        work = [fd.target for fd in self.components[cid].fds]
        while work:
            o = work.pop()
            if o in seen:
                continue
            seen.add(o)
            work.extend(cons.get(o, ()))
        return seen

    def check_acyclic(self):
        edges = self.occ_edges()
        state = {}
        for start in list(edges):
            stack = [(start, iter(edges.get(start, ())))]
            if state.get(start):
                continue
            state[start] = 1
            while stack:
                node, it = stack[-1]
                adv = next(it, None)
                if adv is None:
                    state[node] = 2
                    stack.pop()
                    continue
                st = state.get(adv)
                if st == 1:
                    raise CycleDetected(f"dependency cycle through {adv}")
                if st is None:
                    state[adv] = 1
                    stack.append((adv, iter(edges.get(adv, ()))))
        return True


# --------------------------------------------------------------- summaries

def callee_summary(program, name, _stack=None):
    prog = program.program if hasattr(program, "program") else program
    if _stack is None:
        _stack = []
    if name in _stack:
        raise RecursionUnsupported(" -> ".join(_stack + [name]))
    method = prog.method(name)
    params = [n for n, _ in method.params]
    env = {p: frozenset([p]) for p in params}
    env, assigned = _flow_block(method.body, env, set(), prog, program,
                                _stack + [name])
    ret = env.get("@ret", frozenset())
    mutated = {}
    for pname, pty in method.params:
        if pty == S.INT_ARRAY and pname in assigned:
            mutated[pname] = frozenset(env[pname])
    return Summary(ret=frozenset(ret), mutated=mutated)


def _flow_expr(e, env, program, checked, stack, updates):
    """Symbolic dependency of an expression value; call side effects are
    collected into `updates` as (array var, dep set)."""
    deps = set()
    if isinstance(e, (S.IntLit, S.BoolLit)):
        return deps
    if isinstance(e, S.Var):
        return set(env.get(e.name, ()))
    if isinstance(e, S.Index):
        return set(env.get(e.base, ())) | _flow_expr(e.index, env, program,
                                                     checked, stack, updates)
    if isinstance(e, S.Unary):
        return _flow_expr(e.operand, env, program, checked, stack, updates)
    if isinstance(e, S.Binary):
        return (_flow_expr(e.left, env, program, checked, stack, updates)
                | _flow_expr(e.right, env, program, checked, stack, updates))
    if isinstance(e, S.CallExpr):
        summary = callee_summary(checked, e.method, stack)
        callee = program.method(e.method)
        argdeps = {}
        for (pname, _), a in zip(callee.params, e.args):
            argdeps[pname] = _flow_expr(a, env, program, checked, stack, updates)
        for pname, feeds in summary.mutated.items():
            pos = [n for n, _ in callee.params].index(pname)
            aexpr = e.args[pos]
            if isinstance(aexpr, S.Var):
                eff = set()
                for f in feeds:
                    eff |= argdeps.get(f, set())
                updates.append((aexpr.name, eff))
        for f in summary.ret:
            deps |= argdeps.get(f, set())
        return deps
    raise TypeError(f"cannot flow {e!r}")


def _flow_stmt(s, env, assigned, program, checked, stack):
    env = dict(env)
    if isinstance(s, S.VarDecl):
        return env
    if isinstance(s, S.Assign):
        updates = []
        deps = _flow_expr(s.expr, env, program, checked, stack, updates)
        if s.index is not None:
            deps |= _flow_expr(s.index, env, program, checked, stack, updates)
            deps |= set(env.get(s.target, ()))
        for var, eff in updates:
            env[var] = frozenset(eff)
            assigned.add(var)
        env[s.target] = frozenset(deps)
        assigned.add(s.target)
        return env
    if isinstance(s, S.CallStmt):
        updates = []
        _flow_expr(s.call, env, program, checked, stack, updates)
        for var, eff in updates:
            env[var] = frozenset(eff)
            assigned.add(var)
        return env
    if isinstance(s, S.Return):
        if s.expr is not None:
            updates = []
            env["@ret"] = frozenset(
                _flow_expr(s.expr, env, program, checked, stack, updates))
            assigned.add("@ret")
        return env
    if isinstance(s, S.If):
        cdeps = _flow_expr(s.cond, env, program, checked, stack, [])
        a1, a2 = set(), set()
        e1 = _flow_block_dict(s.then, env, a1, program, checked, stack)
        e2 = _flow_block_dict(s.els, env, a2, program, checked, stack)
        for v in sorted(a1 | a2):
            merged = e1.get(v, env.get(v, frozenset())) | \
                e2.get(v, env.get(v, frozenset())) | cdeps
            env[v] = frozenset(merged)
            assigned.add(v)
        return env
    if isinstance(s, S.While):
        W = dict(env)
        bound = len(_vars_of_region(s)) + 1
        body_assigned = set()
        for _ in range(bound + 1):
            inner = set()
            nxt = _flow_block_dict(s.body, W, inner, program, checked, stack)
            body_assigned |= inner
            changed = False
            for v in sorted(inner):
                u = W.get(v, frozenset()) | nxt.get(v, frozenset())
                if u != W.get(v, frozenset()):
                    W[v] = frozenset(u)
                    changed = True
            if not changed:
                break
        cdeps = _flow_expr(s.cond, W, program, checked, stack, [])
        for v in sorted(body_assigned):
            W[v] = frozenset(W.get(v, frozenset()) | cdeps)
            assigned.add(v)
        return W
    raise TypeError(f"cannot flow {s!r}")


def _flow_block_dict(stmts, env, assigned, program, checked, stack):
    env = dict(env)
    for s in stmts:
        env = _flow_stmt(s, env, assigned, program, checked, stack)
    return env


def _flow_block(stmts, env, assigned, program, checked, stack):
    return _flow_block_dict(stmts, env, assigned, program, checked, stack), assigned


def _vars_of_region(stmt):
    out = set()
    for s in S.all_statements([stmt]):
        if isinstance(s, S.Assign):
            out.add(s.target)
        for e in _stmt_exprs(s):
            out.update(S.expr_vars(e))
    return out


def _assigned_vars(stmts, program, checked):
    """Variables assigned anywhere in the statements, including arrays
    mutated through calls."""
    out = set()
    for s in S.all_statements(stmts):
        if isinstance(s, S.Assign):
            out.add(s.target)
        for e in _stmt_exprs(s):
            for call in S.expr_calls(e):
                callee = program.method(call.method)
                summary = callee_summary(checked, call.method)
                for pname in summary.mutated:
                    pos = [n for n, _ in callee.params].index(pname)
                    a = call.args[pos]
                    if isinstance(a, S.Var):
                        out.add(a.name)
    return out


def _stmt_exprs(s):
    if isinstance(s, S.Assign):
        return [s.expr] + ([s.index] if s.index is not None else [])
    if isinstance(s, (S.If, S.While)):
        return [s.cond]
    if isinstance(s, S.CallStmt):
        return [s.call]
    if isinstance(s, S.Return) and s.expr is not None:
        return [s.expr]
    return []


def _write_sids(stmts, var, program, checked):
    """Statement ids whose execution records a trace write of `var`."""
    out = set()
    for s in S.all_statements(stmts):
        if isinstance(s, S.Assign) and s.target == var:
            out.add(s.sid)
        for e in _stmt_exprs(s):
            for call in S.expr_calls(e):
                callee = program.method(call.method)
                summary = callee_summary(checked, call.method)
                for pname in summary.mutated:
                    pos = [n for n, _ in callee.params].index(pname)
                    a = call.args[pos]
                    if isinstance(a, S.Var) and a.name == var:
                        out.add(s.sid)
    return out


def _is_call_stmt(s):
    if isinstance(s, S.CallStmt):
        return True
    return isinstance(s, S.Assign) and bool(S.expr_calls(s.expr))


# ------------------------------------------------------------------ builder

class _Builder:
    def __init__(self, checked, method_name, expanded):
        self.checked = checked
        self.prog = checked.program
        self.method_name = method_name
        self.expanded = frozenset(expanded)
        self.graph = DepGraph(checked, method_name, self.expanded)
        self.counters = {}
        self.binding = {}
        self.seq = 0
        self.cid_used = set()

    # -- occurrence helpers

    def fresh(self, var, display, kind, sid, rounds, frames, region):
        idx = self.counters.get(var, 1)
        self.counters[var] = idx + 1
        occ = Occ(var, idx)
        self.seq += 1
        self.graph.occ_info[occ] = OccInfo(
            occ, display, kind, sid, tuple(rounds), tuple(frames),
            frozenset(region), self.seq)
        return occ

    def make_input(self, var):
        occ = Occ(var, 0)
        self.counters[var] = 1
        self.seq += 1
        self.graph.occ_info[occ] = OccInfo(
            occ, var, "input", None, (), (), frozenset(), self.seq)
        self.graph.producer[occ] = "input"
        self.graph.inputs.append(occ)
        self.binding[var] = occ
        return occ

    def component(self, kind, sid, line, lines, frames):
        existing = self.graph.component_of_sid(sid, frames)
        if existing is not None:
            return existing
        base = f"C{line}"
        suffix = ".cond" if kind == "cond" else ""
        cid = base + suffix
        n = 1
        while cid in self.cid_used:
            n += 1
            cid = f"{base}{suffix}@{n}"
        self.cid_used.add(cid)
        comp = Component(cid, kind, sid, line, frozenset(lines), [], frames)
        self.graph.components[cid] = comp
        return comp

    def add_fd(self, comp, occ, antecedents):
        comp.fds.append(FD(occ, frozenset(antecedents)))
        self.graph.producer[occ] = comp.cid

    def reads(self, expr, ns):
        return {self.binding[ns + v] for v in S.expr_vars(expr)}

    # -- main walk

    def build(self):
        method = self.prog.method(self.method_name)
        for pname, _ in method.params:
            self.make_input(pname)
        self.walk_block(method.body, control=(), rounds=(), frames=(), ns="")
        for var, occ in sorted(self.binding.items()):
            self.graph.final_binding[var] = occ
        self.graph.check_acyclic()
        return self.graph

    def snapshot(self, sid, rounds, frames):
        self.graph.binding_after[(sid, tuple(rounds), tuple(frames))] = \
            dict(self.binding)

    def walk_block(self, stmts, control, rounds, frames, ns):
        for s in stmts:
            self.walk_stmt(s, control, rounds, frames, ns)

    def walk_stmt(self, s, control, rounds, frames, ns):
        if isinstance(s, S.VarDecl):
            return
        if isinstance(s, S.Return):
            comp = self.component("return", s.sid, s.line, {s.line}, frames)
            ants = set(control)
            if s.expr is not None:
                if S.expr_calls(s.expr):
                    raise NotImplementedError("calls in return expressions")
                ants |= self.reads(s.expr, ns)
            occ = self.fresh(ns + "@ret", "@ret", "target", s.sid, rounds,
                             frames, {s.sid})
            self.add_fd(comp, occ, ants)
            self.binding[ns + "@ret"] = occ
            self.snapshot(s.sid, rounds, frames)
            return
        if isinstance(s, S.Assign) and not S.expr_calls(s.expr):
            comp = self.component("assign", s.sid, s.line, {s.line}, frames)
            ants = self.reads(s.expr, ns) | set(control)
            if s.index is not None:
                ants |= self.reads(s.index, ns)
                ants.add(self.binding[ns + s.target])
            occ = self.fresh(ns + s.target, s.target, "target", s.sid, rounds,
                             frames, {s.sid})
            self.add_fd(comp, occ, ants)
            self.binding[ns + s.target] = occ
            self.snapshot(s.sid, rounds, frames)
            return
        if _is_call_stmt(s):
            if s.sid in self.expanded:
                self.inline_call(s, control, rounds, frames, ns)
            else:
                self.folded_composite(s, "call", control, rounds, frames, ns)
            self.snapshot(s.sid, rounds, frames)
            return
        if isinstance(s, S.If):
            if s.sid in self.expanded:
                self.expanded_if(s, control, rounds, frames, ns)
            else:
                self.folded_composite(s, "if", control, rounds, frames, ns)
            self.snapshot(s.sid, rounds, frames)
            return
        if isinstance(s, S.While):
            if s.sid in self.expanded:
                self.expanded_while(s, control, rounds, frames, ns)
            else:
                self.folded_composite(s, "while", control, rounds, frames, ns)
            self.snapshot(s.sid, rounds, frames)
            return
        raise TypeError(f"cannot model {s!r}")

    def folded_composite(self, s, kind, control, rounds, frames, ns):
        # dependencies of the whole region, expressed over entry occurrences
        entry = {v[len(ns):]: frozenset([occ])
                 for v, occ in self.binding.items() if v.startswith(ns)}
        assigned = set()
        env = _flow_stmt(s, entry, assigned, self.prog, self.checked, [None])
        lines = {c.line for c in S.all_statements([s])}
        comp = self.component(kind, s.sid, s.line, lines, frames)
        for v in sorted(assigned):
            region = _write_sids([s], v, self.prog, self.checked)
            occ = self.fresh(ns + v, v, "region", s.sid, rounds, frames, region)
            self.add_fd(comp, occ, set(env[v]) | set(control))
            self.binding[ns + v] = occ

    def expanded_if(self, s, control, rounds, frames, ns):
        cond = self.component("cond", s.sid, s.line, {s.line}, frames)
        cocc = self.fresh(f"@c{s.sid}", None, "cond", s.sid, rounds, frames,
                          {s.sid})
        self.add_fd(cond, cocc, self.reads(s.cond, ns) | set(control))
        self.graph.cond_occs[(s.sid, tuple(rounds), tuple(frames))] = cocc
        entry = dict(self.binding)
        inner = control + (cocc,)
        self.walk_block(s.then, inner, rounds, frames, ns)
        then_b = dict(self.binding)
        self.binding = dict(entry)
        self.walk_block(s.els, inner, rounds, frames, ns)
        else_b = dict(self.binding)
        self.binding = dict(entry)
        changed = sorted(v for v in set(then_b) | set(else_b)
                         if then_b.get(v) != entry.get(v)
                         or else_b.get(v) != entry.get(v))
        for v in changed:
            ants = {o for o in (then_b.get(v), else_b.get(v), entry.get(v))
                    if o is not None}
            base = v[len(ns):]
            region = _write_sids(s.then + s.els, base, self.prog, self.checked)
            occ = self.fresh(v, base, "merge", s.sid, rounds, frames, region)
            self.add_fd(cond, occ, ants | {cocc})
            self.binding[v] = occ

    def expanded_while(self, s, control, rounds, frames, ns):
        cond = self.component("cond", s.sid, s.line, {s.line}, frames)
        assigned = _assigned_vars(s.body, self.prog, self.checked)
        n_rounds = max(1, len(assigned))
        for r in range(1, n_rounds + 1):
            cocc = self.fresh(f"@c{s.sid}", None, "cond", s.sid,
                              rounds + (r,), frames, {s.sid})
            self.add_fd(cond, cocc, self.reads(s.cond, ns) | set(control))
            self.graph.cond_occs[(s.sid, tuple(rounds) + (r,), tuple(frames))] = cocc
            self.walk_block(s.body, control + (cocc,), rounds + (r,), frames, ns)

    def inline_call(self, s, control, rounds, frames, ns):
        call = s.call if isinstance(s, S.CallStmt) else S.expr_calls(s.expr)[0]
        callee = self.prog.method(call.method)
        callee_summary(self.checked, call.method)  # recursion check
        glue = self.component("call", s.sid, s.line, {s.line}, frames)
        glue.kind = "call-glue"
        cns = f"{call.method}@{s.sid}:"
        inner_frames = tuple(frames) + (s.sid,)
        array_args = {}
        for (pname, pty), aexpr in zip(callee.params, call.args):
            ants = self.reads(aexpr, ns) | set(control)
            occ = self.fresh(cns + pname, pname, "param", s.sid, rounds,
                             inner_frames, set())
            self.add_fd(glue, occ, ants)
            self.binding[cns + pname] = occ
            if pty == S.INT_ARRAY and isinstance(aexpr, S.Var):
                array_args[pname] = aexpr.name
        self.walk_block(callee.body, control, (), inner_frames, cns)
        # project mutated arrays and the return value back into the caller
        summary = callee_summary(self.checked, call.method)
        for pname, caller_var in array_args.items():
            if pname in summary.mutated:
                self.binding[ns + caller_var] = self.binding[cns + pname]
        if isinstance(s, S.Assign):
            ants = set(control)
            for v in S.expr_vars(s.expr):
                ants.add(self.binding[ns + v])
            if (cns + "@ret") in self.binding:
                ants.add(self.binding[cns + "@ret"])
            occ = self.fresh(ns + s.target, s.target, "target", s.sid, rounds,
                             frames, {s.sid})
            self.add_fd(glue, occ, ants)
            self.binding[ns + s.target] = occ


# --------------------------------------------------------------- public API

def analyze(program, method, expanded=frozenset()):
    """Build the dependency graph of `method` at the given granularity."""
    return _Builder(program, method, expanded).build()


def composite_sids(program, method, recurse_calls=True, _seen=None):
    """Statement ids of every composite in the method (and its callees)."""
    prog = program.program if hasattr(program, "program") else program
    if _seen is None:
        _seen = set()
    if method in _seen:
        raise RecursionUnsupported(method)
    _seen = _seen | {method}
    out = set()
    for s in S.all_statements(prog.method(method).body):
        if isinstance(s, (S.If, S.While)):
            out.add(s.sid)
        elif _is_call_stmt(s):
            out.add(s.sid)
            if recurse_calls:
                for e in _stmt_exprs(s):
                    for call in S.expr_calls(e):
                        out |= composite_sids(program, call.method, True, _seen)
    return out


def full_granularity(program, method):
    """Statement-level graph: every composite expanded."""
    return analyze(program, method, composite_sids(program, method))


def expand_component(graph, cid):
    """Refine the graph by sub-dividing one composite component."""
    comp = graph.components.get(cid)
    if comp is None or not comp.composite:
        raise NotComposite(f"{cid} is not a composite component")
    return analyze(graph.program, graph.method,
                   graph.expanded | {comp.sid})


def statement_dependencies(program, method, sid):
    """fd pairs of one statement's component at statement granularity."""
    g = full_granularity(program, method)
    comp = g.component_of_sid(sid)
    if comp is None:
        return []
    return list(comp.fds)


def index_occurrences(program, method):
    """Occurrence-annotated view at statement granularity: a map from
    statement id to its target occurrences plus the use bindings."""
    g = full_granularity(program, method)
    out = {}
    for c in g.components.values():
        for fd in c.fds:
            out.setdefault(c.sid, []).append(fd)
    return g, out


def materialize(graph, anchor):
    """Resolve a semantic observation anchor to an occurrence of this graph.

    Anchors survive granularity changes; this lookup is redone after every
    expansion.  Forms: ("input", var), ("final", var),
    ("after", sid, rounds, var, frames), ("cond", sid, rounds, frames)."""
    from .errors import BadPosition, UnknownVariable

    kind = anchor[0]
    if kind == "input":
        occ = Occ(anchor[1], 0)
        if occ not in graph.occ_info:
            raise UnknownVariable(f"{anchor[1]} is not an input of {graph.method}")
        return occ
    if kind == "final":
        var = anchor[1]
        if var in graph.final_binding:
            return graph.final_binding[var]
        occ = Occ(var, 0)
        if occ in graph.occ_info:
            return occ
        raise UnknownVariable(f"{var} has no binding in {graph.method}")
    if kind == "after":
        _, sid, rounds, var, frames = anchor
        snap = graph.binding_after.get((sid, tuple(rounds), tuple(frames)))
        if snap is None:
            raise BadPosition(
                f"no binding snapshot for statement {sid} at {tuple(rounds)}")
        if var not in snap:
            raise UnknownVariable(f"{var} not bound after statement {sid}")
        return snap[var]
    if kind == "cond":
        _, sid, rounds, frames = anchor
        occ = graph.cond_occs.get((sid, tuple(rounds), tuple(frames)))
        if occ is None:
            raise BadPosition(
                f"no condition occurrence for statement {sid} at {tuple(rounds)}")
        return occ
    raise BadPosition(f"unknown anchor form {anchor!r}")


def materialize_observations(graph, observations):
    """(ok_occs, nok_occs) from anchored observations, per current granularity."""
    ok, nok = set(), set()
    for ob in observations:
        occ = materialize(graph, ob.anchor)
        (ok if ob.ok else nok).add(occ)
    return ok, nok
