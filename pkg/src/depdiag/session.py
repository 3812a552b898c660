"""Interactive fault localization sessions.

A session executes the failing test once, derives the entry and output
observations, and then alternates between re-diagnosing and asking the user
the cheapest discriminating question: the value of an intermediate variable,
the first bad loop iteration, a loop condition verdict, or the wrong
sub-expression of a localized statement.  Interactions are counted in five
categories; setup covers the initial output check and costs 1.

Observations are stored as semantic anchors, not occurrence atoms, so they
survive granularity changes when a blamed composite is expanded.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from . import deps, engine, interp, logic, parser, checker, planner
from . import syntax as S
from .errors import (InvalidAnswer, NotComposite, RuntimeFault,
                     SessionFinished, StaleAction)

COUNTER_KEYS = ("setup", "query", "loop", "exprs", "iter")


@dataclass
class Action:
    kind: str  # AskQuery | AskFirstBadIteration | AskLoopCondition
    #            | AskSubExpression | Report
    action_id: str
    payload: dict

    def to_json(self):
        return {"kind": self.kind, "action_id": self.action_id,
                "payload": self.payload}


@dataclass
class SessionState:
    program: object  # CheckedProgram
    test: interp.TestCase
    trace: object
    graph: object
    sd: object
    obs: list  # of interp.Observation
    candidates: list
    counters: dict
    history: list
    status: str  # running | localized | exhausted
    localized: dict
    expanded: set
    bad_iteration: dict  # loop sid -> first bad iteration
    pending: object
    max_card: int
    seq: int = 0
    detail: dict = field(default_factory=dict)


def _counters():
    return {k: 0 for k in COUNTER_KEYS}


def _occ_anchor(info):
    if info.kind == "input":
        return ("input", info.var_display)
    if info.kind == "cond":
        return ("cond", info.sid, tuple(info.rounds), tuple(info.frames))
    return ("after", info.sid, tuple(info.rounds), info.occ.var,
            tuple(info.frames))


def occ_value(state, occ):
    """Traced value of an occurrence, or None when it was never realized."""
    info = state.graph.occ_info[occ]
    if info.kind == "input":
        return state.trace.entry_env.get(info.var_display)
    if info.kind == "cond":
        try:
            return interp.cond_value(state.trace, info.sid,
                                     tuple(info.rounds), tuple(info.frames))
        except Exception:
            return None
    sids = set(info.region) or ({info.sid} if info.sid is not None else set())
    if sids:
        st = interp.last_write(state.trace, info.var_display, sids,
                               tuple(info.rounds), tuple(info.frames))
        if st is not None:
            return st.value
    # value may be carried through without a write (untaken branch): fall
    # back to the environment snapshot after the statement
    snap = state.trace.after_env.get(
        (info.sid, tuple(info.rounds), tuple(info.frames)))
    if snap is not None and info.var_display in snap:
        return snap[info.var_display]
    return None


def _rebuild(state):
    """Recompile graph and SD for the current granularity, re-materialize
    anchored observations, re-diagnose."""
    state.graph = deps.analyze(state.program, state.test.method,
                               frozenset(state.expanded))
    state.sd = logic.compile_sd(state.graph)
    _rediagnose(state)


def _rediagnose(state):
    ok, nok = deps.materialize_observations(state.graph, state.obs)
    state.candidates = engine.diagnose(state.sd, ok, nok, state.max_card,
                                       state.graph)
    return ok, nok


def start_session(program, test, max_card=2, budget=interp.DEFAULT_STEP_BUDGET):
    method = program.program.method(test.method) if hasattr(program, "program") \
        else program.method(test.method)
    if method is None:
        raise InvalidAnswer(f"no method {test.method}")
    state = SessionState(
        program=program, test=test, trace=None, graph=None, sd=None,
        obs=[], candidates=[], counters=_counters(), history=[],
        status="running", localized={}, expanded=set(), bad_iteration={},
        pending=None, max_card=max_card)
    state.counters["setup"] = 1
    try:
        state.trace = interp.execute(program, test.method, test.args, budget)
    except RuntimeFault as e:
        state.graph = deps.analyze(program, test.method)
        state.sd = logic.compile_sd(state.graph)
        state.status = "exhausted"
        state.localized = {"lines": [e.line], "reason": "runtime-fault",
                           "message": str(e)}
        state.candidates = [frozenset(
            c.cid for c in state.graph.components.values()
            if e.line in (c.lines or {c.line}))]
        return state
    state.obs = interp.derive_observations(state.trace, test, program)
    _rebuild(state)
    if not any(not ob.ok for ob in state.obs):
        state.status = "localized"
        state.localized = {"lines": [], "reason": "no-fault"}
    return state


# ----------------------------------------------------------- action planning

def _fresh_action(state, kind, payload):
    state.seq += 1
    act = Action(kind, f"a{state.seq}", payload)
    state.pending = act
    return act


def _comp_line(state, cid):
    return state.graph.components[cid].line


def _comp_lines(state, cid):
    c = state.graph.components[cid]
    return sorted(c.lines or {c.line})


def _finish(state, status, lines, reason, **extra):
    state.status = status
    state.localized = {"lines": sorted(lines), "reason": reason, **extra}
    act = _fresh_action(state, "Report", dict(state.localized))
    state.pending = None  # reports need no answer
    state.history.append((act.to_json(), None))
    return act


def _enclosing_whiles(state, sid):
    """Sids of while statements enclosing `sid` in its own method,
    outermost first."""
    prog = state.program.program if hasattr(state.program, "program") \
        else state.program

    def find(stmts, acc):
        for s in stmts:
            if s.sid == sid:
                return acc
            if isinstance(s, S.If):
                r = find(s.then, acc) or find(s.els, acc)
                if r is not None:
                    return r
            elif isinstance(s, S.While):
                r = find(s.body, acc + [s.sid])
                if r is not None:
                    return r
        return None

    for m in prog.methods:
        r = find(m.body, [])
        if r is not None:
            return r
    return []


def _query_allowed(state, occ):
    # first-bad-iteration answers cap the rounds worth asking about; the
    # round positions line up with the expanded loops on the nesting path
    info = state.graph.occ_info[occ]
    if info.sid is None or not state.bad_iteration:
        return True
    chain = [s for s in _enclosing_whiles(state, info.sid)
             if s in state.expanded]
    for pos, lsid in enumerate(chain):
        k = state.bad_iteration.get(lsid)
        if k is not None and pos < len(info.rounds) and info.rounds[pos] > k:
            return False
    return True


def _select_query(state, ok, nok):
    queries = planner.candidate_queries(state.sd, state.graph,
                                        state.candidates, ok, nok)
    for q in queries:
        if not q.informative:
            break
        if not _query_allowed(state, q.occ):
            continue
        value = occ_value(state, q.occ)
        if value is None:
            continue
        return q, value
    return None, None


def _is_simple(expr):
    # at most one operator, no calls; array subscripts are addressing,
    # not operators worth drilling into
    ops = [e for e in S.subexpressions(expr)
           if isinstance(e, (S.Binary, S.Unary, S.CallExpr))]
    if any(isinstance(e, S.CallExpr) for e in ops):
        return False
    return len(ops) <= 1


def next_action(state):
    if state.status != "running":
        raise SessionFinished(f"session is {state.status}")
    if state.pending is not None:
        return state.pending
    while True:
        if not state.candidates:
            return _finish(state, "exhausted", [],
                           "no-candidate-explains-observations")
        if len(state.candidates) > 1:
            ok, nok = deps.materialize_observations(state.graph, state.obs)
            q, value = _select_query(state, ok, nok)
            if q is None:
                lines = set()
                for d in state.candidates:
                    for cid in d:
                        lines.update(_comp_lines(state, cid))
                return _finish(state, "exhausted", lines,
                               "indistinguishable-candidates")
            info = state.graph.occ_info[q.occ]
            return _fresh_action(state, "AskQuery", {
                "occ": str(q.occ),
                "var": info.var_display,
                "line": None if info.sid is None
                        else _stmt_line(state, info.sid),
                "value": value,
                "expected_survivors": q.expected_survivors,
            })
        delta = next(iter(state.candidates))
        if not delta:
            return _finish(state, "localized", [], "no-fault")
        if len(delta) > 1:
            lines = set()
            for cid in delta:
                lines.update(_comp_lines(state, cid))
            return _finish(state, "localized", lines, "multi-fault")
        cid = next(iter(delta))
        comp = state.graph.components[cid]
        if comp.kind == "while":
            if comp.sid not in state.bad_iteration:
                return _fresh_action(state, "AskFirstBadIteration", {
                    "component": cid, "line": comp.line})
            return _fresh_action(state, "AskLoopCondition", {
                "component": cid, "line": comp.line})
        if comp.kind == "if":
            # selections are sub-divided without extra interaction
            state.expanded.add(comp.sid)
            _rebuild(state)
            continue
        if comp.kind == "call":
            stmt = _statement(state, comp.sid)
            expr = stmt.call if isinstance(stmt, S.CallStmt) else stmt.expr
            return _fresh_action(state, "AskSubExpression", {
                "component": cid, "line": comp.line,
                "choices": [S.format_expr(e) for e in S.subexpressions(expr)],
            })
        if comp.kind == "cond":
            return _finish(state, "localized", [comp.line], "condition",
                           component=cid)
        stmt = _statement(state, comp.sid)
        if isinstance(stmt, S.Assign) and not _is_simple(stmt.expr):
            return _fresh_action(state, "AskSubExpression", {
                "component": cid, "line": comp.line,
                "choices": [S.format_expr(e)
                            for e in S.subexpressions(stmt.expr)],
            })
        return _finish(state, "localized", _comp_lines(state, cid),
                       "statement", component=cid)


def _statement(state, sid):
    prog = state.program.program if hasattr(state.program, "program") \
        else state.program
    return prog.statement(sid)


def _stmt_line(state, sid):
    stmt = _statement(state, sid)
    return None if stmt is None else stmt.line


# ----------------------------------------------------------------- answering

def _require_pending(state, action):
    if state.status != "running":
        raise SessionFinished(f"session is {state.status}")
    if state.pending is None:
        raise StaleAction("no action is pending")
    pending_id = state.pending.action_id
    given = action.action_id if isinstance(action, Action) else action
    if given != pending_id:
        raise StaleAction(f"expected answer to {pending_id}")
    return state.pending


def submit_answer(state, action, answer):
    act = _require_pending(state, action)
    state.pending = None
    state.history.append((act.to_json(), answer))
    if act.kind == "AskQuery":
        _answer_query(state, act, answer)
    elif act.kind == "AskFirstBadIteration":
        _answer_iteration(state, act, answer)
    elif act.kind == "AskLoopCondition":
        _answer_loop_condition(state, act, answer)
    elif act.kind == "AskSubExpression":
        _answer_subexpression(state, act, answer)
    else:
        raise InvalidAnswer(f"{act.kind} takes no answer")
    return state


def _verdict(answer):
    if answer in ("correct", "ok", True):
        return True
    if answer in ("incorrect", "nok", "wrong", False):
        return False
    raise InvalidAnswer(f"expected correct/incorrect, got {answer!r}")


def _answer_query(state, act, answer):
    verdict = _verdict(answer)
    state.counters["query"] += 1
    occ = _parse_occ(act.payload["occ"])
    info = state.graph.occ_info[occ]
    state.obs.append(interp.Observation(_occ_anchor(info), verdict))
    _rediagnose(state)


def _parse_occ(text):
    var, _, idx = text.rpartition("#")
    return deps.Occ(var, int(idx))


def _answer_iteration(state, act, answer):
    if not isinstance(answer, int) or answer < 1:
        raise InvalidAnswer("expected a 1-based iteration number")
    state.counters["iter"] += 1
    cid = act.payload["component"]
    state.bad_iteration[state.graph.components[cid].sid] = answer


def _answer_loop_condition(state, act, answer):
    verdict = _verdict(answer)
    state.counters["loop"] += 1
    cid = act.payload["component"]
    comp = state.graph.components[cid]
    if not verdict:
        _finish(state, "localized", [comp.line], "loop-condition",
                component=cid)
        return
    # condition vouched for: expand the loop and pin every evaluated
    # condition occurrence as correct, which exonerates the condition
    sid = comp.sid
    state.expanded.add(sid)
    _rebuild(state)
    for key, occ in state.graph.cond_occs.items():
        ksid, rounds, frames = key
        if ksid != sid:
            continue
        anchor = ("cond", ksid, rounds, frames)
        if any(ob.anchor == anchor for ob in state.obs):
            continue
        try:
            interp.cond_value(state.trace, ksid, rounds, frames)
        except Exception:
            continue
        state.obs.append(interp.Observation(anchor, True))
    _rediagnose(state)


def _answer_subexpression(state, act, answer):
    choices = act.payload["choices"]
    if not isinstance(answer, int) or not 0 <= answer < len(choices):
        raise InvalidAnswer("expected a choice index")
    state.counters["exprs"] += 1
    cid = act.payload["component"]
    comp = state.graph.components[cid]
    stmt = _statement(state, comp.sid)
    expr = stmt.call if isinstance(stmt, S.CallStmt) else stmt.expr
    chosen = S.subexpressions(expr)[answer]
    if isinstance(chosen, S.CallExpr) and comp.kind == "call":
        state.expanded.add(comp.sid)
        _rebuild(state)
        return
    _finish(state, "localized", [comp.line], "sub-expression",
            component=cid, expression=choices[answer])


def expand(state, cid):
    """User-forced refinement of a composite component."""
    comp = state.graph.components.get(cid)
    if comp is None or not comp.composite:
        raise NotComposite(f"{cid} is not a composite component")
    state.expanded.add(comp.sid)
    state.pending = None
    _rebuild(state)
    return state


# ------------------------------------------------------------------ reports

def interaction_report(state):
    out = dict(state.counters)
    out["Total"] = sum(state.counters.values())
    out["Total2"] = state.counters["setup"] + state.counters["query"]
    out["status"] = state.status
    if state.localized:
        out["localized"] = dict(state.localized)
    return out


def candidate_view(state):
    view = []
    for d in state.candidates:
        lines = set()
        for cid in d:
            lines.update(_comp_lines(state, cid))
        view.append({"components": sorted(d), "lines": sorted(lines)})
    return view


# -------------------------------------------------------------- persistence

def to_json(state):
    prog = state.program.program if hasattr(state.program, "program") \
        else state.program
    return {
        "source_name": prog.source_name,
        "source": prog.source_text,
        "test": state.test.to_json(),
        "max_card": state.max_card,
        "obs": [{"anchor": _anchor_json(ob.anchor), "ok": ob.ok}
                for ob in state.obs],
        "counters": dict(state.counters),
        "history": state.history,
        "status": state.status,
        "localized": dict(state.localized),
        "expanded": sorted(state.expanded),
        "bad_iteration": {str(k): v for k, v in state.bad_iteration.items()},
        "pending": None if state.pending is None else state.pending.to_json(),
        "seq": state.seq,
        "candidates": [sorted(d) for d in state.candidates],
    }


def _anchor_json(anchor):
    return [list(x) if isinstance(x, tuple) else x for x in anchor]


def _anchor_from_json(data):
    return tuple(tuple(x) if isinstance(x, list) else x for x in data)


def from_json(data):
    if isinstance(data, str):
        data = json.loads(data)
    program = checker.check(parser.parse(data["source"], data["source_name"]))
    test = interp.TestCase.from_json(data["test"])
    state = SessionState(
        program=program, test=test, trace=None, graph=None, sd=None,
        obs=[interp.Observation(_anchor_from_json(o["anchor"]), o["ok"])
             for o in data["obs"]],
        candidates=[], counters=dict(data["counters"]),
        history=[tuple(h) for h in data["history"]],
        status=data["status"], localized=dict(data["localized"]),
        expanded=set(data["expanded"]),
        bad_iteration={int(k): v for k, v in data["bad_iteration"].items()},
        pending=None, max_card=data["max_card"], seq=data["seq"])
    if data["pending"] is not None:
        p = data["pending"]
        state.pending = Action(p["kind"], p["action_id"], p["payload"])
    try:
        state.trace = interp.execute(program, test.method, test.args)
    except RuntimeFault:
        state.trace = None
    state.graph = deps.analyze(program, test.method, frozenset(state.expanded))
    state.sd = logic.compile_sd(state.graph)
    if state.trace is not None and state.status != "exhausted":
        _rediagnose(state)
    else:
        state.candidates = [frozenset(d) for d in data["candidates"]]
    return state
