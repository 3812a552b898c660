"""Command line front door.

Machine-readable output goes to stdout as JSON (the model listing is plain
text), prompts and progress to stderr.  Exit codes: 0 success, 1 domain
error, 2 usage error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from . import checker, deps, engine, interp, logic, parser, planner, session, slicer
from .errors import DepdiagError

DEFAULT_BIND = "127.0.0.1:7071"


def _env_int(name, default):
    try:
        return int(os.environ.get(name, ""))
    except ValueError:
        return default


def _load_program(path):
    with open(path) as fh:
        source = fh.read()
    return checker.check(parser.parse(source, os.path.basename(path)))


def _load_test(path):
    with open(path) as fh:
        return interp.TestCase.from_json(fh.read())


def _emit(data):
    json.dump(data, sys.stdout, indent=2, default=str)
    sys.stdout.write("\n")


def cmd_deps(args):
    program = _load_program(args.file)
    graph = deps.analyze(program, args.method)
    out = []
    for cid in sorted(graph.components,
                      key=lambda c: (graph.components[c].line, c)):
        comp = graph.components[cid]
        out.append({
            "component": cid,
            "kind": comp.kind,
            "line": comp.line,
            "lines": sorted(comp.lines or {comp.line}),
            "fd": [{"target": str(fd.target),
                    "deps": sorted(str(a) for a in fd.antecedents)}
                   for fd in comp.fds],
        })
    _emit(out)
    return 0


def cmd_model(args):
    program = _load_program(args.file)
    graph = deps.analyze(program, args.method)
    sd = logic.compile_sd(graph)
    for line in sd.render():
        print(line)
    return 0


def _observed(program, test):
    trace = interp.execute(program, test.method, test.args)
    obs = interp.derive_observations(trace, test, program)
    return trace, obs


def cmd_diagnose(args):
    program = _load_program(args.file)
    test = _load_test(args.test)
    _, obs = _observed(program, test)
    graph = deps.analyze(program, test.method)
    sd = logic.compile_sd(graph)
    ok, nok = deps.materialize_observations(graph, obs)
    conflicts = []
    diagnoses = engine.diagnose(sd, ok, nok, args.max_card, graph,
                                conflicts_out=conflicts)
    if args.value_filter:
        diagnoses = engine.value_filter(program, test, diagnoses, graph)
    _emit({
        "diagnoses": [{
            "components": sorted(d),
            "lines": sorted({ln for c in d
                             for ln in (graph.components[c].lines
                                        or {graph.components[c].line})}),
            "cardinality": len(d),
        } for d in diagnoses],
        "conflicts": [sorted(c) for c in conflicts],
    })
    return 0


def cmd_slice(args):
    program = _load_program(args.file)
    position = "end" if args.at == "end" else int(args.at)
    crit = slicer.SliceCriterion(frozenset(args.vars.split(",")), position)
    lines = slicer.backward_slice(program, args.method, crit)
    _emit({"lines": sorted(lines)})
    return 0


def cmd_trace(args):
    program = _load_program(args.file)
    test = _load_test(args.test)
    trace = interp.execute(program, test.method, test.args)
    _emit({
        "call": {"method": test.method, "args": test.args},
        "steps": [{"sid": s.sid, "line": s.line, "var": s.var,
                   "value": s.value, "iteration": list(s.itervec),
                   "frames": list(s.frames)} for s in trace.steps],
        "conditions": [{"sid": c.sid, "value": c.value,
                        "iteration": list(c.itervec), "frames": list(c.frames)}
                       for c in trace.cond_events],
        "final": trace.final_env,
        "return": trace.return_value,
    })
    return 0


def _print_action(act, err):
    p = act.payload
    if act.kind == "AskQuery":
        err(f"Is {p['var'] or 'the condition'} = {p['value']} at line "
            f"{p['line']} correct? [correct/incorrect]")
    elif act.kind == "AskFirstBadIteration":
        err(f"First iteration of the loop at line {p['line']} with a wrong "
            "value? [number]")
    elif act.kind == "AskLoopCondition":
        err(f"Is the loop condition at line {p['line']} written correctly? "
            "[correct/incorrect]")
    elif act.kind == "AskSubExpression":
        err(f"Which sub-expression at line {p['line']} is wrong?")
        for i, ch in enumerate(p["choices"]):
            err(f"  [{i}] {ch}")
    else:
        err(f"Report: lines {p.get('lines')} ({p.get('reason')})")


def _parse_answer(act, text):
    text = text.strip()
    if act.kind in ("AskFirstBadIteration", "AskSubExpression"):
        return int(text)
    return text


def cmd_session(args):
    program = _load_program(args.file)
    test = _load_test(args.test)
    state = session.start_session(program, test, max_card=args.max_card)
    err = lambda *a: print(*a, file=sys.stderr)  # noqa: E731
    answers = None
    if args.replay:
        with open(args.replay) as fh:
            answers = iter(json.load(fh))
    while state.status == "running":
        act = session.next_action(state)
        if state.status != "running":
            break
        _print_action(act, err)
        if answers is not None:
            try:
                raw = next(answers)
            except StopIteration:
                err("replay ended before the session finished")
                return 1
            answer = raw
        else:
            line = sys.stdin.readline()
            if not line:
                err("input closed before the session finished")
                return 1
            answer = _parse_answer(act, line)
        session.submit_answer(state, act, answer)
    if args.snapshot_out:
        with open(args.snapshot_out, "w") as fh:
            json.dump(session.to_json(state), fh, indent=2)
    _emit(session.interaction_report(state))
    return 0


def cmd_next(args):
    with open(args.snapshot) as fh:
        state = session.from_json(fh.read())
    if state.status != "running":
        _emit({"status": state.status, "localized": state.localized})
        return 0
    if state.pending is None:
        ok, nok = deps.materialize_observations(state.graph, state.obs)
        q = planner.select_measurement(state.sd, state.graph,
                                       state.candidates, ok, nok)
        if q is None:
            _emit({"status": state.status, "query": None})
            return 0
        _emit({"status": state.status,
               "query": {"occ": str(q.occ),
                         "expected_survivors": q.expected_survivors,
                         "p_nok": q.p_nok}})
        return 0
    _emit({"status": state.status, "action": state.pending.to_json()})
    return 0


def cmd_serve(args):
    from . import service
    import uvicorn

    host, _, port = args.bind.rpartition(":")
    config = service.Config(
        max_card=args.max_card,
        step_budget=args.step_budget,
        allow_origin=args.allow_origin,
        persist_dir=args.persist_dir,
    )
    app = service.create_app(config)
    uvicorn.run(app, host=host or "127.0.0.1", port=int(port))
    return 0


def build_parser():
    ap = argparse.ArgumentParser(
        prog="depdiag",
        description="dependency-model debugging toolkit")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("deps", help="component and dependency listing")
    p.add_argument("file")
    p.add_argument("--method", required=True)
    p.set_defaults(func=cmd_deps)

    p = sub.add_parser("model", help="print the logical model clauses")
    p.add_argument("file")
    p.add_argument("--method", required=True)
    p.set_defaults(func=cmd_model)

    p = sub.add_parser("diagnose", help="diagnose a failing test")
    p.add_argument("file")
    p.add_argument("--test", required=True)
    p.add_argument("--max-card", type=int,
                   default=_env_int("DEPDIAG_MAX_CARD", 2))
    p.add_argument("--value-filter", action="store_true")
    p.set_defaults(func=cmd_diagnose)

    p = sub.add_parser("slice", help="static backward slice")
    p.add_argument("file")
    p.add_argument("--method", required=True)
    p.add_argument("--vars", required=True)
    p.add_argument("--at", required=True, help="line number or 'end'")
    p.set_defaults(func=cmd_slice)

    p = sub.add_parser("trace", help="run a test and dump the trace")
    p.add_argument("file")
    p.add_argument("--test", required=True)
    p.set_defaults(func=cmd_trace)

    p = sub.add_parser("session", help="interactive localization session")
    p.add_argument("file")
    p.add_argument("--test", required=True)
    p.add_argument("--max-card", type=int,
                   default=_env_int("DEPDIAG_MAX_CARD", 2))
    p.add_argument("--replay", help="JSON list of recorded answers")
    p.add_argument("--snapshot-out", help="write the final session snapshot")
    p.set_defaults(func=cmd_session)

    p = sub.add_parser("next", help="plan the next measurement offline")
    p.add_argument("snapshot")
    p.set_defaults(func=cmd_next)

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--bind", default=os.environ.get("DEPDIAG_BIND",
                                                    DEFAULT_BIND))
    p.add_argument("--max-card", type=int,
                   default=_env_int("DEPDIAG_MAX_CARD", 2))
    p.add_argument("--step-budget", type=int,
                   default=_env_int("DEPDIAG_STEPS", interp.DEFAULT_STEP_BUDGET))
    p.add_argument("--allow-origin", default=None)
    p.add_argument("--persist-dir", default=None)
    p.set_defaults(func=cmd_serve)

    return ap


def main(argv=None):
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as e:
        return 2 if e.code not in (0, None) else 0
    try:
        return args.func(args)
    except DepdiagError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    except FileNotFoundError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    except (ValueError, json.JSONDecodeError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
