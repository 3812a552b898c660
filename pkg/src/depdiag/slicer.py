"""Static backward slicing over the fully expanded dependency graph, and a
side-by-side comparison with single-fault diagnosis.

A slice is the transitive antecedent closure of the criterion variable's
occurrences, mapped back to source lines.  Sharing the dependency graph with
the diagnosis engine makes the two line sets directly comparable.
"""

from __future__ import annotations

from dataclasses import dataclass

from . import deps, engine, interp, logic
from . import syntax as S
from .errors import BadPosition, UnknownVariable


@dataclass(frozen=True)
class SliceCriterion:
    variables: frozenset
    position: object  # line number or "end"


@dataclass
class ComparisonReport:
    slice_lines: set
    diagnosis_lines: set
    only_in_slice: set
    only_in_diagnosis: set
    diagnoses: list
    nok_outputs: list


def _method_extent(prog, method):
    lines = [s.line for s in S.all_statements(method.body)]
    return (min(lines), max(lines)) if lines else (method.line, method.line)


def _criterion_occs(graph, var, position):
    occs = []
    for occ, info in graph.occ_info.items():
        if occ.var != var:
            continue
        if position == "end":
            occs.append(occ)
            continue
        cid = graph.producer.get(occ)
        if cid == "input" or cid is None:
            occs.append(occ)
        elif graph.components[cid].line <= position:
            occs.append(occ)
    return occs


def backward_slice(program, method_name, criterion, graph=None):
    """Lines of all statements possibly influencing the criterion variables
    at the given position, over the fully expanded graph."""
    prog = program.program if hasattr(program, "program") else program
    method = prog.method(method_name)
    if graph is None:
        graph = deps.full_granularity(program, method_name)
    lo, hi = _method_extent(prog, method)
    pos = criterion.position
    if pos != "end" and not lo <= pos <= hi:
        raise BadPosition(f"line {pos} is outside {method_name} ({lo}..{hi})")
    known = {o.var for o in graph.occ_info}
    for var in criterion.variables:
        if var not in known:
            raise UnknownVariable(f"{var} does not occur in {method_name}")
    edges = graph.occ_edges()
    seen = set()
    work = []
    for var in sorted(criterion.variables):
        work.extend(_criterion_occs(graph, var, pos))
    while work:
        o = work.pop()
        if o in seen:
            continue
        seen.add(o)
        work.extend(edges.get(o, ()))
    lines = set()
    for o in seen:
        cid = graph.producer.get(o)
        if cid is None or cid == "input":
            continue
        comp = graph.components[cid]
        lines |= set(comp.lines) if comp.lines else {comp.line}
    return lines


def diagnosis_lines(graph, diagnoses):
    lines = set()
    for d in diagnoses:
        for cid in d:
            comp = graph.components[cid]
            lines |= set(comp.lines) if comp.lines else {comp.line}
    return lines


def compare_slice_diag(program, method_name, test, budget=None):
    """Union of backward slices for the failed outputs next to the lines
    blamed by single-fault diagnosis on the same test."""
    graph = deps.full_granularity(program, method_name)
    kwargs = {} if budget is None else {"budget": budget}
    trace = interp.execute(program, test.method, test.args, **kwargs)
    obs = interp.derive_observations(trace, test, program)
    nok_vars = [ob.anchor[1] for ob in obs
                if not ob.ok and ob.anchor[0] == "final"]
    # slicing ignores verdicts, so with nothing failing slice the expected
    # outputs instead of returning nothing
    slice_vars = nok_vars or [ob.anchor[1] for ob in obs
                              if ob.anchor[0] == "final"]
    slice_lines = set()
    for var in slice_vars:
        slice_lines |= backward_slice(
            program, method_name, SliceCriterion(frozenset([var]), "end"),
            graph=graph)
    sd = logic.compile_sd(graph)
    ok, nok = deps.materialize_observations(graph, obs)
    if nok:
        diagnoses = engine.diagnose(sd, ok, nok, 1, graph)
    else:
        diagnoses = []
    diag_lines = diagnosis_lines(graph, diagnoses)
    return ComparisonReport(
        slice_lines=slice_lines,
        diagnosis_lines=diag_lines,
        only_in_slice=slice_lines - diag_lines,
        only_in_diagnosis=diag_lines - slice_lines,
        diagnoses=diagnoses,
        nok_outputs=nok_vars,
    )
