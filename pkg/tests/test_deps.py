"""Occurrence indexing, functional dependencies, granularity control."""

import pytest

from depdiag import deps, parser, checker
from depdiag import syntax as S
from depdiag.errors import BadPosition, UnknownVariable

import corpus


def fig2_graph():
    return deps.analyze(corpus.fig2(), "test")


def test_fig2_components_one_per_assignment():
    g = fig2_graph()
    assert {c: (v.kind, v.line) for c, v in g.components.items()} == {
        "C4": ("assign", 4), "C5": ("assign", 5), "C6": ("assign", 6),
        "C7": ("assign", 7), "C8": ("assign", 8)}


def test_fig2_functional_dependencies():
    g = fig2_graph()
    def fd(cid):
        pairs = g.components[cid].fds
        assert len(pairs) == 1
        return str(pairs[0].target), sorted(map(str, pairs[0].antecedents))
    assert fd("C4") == ("s1#1", ["a#0", "c#0"])
    assert fd("C5") == ("s2#1", ["b#0", "d#0"])
    assert fd("C6") == ("s3#1", ["c#0", "e#0"])
    assert fd("C7") == ("f#1", ["s1#1", "s2#1"])
    assert fd("C8") == ("g#1", ["s2#1", "s3#1"])


def test_fig2_inputs_outputs_and_producers():
    g = fig2_graph()
    assert sorted(map(str, g.inputs)) == ["a#0", "b#0", "c#0", "d#0", "e#0"]
    assert sorted(map(str, g.outputs)) == ["f#1", "g#1"]
    assert g.producer[deps.Occ("f", 1)] == "C7"
    assert g.producer[deps.Occ("a", 0)] == "input"


def test_straightline_fds_match_naive_reading():
    # independent route: read each assignment's variables straight off the
    # syntax tree and compare with the graph's dependency pairs
    prog = corpus.fig2()
    g = fig2_graph()
    for s in prog.program.method("test").body:
        if not isinstance(s, S.Assign):
            continue
        comp = g.component_of_sid(s.sid)
        naive = {v for v in S.expr_vars(s.expr)}
        got = {a.var for fd in comp.fds for a in fd.antecedents}
        assert got == naive, s.line


def test_reachability_and_consumers():
    g = fig2_graph()
    assert sorted(map(str, g.reachable_from("C5"))) == ["f#1", "g#1", "s2#1"]
    assert sorted(map(str, g.reachable_from("C8"))) == ["g#1"]
    cons = g.consumers()
    assert {str(o) for o in cons[deps.Occ("s2", 1)]} == {"f#1", "g#1"}


def test_materialize_anchors():
    g = fig2_graph()
    assert deps.materialize(g, ("input", "a")) == deps.Occ("a", 0)
    assert deps.materialize(g, ("final", "g")) == deps.Occ("g", 1)
    sid = g.components["C4"].sid
    assert deps.materialize(g, ("after", sid, (), "s1", ())) == deps.Occ("s1", 1)
    with pytest.raises(UnknownVariable):
        deps.materialize(g, ("input", "zz"))
    with pytest.raises(BadPosition):
        deps.materialize(g, ("cond", sid, (), ()))


def test_loops_start_folded_into_one_composite():
    prog = corpus.load(corpus.SORT_SRCS["bubbleSort"], "bubble")
    g = deps.analyze(prog, "bubbleSort")
    kinds = {v.kind for v in g.components.values()}
    assert kinds == {"assign", "while"}
    loop = next(v for v in g.components.values() if v.kind == "while")
    assert loop.line == 5
    assert set(loop.lines) == {5, 6, 7, 8, 9, 10, 11, 13, 15}


def test_expand_exposes_condition_and_inner_loop():
    prog = corpus.load(corpus.SORT_SRCS["bubbleSort"], "bubble")
    g = deps.analyze(prog, "bubbleSort")
    loop_cid = next(c for c, v in g.components.items() if v.kind == "while")
    g2 = deps.expand_component(g, loop_cid)
    kinds = {v.kind for v in g2.components.values()}
    assert "cond" in kinds and "while" in kinds
    cond = next(v for v in g2.components.values() if v.kind == "cond")
    assert cond.line == 5
    # per-round condition occurrences exist for the expanded loop
    rounds = [k for k in g2.cond_occs if k[0] == cond.sid]
    assert rounds and all(len(k[1]) == 1 for k in rounds)


def test_expanded_loops_unroll_once_per_assigned_variable():
    prog = corpus.load(corpus.LIBRARY_SRC, "library")
    g = deps.analyze(prog, "sumRange")
    loop_cid = next(c for c, v in g.components.items() if v.kind == "while")
    g2 = deps.expand_component(g, loop_cid)
    cond = next(v for v in g2.components.values() if v.kind == "cond")
    rounds = {k[1] for k in g2.cond_occs if k[0] == cond.sid}
    # the body assigns s and lo, so two rounds are modeled
    assert rounds == {(1,), (2,)}


def test_full_granularity_is_acyclic_everywhere():
    for name, src in corpus.SORT_SRCS.items():
        g = deps.full_granularity(corpus.load(src, name), name)
        assert g.check_acyclic()
    g = deps.full_granularity(corpus.load(corpus.LIBRARY_SRC, "lib"), "spread")
    assert g.check_acyclic()


def test_call_inlining_namespaces_callee_variables():
    prog = corpus.load(corpus.LIBRARY_SRC, "library")
    g = deps.full_granularity(prog, "spread")
    callee_vars = {o.var for o in g.occ_info if "@" in o.var and ":" in o.var}
    assert any(v.startswith("sumRange@") for v in callee_vars)
    assert any(v.startswith("argMax@") for v in callee_vars)


def test_callee_summary():
    prog = corpus.load(corpus.LIBRARY_SRC, "library")
    summ = deps.callee_summary(prog, "sumRange")
    assert set(summ.ret) == {"a", "lo", "hi"}
    assert summ.mutated == {}
    bub = corpus.load(corpus.SORT_SRCS["bubbleSort"], "bubble")
    summ2 = deps.callee_summary(bub, "bubbleSort")
    assert "a" in summ2.mutated
    assert "a" in summ2.mutated["a"]


def test_statement_dependencies_single_statement():
    prog = corpus.fig2()
    sid = prog.program.method("test").body[4].sid  # f = s1 + s2
    fds = deps.statement_dependencies(prog, "test", sid)
    assert len(fds) == 1
    assert str(fds[0].target) == "f#1"
    assert sorted(map(str, fds[0].antecedents)) == ["s1#1", "s2#1"]


def test_occurrence_indices_increase_per_write():
    src = """\
class A {
  public static void f(int x) {
    int y;
    y = x;
    y = y + 1;
    y = y + 1;
  }
}
"""
    prog = corpus.load(src, "reassign")
    g = deps.analyze(prog, "f")
    ys = sorted(o.index for o in g.occ_info if o.var == "y")
    assert ys == [1, 2, 3]
    assert g.final_binding["y"] == deps.Occ("y", 3)
