"""Parser and static checker behavior."""

import pytest

from depdiag import checker, parser
from depdiag import syntax as S
from depdiag.errors import CheckError, ParseError

import corpus


def test_parse_assigns_statement_ids_and_lines():
    prog = parser.parse(corpus.FIG2_SRC)
    method = prog.method("test")
    kinds = [type(s).__name__ for s in method.body]
    assert kinds == ["VarDecl"] + ["Assign"] * 5
    lines = [s.line for s in method.body if isinstance(s, S.Assign)]
    assert lines == [4, 5, 6, 7, 8]
    sids = [s.sid for s in S.all_statements(method.body)]
    assert len(sids) == len(set(sids))


def test_parse_round_trips_through_pretty_printer():
    prog = parser.parse(corpus.LIBRARY_SRC)
    text = S.pretty_print(prog)
    again = parser.parse(text)
    assert S.structurally_equal(prog, again)


def test_parse_rejects_missing_semicolon():
    with pytest.raises(ParseError) as exc:
        parser.parse("class A { public static void f(int x) { int y y = 1; } }")
    assert exc.value.line == 1


def test_parse_precedence():
    prog = parser.parse(
        "class A { public static void f(int x) { int y; y = x + x * x; } }")
    expr = prog.method("f").body[1].expr
    assert isinstance(expr, S.Binary) and expr.op == "+"
    assert isinstance(expr.right, S.Binary) and expr.right.op == "*"


def test_check_rejects_undeclared_variable():
    with pytest.raises(CheckError, match="undeclared variable y"):
        checker.check(parser.parse(
            "class A { public static void f(int x) { y = 1; } }"))


def test_check_rejects_boolean_misuse():
    with pytest.raises(CheckError, match="boolean"):
        checker.check(parser.parse(
            "class A { public static void f(int x) { int y; y = x && 1; } }"))


def test_check_accepts_corpus_programs():
    for src in [corpus.FIG2_SRC, corpus.ADDER_SRC,
                corpus.LIBRARY_SRC, *corpus.SORT_SRCS.values()]:
        checked = checker.check(parser.parse(src))
        assert checked.program.methods


def test_checked_program_exposes_source():
    checked = corpus.fig2()
    assert checked.program.source_text == corpus.FIG2_SRC
    assert checked.method("test") is checked.program.method("test")


def test_statement_lookup_by_sid():
    prog = parser.parse(corpus.LIBRARY_SRC)
    for s in prog.statements():
        assert prog.statement(s.sid) is s


def test_subexpressions_enumeration():
    prog = parser.parse(
        "class A { public static void f(int x) { int y; y = x * 2 + 1; } }")
    expr = prog.method("f").body[1].expr
    rendered = [S.format_expr(e) for e in S.subexpressions(expr)]
    assert "x * 2 + 1" in rendered
    assert "x * 2" in rendered
    assert "x" in rendered
