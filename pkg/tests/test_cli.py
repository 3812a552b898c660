"""Command line behavior: output shape and exit codes."""

import json

import pytest

from depdiag import cli

import corpus


@pytest.fixture
def fig2_files(tmp_path):
    prog = tmp_path / "fig2.mjv"
    prog.write_text(corpus.FIG2_SRC)
    test = tmp_path / "fig2.test.json"
    test.write_text(json.dumps(corpus.FIG2_TEST))
    return str(prog), str(test)


def run(capsys, *argv):
    code = cli.main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_deps_lists_components(capsys, fig2_files):
    prog, _ = fig2_files
    code, out, _ = run(capsys, "deps", prog, "--method", "test")
    assert code == 0
    data = json.loads(out)
    assert [c["component"] for c in data] == ["C4", "C5", "C6", "C7", "C8"]
    assert data[0]["fd"] == [{"target": "s1#1", "deps": ["a#0", "c#0"]}]


def test_model_prints_clauses(capsys, fig2_files):
    prog, _ = fig2_files
    code, out, _ = run(capsys, "model", prog, "--method", "test")
    assert code == 0
    assert "C8: -AB(C8) & ok(s2#1) & ok(s3#1) -> ok(g#1)" in out
    assert "ok(g#1) & nok(g#1) -> false" in out


def test_diagnose_json(capsys, fig2_files):
    prog, test = fig2_files
    code, out, _ = run(capsys, "diagnose", prog, "--test", test)
    assert code == 0
    data = json.loads(out)
    assert [d["components"] for d in data["diagnoses"]] == \
        [["C5"], ["C6"], ["C8"]]
    assert [d["lines"] for d in data["diagnoses"]] == [[5], [6], [8]]
    assert data["conflicts"][0] == ["C5", "C6", "C8"]


def test_diagnose_with_value_filter(capsys, fig2_files):
    prog, test = fig2_files
    code, out, _ = run(capsys, "diagnose", prog, "--test", test,
                       "--value-filter")
    assert code == 0
    data = json.loads(out)
    assert [d["components"] for d in data["diagnoses"]] == [["C6"], ["C8"]]


def test_slice(capsys, fig2_files):
    prog, _ = fig2_files
    code, out, _ = run(capsys, "slice", prog, "--method", "test",
                       "--vars", "g", "--at", "8")
    assert code == 0
    assert json.loads(out) == {"lines": [5, 6, 8]}
    code, out, _ = run(capsys, "slice", prog, "--method", "test",
                       "--vars", "f,g", "--at", "end")
    assert json.loads(out) == {"lines": [4, 5, 6, 7, 8]}


def test_trace(capsys, fig2_files):
    prog, test = fig2_files
    code, out, _ = run(capsys, "trace", prog, "--test", test)
    assert code == 0
    data = json.loads(out)
    assert data["final"]["f"] == 12 and data["final"]["g"] == 12
    assert len(data["steps"]) == 5


def test_session_replay_and_snapshot(capsys, tmp_path, fig2_files):
    prog, test = fig2_files
    answers = tmp_path / "answers.json"
    answers.write_text(json.dumps(["correct", "correct"]))
    snap = tmp_path / "snap.json"
    code, out, err = run(capsys, "session", prog, "--test", test,
                         "--replay", str(answers),
                         "--snapshot-out", str(snap))
    assert code == 0
    report = json.loads(out)
    assert report["status"] == "localized"
    assert report["Total2"] == 3
    assert report["localized"]["lines"] == [8]
    saved = json.loads(snap.read_text())
    assert saved["status"] == "localized"

    code, out, _ = run(capsys, "next", str(snap))
    assert code == 0
    assert json.loads(out)["status"] == "localized"


def test_session_replay_too_short_fails(capsys, tmp_path, fig2_files):
    prog, test = fig2_files
    answers = tmp_path / "answers.json"
    answers.write_text(json.dumps(["correct"]))
    code, _, err = run(capsys, "session", prog, "--test", test,
                       "--replay", str(answers))
    assert code == 1
    assert "replay ended" in err


def test_missing_file_is_domain_error(capsys):
    code, _, err = run(capsys, "deps", "/no/such/file.mjv",
                       "--method", "test")
    assert code == 1
    assert "error:" in err


def test_unknown_variable_is_domain_error(capsys, fig2_files):
    prog, _ = fig2_files
    code, _, err = run(capsys, "slice", prog, "--method", "test",
                       "--vars", "zz", "--at", "end")
    assert code == 1
    assert "error:" in err


def test_usage_error_exit_code(capsys, fig2_files):
    prog, _ = fig2_files
    assert run(capsys, "deps", prog)[0] == 2  # --method missing
    assert run(capsys, "frobnicate")[0] == 2


def test_parse_error_reported(capsys, tmp_path):
    bad = tmp_path / "bad.mjv"
    bad.write_text("class A { public static void f(int x) { int y y = 1; } }")
    code, _, err = run(capsys, "deps", str(bad), "--method", "f")
    assert code == 1
    assert "error:" in err
