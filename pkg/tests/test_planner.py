"""Measurement selection and expected-survivor scoring."""

import random

from depdiag import deps, engine, logic, planner

import corpus


def fig2_setup():
    prog = corpus.fig2()
    g = deps.analyze(prog, "test")
    sd = logic.compile_sd(g)
    ok = {deps.Occ(v, 0) for v in "abcde"} | {deps.Occ("f", 1)}
    nok = {deps.Occ("g", 1)}
    cands = engine.diagnose(sd, ok, nok, graph=g)
    return g, sd, ok, nok, cands


def test_fig2_best_measurement():
    g, sd, ok, nok, cands = fig2_setup()
    q = planner.select_measurement(sd, g, cands, ok, nok)
    assert str(q.occ) == "s2#1"
    assert abs(q.expected_survivors - 5 / 3) < 1e-9
    assert abs(q.p_nok - 1 / 3) < 1e-9
    ok_out, nok_out = q.outcomes
    assert {sorted(d)[0] for d in ok_out.survivors} == {"C6", "C8"}
    assert {sorted(d)[0] for d in nok_out.survivors} == {"C5"}


def test_outcome_probabilities_sum_to_one():
    g, sd, ok, nok, cands = fig2_setup()
    for q in planner.candidate_queries(sd, g, cands, ok, nok):
        ok_out, nok_out = q.outcomes
        assert abs(ok_out.probability + nok_out.probability - 1) < 1e-9


def test_no_measurement_for_single_candidate():
    g, sd, ok, nok, cands = fig2_setup()
    assert planner.select_measurement(sd, g, cands[:1], ok, nok) is None


def test_observed_occurrences_are_not_offered():
    g, sd, ok, nok, cands = fig2_setup()
    offered = {q.occ for q in planner.candidate_queries(sd, g, cands, ok, nok)}
    assert not offered & (ok | nok)


def _slow_outcomes(sd, candidates, occ, ok, nok):
    """Reference route: survivors via full consistency checks per answer."""
    surv_ok = tuple(d for d in candidates if logic.check_consistency(
        sd, ok | {occ}, nok, d).consistent)
    surv_nok = tuple(d for d in candidates if logic.check_consistency(
        sd, ok, nok | {occ}, d).consistent)
    return surv_ok, surv_nok


def test_fast_partition_matches_consistency_checks_on_fig2():
    g, sd, ok, nok, cands = fig2_setup()
    for occ in sd.occurrences:
        if occ in ok or occ in nok:
            continue
        ok_out, nok_out = planner.partition_outcomes(
            sd, g, cands, occ, ok, nok)
        ref_ok, ref_nok = _slow_outcomes(sd, cands, occ, ok, nok)
        assert set(ok_out.survivors) == set(ref_ok), occ
        assert set(nok_out.survivors) == set(ref_nok), occ


def test_fast_partition_matches_consistency_checks_on_random_programs():
    rng = random.Random(23)
    checked = 0
    while checked < 30:
        prog, _ = corpus.random_straightline(rng, rng.randint(2, 7))
        g = deps.analyze(prog, "run")
        sd = logic.compile_sd(g)
        ok, nok = corpus.random_observations(rng, g)
        if ok & nok:
            continue
        cands = engine.diagnose(sd, ok, nok, graph=g)
        if not cands or cands == [frozenset()]:
            continue
        checked += 1
        for occ in sorted(sd.occurrences):
            if occ in ok or occ in nok:
                continue
            ok_out, nok_out = planner.partition_outcomes(
                sd, g, cands, occ, ok, nok)
            ref_ok, ref_nok = _slow_outcomes(sd, cands, occ, ok, nok)
            assert set(ok_out.survivors) == set(ref_ok), (occ, ok, nok)
            assert set(nok_out.survivors) == set(ref_nok), (occ, ok, nok)


def test_selected_measurement_is_informative():
    g, sd, ok, nok, cands = fig2_setup()
    q = planner.select_measurement(sd, g, cands, ok, nok)
    assert q.informative
    assert q.expected_survivors < len(cands)


def test_uninformative_when_candidates_indistinguishable():
    # two parallel chains with only their ends observed: querying either
    # intermediate cannot separate the two explanations
    src = """\
class A {
  public static void run(int x) {
    int m, y;
    m = x + 1;
    y = m + 1;
  }
}
"""
    prog = corpus.load(src, "chain")
    g = deps.analyze(prog, "run")
    sd = logic.compile_sd(g)
    ok = {deps.Occ("x", 0)}
    nok = {deps.Occ("y", 1)}
    cands = engine.diagnose(sd, ok, nok, graph=g)
    assert len(cands) == 2
    q = planner.select_measurement(sd, g, cands, ok, nok)
    # m discriminates the two chain components, so a query must exist
    assert q is not None and str(q.occ) == "m#1"
    # after observing the discriminator both ways nothing informative is left
    cands_ok = engine.diagnose(sd, ok | {q.occ}, nok, graph=g)
    assert planner.select_measurement(sd, g, cands_ok, ok | {q.occ}, nok) is None
