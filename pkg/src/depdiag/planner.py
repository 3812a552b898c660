"""Measurement selection for narrowing down diagnosis candidates.

Each candidate set of abnormal components partitions the possible verdicts
for a queried occurrence: the occurrence can only be wrong under a candidate
if it is dependency-reachable from a blamed component and its correctness is
not already forced by propagation.  The planner estimates the expected
number of surviving candidates per query and picks the minimizing one.

Scoring many occurrences against the same candidates would repeat near
identical unit propagations, so each candidate gets a propagation context:
the base ok closure is computed once and a hypothetical ok(occ) answer is
evaluated by an incremental propagation seeded at that occurrence.  A
hypothetical nok(occ) answer needs no propagation at all: it contradicts a
candidate exactly when the candidate already forces ok(occ).
"""

from __future__ import annotations

from dataclasses import dataclass

from . import logic


@dataclass(frozen=True)
class Outcome:
    verdict: bool  # True = answered ok
    survivors: tuple  # candidate sets remaining under that answer
    probability: float


@dataclass(frozen=True)
class MeasurementQuery:
    occ: object
    expected_survivors: float
    worst_case: int
    p_nok: float
    outcomes: tuple  # (ok Outcome, nok Outcome)
    informative: bool


class CandidateContext:
    """Base propagation state for one candidate plus the observed facts."""

    def __init__(self, sd, ok_occs, nok_occs, delta):
        self.delta = delta
        self.nok = set(nok_occs)
        normals = sd.components - set(delta)
        self.watch = {}
        counts = {}
        derived = {o: True for o in ok_occs}
        queue = list(derived)
        for i, cl in enumerate(sd.clauses):
            if cl.comp not in normals:
                continue
            counts[i] = len(cl.body)
            for o in cl.body:
                self.watch.setdefault(o, []).append((i, cl.head))
            if not cl.body and cl.head not in derived:
                derived[cl.head] = True
                queue.append(cl.head)
        processed = set()
        while queue:
            o = queue.pop()
            if o in processed:
                continue
            processed.add(o)
            for i, head in self.watch.get(o, ()):
                counts[i] -= 1
                if counts[i] == 0 and head not in derived:
                    derived[head] = True
                    queue.append(head)
        self.counts = counts
        self.processed = processed
        self.derived = derived

    def nok_survives(self, occ):
        """Consistent with answering nok(occ): ok(occ) must not be forced."""
        return occ not in self.derived

    def ok_survives(self, occ):
        """Consistent with answering ok(occ): the seeded propagation must
        not reach an observed nok occurrence."""
        if occ in self.derived:
            return True
        counts = dict(self.counts)
        local = {occ}
        queue = [occ]
        processed = set(self.processed)
        while queue:
            o = queue.pop()
            if o in processed:
                continue
            processed.add(o)
            for i, head in self.watch.get(o, ()):
                counts[i] -= 1
                if counts[i] == 0 and head not in self.derived \
                        and head not in local:
                    if head in self.nok:
                        return False
                    local.add(head)
                    queue.append(head)
        return True


def _contexts(sd, ok_occs, nok_occs, candidates):
    return {d: CandidateContext(sd, ok_occs, nok_occs, d) for d in candidates}


def _nok_possible(graph, ctx, occ):
    if occ in ctx.derived:
        return False
    return any(occ in graph.reachable_from(c) for c in ctx.delta)


def partition_outcomes(sd, graph, candidates, occ, ok_occs, nok_occs,
                       contexts=None):
    """Survivor sets and outcome probabilities for querying one occurrence.

    The nok probability is the fraction of candidates under which the
    occurrence can actually carry a wrong value."""
    candidates = list(candidates)
    if contexts is None:
        contexts = _contexts(sd, ok_occs, nok_occs, candidates)
    nok_votes = sum(
        1 for d in candidates if _nok_possible(graph, contexts[d], occ))
    p_nok = nok_votes / len(candidates) if candidates else 0.0
    surv_ok = tuple(d for d in candidates if contexts[d].ok_survives(occ))
    surv_nok = tuple(d for d in candidates if contexts[d].nok_survives(occ))
    return (Outcome(True, surv_ok, 1.0 - p_nok),
            Outcome(False, surv_nok, p_nok))


def score(sd, graph, candidates, occ, ok_occs, nok_occs, contexts=None):
    ok_out, nok_out = partition_outcomes(
        sd, graph, candidates, occ, ok_occs, nok_occs, contexts)
    expected = (ok_out.probability * len(ok_out.survivors)
                + nok_out.probability * len(nok_out.survivors))
    worst = max(len(ok_out.survivors), len(nok_out.survivors))
    return MeasurementQuery(
        occ=occ,
        expected_survivors=expected,
        worst_case=worst,
        p_nok=nok_out.probability,
        outcomes=(ok_out, nok_out),
        informative=expected < len(candidates) - 1e-9,
    )


def candidate_queries(sd, graph, candidates, ok_occs, nok_occs):
    """Scores for every yet-unobserved occurrence, best first."""
    observed = set(ok_occs) | set(nok_occs)
    candidates = list(candidates)
    contexts = _contexts(sd, ok_occs, nok_occs, candidates)
    out = []
    for occ in sorted(graph.occ_info, key=lambda o: graph.occ_info[o].seq):
        if occ in observed:
            continue
        out.append(score(sd, graph, candidates, occ, ok_occs, nok_occs,
                         contexts))
    out.sort(key=lambda q: (q.expected_survivors, q.worst_case,
                            graph.occ_info[q.occ].seq))
    return out


def select_measurement(sd, graph, candidates, ok_occs, nok_occs):
    """Best informative query, or None when measuring cannot discriminate
    further (a single candidate left, or every query is uninformative)."""
    candidates = list(candidates)
    if len(candidates) <= 1:
        return None
    queries = candidate_queries(sd, graph, candidates, ok_occs, nok_occs)
    for q in queries:
        if q.informative:
            return q
    return None
