"""Horn-clause system description and consistency checking.

The model is definite Horn: one behavior clause per functional dependency
pair, guarded by the owning component being normal, plus one integrity rule
per occurrence forbidding ok(v) and nok(v) together.  Consistency under an
abnormality assignment is decided by unit propagation of ok facts, which is
sound and complete for this clause shape; on contradiction a minimized
conflict set of normal components is extracted.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import UnknownAtom


@dataclass(frozen=True)
class Clause:
    comp: str  # guard component id
    body: frozenset  # of Occ
    head: object  # Occ

    def render(self):
        parts = [f"-AB({self.comp})"] + [f"ok({o})" for o in sorted(self.body)]
        return f"{self.comp}: {' & '.join(parts)} -> ok({self.head})"


@dataclass
class SystemDescription:
    clauses: list
    components: set
    occurrences: set
    _by_body: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        for cl in self.clauses:
            for o in cl.body:
                self._by_body.setdefault(o, []).append(cl)

    def contradiction_rules(self):
        return [(o, f"ok({o}) & nok({o}) -> false") for o in sorted(self.occurrences)]

    def render(self):
        lines = [cl.render() for cl in self.clauses]
        lines += [rule for _, rule in self.contradiction_rules()]
        return lines


@dataclass(frozen=True)
class Verdict:
    consistent: bool
    conflict: object = None  # frozenset of component ids when inconsistent


@dataclass
class Stats:
    checks: int = 0
    propagations: int = 0


def compile_sd(graph):
    clauses = []
    for cid in sorted(graph.components):
        comp = graph.components[cid]
        for fd in comp.fds:
            clauses.append(Clause(cid, fd.antecedents, fd.target))
    return SystemDescription(
        clauses=clauses,
        components=set(graph.components),
        occurrences=set(graph.occ_info),
    )


def split_observations(sd, ok_occs, nok_occs):
    for o in set(ok_occs) | set(nok_occs):
        if o not in sd.occurrences:
            raise UnknownAtom(f"observation over unknown occurrence {o}")


def propagate_ok(sd, ok_occs, normals, stats=None):
    """Least set of ok facts derivable with the given components normal.

    Returns (ok_set, parent) where parent maps each derived occurrence to
    the clause that produced it (observed facts map to None)."""
    if stats is not None:
        stats.propagations += 1
    ok = {o: None for o in ok_occs}
    missing = {}
    watch = {}
    queue = list(ok)
    for cl in sd.clauses:
        if cl.comp not in normals:
            continue
        missing[cl] = len(cl.body)
        for o in cl.body:
            watch.setdefault(o, []).append(cl)
        if not cl.body and cl.head not in ok:
            ok[cl.head] = cl
            queue.append(cl.head)
    processed = set()
    while queue:
        o = queue.pop()
        if o in processed:
            continue
        processed.add(o)
        for cl in watch.get(o, ()):
            missing[cl] -= 1
            if missing[cl] == 0 and cl.head not in ok:
                ok[cl.head] = cl
                queue.append(cl.head)
    return ok


def _inconsistent(sd, ok_occs, nok_occs, normals, stats=None):
    ok = propagate_ok(sd, ok_occs, normals, stats)
    for v in nok_occs:
        if v in ok:
            return v, ok
    return None, ok


def check_consistency(sd, ok_occs, nok_occs, abnormal, stats=None):
    """Decide consistency of SD plus observations under an AB assignment.

    `abnormal` holds the component ids assumed faulty; all others are
    assumed normal.  On inconsistency the returned conflict is a minimal
    set of normal components that cannot all be correct."""
    split_observations(sd, ok_occs, nok_occs)
    if stats is not None:
        stats.checks += 1
    if set(ok_occs) & set(nok_occs):
        return Verdict(False, frozenset())
    normals = sd.components - set(abnormal)
    hit, ok = _inconsistent(sd, ok_occs, nok_occs, normals, stats)
    if hit is None:
        return Verdict(True)
    # components whose clauses participated in deriving the contradiction
    involved = set()
    stack = [hit]
    seen = set()
    while stack:
        o = stack.pop()
        if o in seen:
            continue
        seen.add(o)
        cl = ok.get(o)
        if cl is not None:
            involved.add(cl.comp)
            stack.extend(cl.body)
    conflict = set(involved)
    for c in sorted(involved):
        smaller = conflict - {c}
        hit2, _ = _inconsistent(sd, ok_occs, nok_occs, smaller, stats)
        if hit2 is not None:
            conflict = smaller
    return Verdict(False, frozenset(conflict))


def truth_table_consistent(sd, ok_occs, nok_occs, abnormal, limit_atoms=20):
    """Brute-force satisfiability over all ok-atom assignments.

    Independent oracle for check_consistency; exponential, so only usable
    on small systems."""
    atoms = sorted(sd.occurrences)
    if len(atoms) > limit_atoms:
        raise ValueError(f"too many atoms ({len(atoms)}) for truth-table check")
    normals = sd.components - set(abnormal)
    active = [cl for cl in sd.clauses if cl.comp in normals]
    ok_set = set(ok_occs)
    nok_set = set(nok_occs)
    for mask in range(1 << len(atoms)):
        assign = {a: bool(mask >> i & 1) for i, a in enumerate(atoms)}
        if any(not assign[o] for o in ok_set):
            continue
        if any(assign[o] for o in nok_set):
            continue
        if all(assign[cl.head] or not all(assign[o] for o in cl.body)
               for cl in active):
            return True
    return False
