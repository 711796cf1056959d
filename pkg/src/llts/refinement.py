"""Ready-simulation refinement over finite graphs.

``refines`` decides the refinement preorder by computing the largest stable
ready simulation on a graph shared by both processes and then matching the
stable consistent descendants of the two roots.  ``alt_refines`` decides the
same preorder through an independent characterisation over all state pairs
and serves as a cross-check oracle.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

from .semantics import (
    BuildLimits,
    Lts,
    build_combined,
    weak_visible_step,
)
from .terms import Term

REASON_READY = "ready-set-mismatch"
REASON_CONSISTENCY = "consistency-violation"
REASON_NO_MOVE = "no-matching-move"
REASON_NO_DESCENDANT = "no-stable-descendant-match"


@dataclass(frozen=True)
class SimRelation:
    """A stable ready simulation over a built graph, as state-index pairs."""

    lts: Lts
    pairs: frozenset[tuple[int, int]]

    def term_pairs(self) -> list[tuple[str, str]]:
        return sorted(
            (str(self.lts.terms[p]), str(self.lts.terms[q])) for p, q in self.pairs
        )

    def __contains__(self, pair: tuple[int, int]) -> bool:
        return pair in self.pairs


@dataclass(frozen=True)
class Counterexample:
    path: tuple[tuple[str, str], ...]  # (action | "eps", state term)
    reason: str


@dataclass(frozen=True)
class RefinementVerdict:
    holds: bool
    witness: SimRelation | None = None
    counterexample: Counterexample | None = None


@dataclass(frozen=True)
class _Deletion:
    seq: int
    reason: str
    action: str | None = None
    successor: int | None = None


def _weak_moves(lts: Lts, i: int) -> dict[str, frozenset[int]]:
    out: dict[str, frozenset[int]] = {}
    if lts.inconsistent[i]:
        return out
    for a in sorted(lts.visible_ready(i)):
        targets = weak_visible_step(lts, i, a)
        if targets:
            out[a] = targets
    return out


def _stable_sim(lts: Lts):
    """Largest stable ready simulation plus a deletion record per rejected
    pair (used to assemble counterexamples)."""
    stable_ids = [i for i in range(len(lts.terms)) if lts.stable[i]]
    weak = {i: _weak_moves(lts, i) for i in stable_ids}
    F = lts.inconsistent

    relation: set[tuple[int, int]] = set()
    deleted: dict[tuple[int, int], _Deletion] = {}
    seq = 0
    for p in stable_ids:
        for q in stable_ids:
            if F[p]:
                relation.add((p, q))
            elif F[q]:
                deleted[(p, q)] = _Deletion(seq, REASON_CONSISTENCY)
                seq += 1
            elif lts.ready(p) != lts.ready(q):
                deleted[(p, q)] = _Deletion(seq, REASON_READY)
                seq += 1
            else:
                relation.add((p, q))

    changed = True
    while changed:
        changed = False
        for pair in sorted(relation):
            if pair not in relation:  # deleted earlier in this round
                continue
            p, q = pair
            if F[p]:
                continue
            broken = None
            for a, targets in weak[p].items():
                q_targets = weak[q].get(a, frozenset())
                for p2 in sorted(targets):
                    if not any((p2, q2) in relation for q2 in q_targets):
                        broken = (a, p2)
                        break
                if broken:
                    break
            if broken:
                relation.discard(pair)
                deleted[pair] = _Deletion(seq, REASON_NO_MOVE, broken[0], broken[1])
                seq += 1
                changed = True
    return relation, deleted, weak


def largest_stable_sim(lts: Lts) -> SimRelation:
    """The largest stable ready simulation over the graph's stable states."""
    relation, _, _ = _stable_sim(lts)
    return SimRelation(lts, frozenset(relation))


def _diagnose(lts, relation, deleted, weak, p0: int, candidates: list[int]):
    """Greedy diagnostic trace: follow the candidate partner that survived
    longest and report why it ultimately fails.  Refutations are tree-shaped
    in general; this path explains one failing branch."""
    path = [("eps", str(lts.terms[p0]))]
    first = True
    p, quorum = p0, list(candidates)
    while True:
        if not quorum:
            reason = REASON_NO_DESCENDANT if first else REASON_NO_MOVE
            return Counterexample(tuple(path), reason)
        records = sorted(
            (deleted[(p, q)].seq, q) for q in quorum if (p, q) in deleted
        )
        if not records:  # every candidate matches after all; stop here
            return Counterexample(tuple(path), REASON_NO_MOVE)
        best = deleted[(p, records[-1][1])]
        if best.reason in (REASON_CONSISTENCY, REASON_READY):
            return Counterexample(tuple(path), best.reason)
        a, p2 = best.action, best.successor
        path.append((a, str(lts.terms[p2])))
        quorum = sorted(weak[records[-1][1]].get(a, frozenset()))
        p = p2
        first = False


def refines(p: Term, q: Term, limits: BuildLimits | None = None) -> RefinementVerdict:
    """Decide whether ``q`` ready-simulates ``p``; a refuted verdict carries a
    diagnostic trace, a holding one the witnessing relation."""
    lts = build_combined([p, q], limits)
    ip, iq = lts.roots[0], lts.roots[1]
    relation, deleted, weak = _stable_sim(lts)
    csd = lts.consistent_stable_descendants()
    p_starts = sorted(csd[ip])
    q_starts = sorted(csd[iq])
    for p1 in p_starts:
        if not any((p1, q1) in relation for q1 in q_starts):
            cex = _diagnose(lts, relation, deleted, weak, p1, q_starts)
            return RefinementVerdict(False, counterexample=cex)
    return RefinementVerdict(True, witness=SimRelation(lts, frozenset(relation)))


def stable_refines(p: Term, q: Term, limits: BuildLimits | None = None) -> bool:
    """Stable ready simulation between the roots themselves: both must be
    stable and related by the largest stable ready simulation."""
    lts = build_combined([p, q], limits)
    ip, iq = lts.roots[0], lts.roots[1]
    if not (lts.stable[ip] and lts.stable[iq]):
        return False
    relation, _, _ = _stable_sim(lts)
    return (ip, iq) in relation


def equivalent(
    p: Term, q: Term, limits: BuildLimits | None = None, stable: bool = False
) -> bool:
    """Mutual refinement; with ``stable=True`` mutual stable-state simulation."""
    if stable:
        return stable_refines(p, q, limits) and stable_refines(q, p, limits)
    return refines(p, q, limits).holds and refines(q, p, limits).holds


def alt_refines(p: Term, q: Term, limits: BuildLimits | None = None) -> bool:
    """Independent formulation of the refinement preorder: the largest
    relation over all state pairs matching stable consistent descendants,
    matching weak visible moves between stable pairs, and equating ready sets
    of consistent stable pairs."""
    lts = build_combined([p, q], limits)
    n = len(lts.terms)
    F = lts.inconsistent
    csd = lts.consistent_stable_descendants()
    weak = {i: _weak_moves(lts, i) for i in range(n) if lts.stable[i]}

    relation = {
        (i, j)
        for i in range(n)
        for j in range(n)
        if not (
            lts.stable[i]
            and lts.stable[j]
            and not F[i]
            and lts.ready(i) != lts.ready(j)
        )
    }

    changed = True
    while changed:
        changed = False
        for pair in sorted(relation):
            if pair not in relation:
                continue
            i, j = pair
            ok = all(
                any((p2, q2) in relation for q2 in csd[j]) for p2 in csd[i]
            )
            if ok and lts.stable[i] and lts.stable[j]:
                for a, targets in weak[i].items():
                    q_targets = weak[j].get(a, frozenset())
                    if not all(
                        any((p2, q2) in relation for q2 in q_targets)
                        for p2 in targets
                    ):
                        ok = False
                        break
            if not ok:
                relation.discard(pair)
                changed = True
    return (lts.roots[0], lts.roots[1]) in relation


def verdict_to_json(verdict: RefinementVerdict) -> str:
    doc: dict = {"holds": verdict.holds}
    if verdict.witness is not None:
        doc["witness_pairs"] = [list(pair) for pair in verdict.witness.term_pairs()]
    if verdict.counterexample is not None:
        doc["counterexample"] = {
            "path": [list(step) for step in verdict.counterexample.path],
            "reason": verdict.counterexample.reason,
        }
    return json.dumps(doc, indent=2)
