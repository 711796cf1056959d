"""Operational semantics: one-step transitions, bounded graph construction,
the inconsistency predicate as a least fixpoint, and model validators.

Internal moves take precedence over visible ones: a composition offers a
visible action only while the blocking operand has no internal move.  Since
every internal-move rule has positive premises only, transitions are computed
internal-first and the "no internal move" side conditions are read off the
finished operand results.
"""

from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass, field

from .terms import (
    TAU,
    Bottom,
    Conj,
    Disj,
    ExtChoice,
    Nil,
    Parallel,
    Prefix,
    Rec,
    Term,
    Var,
    free_vars,
    is_visible,
    operands,
    rank_inconsistent,
    rank_transition,
    unfold_rec,
)

DEFAULT_MAX_STATES = 10_000
DEFAULT_MAX_UNFOLD_DEPTH = 1_000


@dataclass(frozen=True)
class BuildLimits:
    max_states: int = DEFAULT_MAX_STATES
    max_unfold_depth: int = DEFAULT_MAX_UNFOLD_DEPTH

    def __post_init__(self):
        if self.max_states <= 0 or self.max_unfold_depth <= 0:
            raise ValueError("limits must be positive")


class StateBoundExceeded(RuntimeError):
    """Exploration needed more states than the configured bound allows."""

    def __init__(self, count: int):
        super().__init__(f"state bound exceeded at {count} terms")
        self.count = count


class UnfoldDepthExceeded(RuntimeError):
    """Recursion unfolding failed to reach a guard within the bound; the
    input is effectively unguarded."""

    def __init__(self, depth: int):
        super().__init__(f"recursion unfolded {depth} times without reaching a guard")
        self.depth = depth


def _dedup(moves: list[tuple[str, Term]]) -> tuple[tuple[str, Term], ...]:
    seen = set()
    out = []
    for m in moves:
        if m not in seen:
            seen.add(m)
            out.append(m)
    return tuple(out)


def step(
    t: Term,
    max_unfold_depth: int = DEFAULT_MAX_UNFOLD_DEPTH,
    _memo: dict | None = None,
) -> list[tuple[str, Term]]:
    """All one-step transitions of a closed term, internal moves first.

    ``_memo`` may be shared across calls (completed results stay valid); the
    unfold budget is charged per call.
    """
    if free_vars(t):
        raise ValueError(f"transitions are defined for closed terms only: {t}")
    budget = max_unfold_depth
    memo: dict[Term, tuple[tuple[str, Term], ...]] = (
        _memo if _memo is not None else {}
    )

    def go(t: Term) -> tuple[tuple[str, Term], ...]:
        nonlocal budget
        cached = memo.get(t)
        if cached is not None:
            return cached
        match t:
            case Nil() | Bottom():
                out: tuple[tuple[str, Term], ...] = ()
            case Prefix(a, body):
                out = ((a, body),)
            case Disj(l, r):
                out = _dedup([(TAU, l), (TAU, r)])
            case ExtChoice(l, r):
                lt, rt = go(l), go(r)
                moves = [(TAU, ExtChoice(s, r)) for a, s in lt if a == TAU]
                moves += [(TAU, ExtChoice(l, s)) for a, s in rt if a == TAU]
                if all(a != TAU for a, _ in rt):
                    moves += [(a, s) for a, s in lt if a != TAU]
                if all(a != TAU for a, _ in lt):
                    moves += [(a, s) for a, s in rt if a != TAU]
                out = _dedup(moves)
            case Conj(l, r):
                lt, rt = go(l), go(r)
                moves = [(TAU, Conj(s, r)) for a, s in lt if a == TAU]
                moves += [(TAU, Conj(l, s)) for a, s in rt if a == TAU]
                for a, s1 in lt:
                    if a == TAU:
                        continue
                    moves += [(a, Conj(s1, s2)) for b, s2 in rt if b == a]
                out = _dedup(moves)
            case Parallel(sync, l, r):
                lt, rt = go(l), go(r)
                moves = [(TAU, Parallel(sync, s, r)) for a, s in lt if a == TAU]
                moves += [(TAU, Parallel(sync, l, s)) for a, s in rt if a == TAU]
                if all(a != TAU for a, _ in rt):
                    moves += [
                        (a, Parallel(sync, s, r))
                        for a, s in lt
                        if a != TAU and a not in sync
                    ]
                if all(a != TAU for a, _ in lt):
                    moves += [
                        (a, Parallel(sync, l, s))
                        for a, s in rt
                        if a != TAU and a not in sync
                    ]
                for a, s1 in lt:
                    if a in sync:
                        moves += [(a, Parallel(sync, s1, s2)) for b, s2 in rt if b == a]
                out = _dedup(moves)
            case Rec(_, _):
                if budget <= 0:
                    raise UnfoldDepthExceeded(max_unfold_depth)
                budget -= 1
                out = go(unfold_rec(t))
            case Var(_):
                raise ValueError("open term")
            case _:
                raise TypeError(f"not a term: {t!r}")
        memo[t] = out
        return out

    return list(go(t))


class Lts:
    """A finite transition graph over structurally distinct closed terms.

    ``terms`` is the support universe: the states reachable from the roots
    plus every operand subterm and recursion expansion needed to evaluate the
    inconsistency predicate.  Indices into ``terms`` identify states.
    """

    __slots__ = (
        "terms",
        "index",
        "roots",
        "transitions",
        "stable",
        "inconsistent",
        "reachable",
        "limits",
        "_shape",
        "_csd",
        "_tau_stable",
    )

    def __init__(self, terms, index, roots, transitions, limits):
        self.terms: list[Term] = terms
        self.index: dict[Term, int] = index
        self.roots: list[int] = roots
        self.transitions: list[tuple[tuple[str, int], ...]] = transitions
        self.limits: BuildLimits = limits
        self.stable: list[bool] = [
            all(a != TAU for a, _ in succ) for succ in transitions
        ]
        self.inconsistent: list[bool] = [False] * len(terms)
        self.reachable: list[bool] = self._compute_reachable()
        self._shape = None
        self._csd = None
        self._tau_stable: dict[int, frozenset[int]] = {}

    def _compute_reachable(self) -> list[bool]:
        seen = [False] * len(self.terms)
        todo = deque(self.roots)
        for r in self.roots:
            seen[r] = True
        while todo:
            i = todo.popleft()
            for _, j in self.transitions[i]:
                if not seen[j]:
                    seen[j] = True
                    todo.append(j)
        return seen

    @property
    def root(self) -> int:
        return self.roots[0]

    def state_ids(self) -> list[int]:
        return [i for i, r in enumerate(self.reachable) if r]

    def id_of(self, t: Term) -> int:
        return self.index[t]

    def term(self, i: int) -> Term:
        return self.terms[i]

    def succ(self, i: int) -> tuple[tuple[str, int], ...]:
        return self.transitions[i]

    def ready(self, i: int) -> frozenset[str]:
        return frozenset(a for a, _ in self.transitions[i])

    def visible_ready(self, i: int) -> frozenset[str]:
        return frozenset(a for a, _ in self.transitions[i] if a != TAU)

    # -- shape metadata used by the predicate rules -------------------------

    def shapes(self):
        """Per-state structural view: kind tag plus operand/expansion ids."""
        if self._shape is None:
            shapes = []
            for t in self.terms:
                match t:
                    case Nil():
                        shapes.append(("nil",))
                    case Bottom():
                        shapes.append(("bottom",))
                    case Prefix(_, body):
                        shapes.append(("prefix", self.index[body]))
                    case ExtChoice(l, r):
                        shapes.append(("choice", self.index[l], self.index[r]))
                    case Disj(l, r):
                        shapes.append(("disj", self.index[l], self.index[r]))
                    case Conj(l, r):
                        shapes.append(("conj", self.index[l], self.index[r]))
                    case Parallel(_, l, r):
                        shapes.append(("par", self.index[l], self.index[r]))
                    case Rec(_, _):
                        shapes.append(("rec", self.index[unfold_rec(t)]))
                    case _:
                        raise TypeError(f"not a closed term: {t!r}")
            self._shape = shapes
        return self._shape

    # -- descendant relations ------------------------------------------------

    def stable_tau_descendants(self, i: int) -> frozenset[int]:
        """Stable states reachable via internal moves, self included when
        stable.  No consistency requirement."""
        cached = self._tau_stable.get(i)
        if cached is not None:
            return cached
        seen = {i}
        todo = deque([i])
        out = set()
        while todo:
            j = todo.popleft()
            if self.stable[j]:
                out.add(j)
            for a, k in self.transitions[j]:
                if a == TAU and k not in seen:
                    seen.add(k)
                    todo.append(k)
        result = frozenset(out)
        self._tau_stable[i] = result
        return result

    def consistent_stable_descendants(self):
        """For every state, the stable consistent states reachable via
        internal moves through consistent states only."""
        if self._csd is None:
            n = len(self.terms)
            order: list[int] = []
            low = [0] * n
            num = [-1] * n
            on_stack = [False] * n
            stack: list[int] = []
            comp = [-1] * n
            counter = [0]
            comps: list[list[int]] = []

            def strongconnect(v0: int) -> None:
                work = [(v0, 0)]
                while work:
                    v, pi = work.pop()
                    if pi == 0:
                        num[v] = low[v] = counter[0]
                        counter[0] += 1
                        stack.append(v)
                        on_stack[v] = True
                    recurse = False
                    succs = [
                        k
                        for a, k in self.transitions[v]
                        if a == TAU and not self.inconsistent[k]
                    ]
                    for idx in range(pi, len(succs)):
                        w = succs[idx]
                        if num[w] == -1:
                            work.append((v, idx + 1))
                            work.append((w, 0))
                            recurse = True
                            break
                        if on_stack[w]:
                            low[v] = min(low[v], num[w])
                    if recurse:
                        continue
                    if low[v] == num[v]:
                        members = []
                        while True:
                            w = stack.pop()
                            on_stack[w] = False
                            comp[w] = len(comps)
                            members.append(w)
                            if w == v:
                                break
                        comps.append(members)
                    if work:
                        parent = work[-1][0]
                        low[parent] = min(low[parent], low[v])

            for v in range(n):
                if num[v] == -1 and not self.inconsistent[v]:
                    strongconnect(v)

            comp_sets: list[frozenset[int]] = [frozenset()] * len(comps)
            # Tarjan emits components in reverse topological order: successors first.
            for ci, members in enumerate(comps):
                acc = {m for m in members if self.stable[m]}
                for m in members:
                    for a, k in self.transitions[m]:
                        if a == TAU and not self.inconsistent[k] and comp[k] != ci:
                            acc |= comp_sets[comp[k]]
                comp_sets[ci] = frozenset(acc)

            result: list[frozenset[int]] = [frozenset()] * n
            for v in range(n):
                if not self.inconsistent[v] and comp[v] != -1:
                    result[v] = comp_sets[comp[v]]
            self._csd = result
        return self._csd


def support_children(t: Term) -> tuple[Term, ...]:
    """Terms whose inconsistency status the predicate rules for ``t`` read."""
    if isinstance(t, Rec):
        return (unfold_rec(t),)
    return operands(t)


def build_combined(roots: list[Term], limits: BuildLimits | None = None) -> Lts:
    """Explore the given closed terms into one shared graph.

    The universe is closed under operand subterms, recursion expansion and
    one-step transitions, so the predicate rules can be evaluated on it.
    """
    limits = limits or BuildLimits()
    index: dict[Term, int] = {}
    terms: list[Term] = []
    transitions: list = []
    todo: deque[int] = deque()

    def add(t: Term) -> int:
        i = index.get(t)
        if i is not None:
            return i
        if len(terms) >= limits.max_states:
            raise StateBoundExceeded(len(terms) + 1)
        i = len(terms)
        index[t] = i
        terms.append(t)
        transitions.append(None)
        todo.append(i)
        return i

    root_ids = [add(t) for t in roots]
    step_memo: dict = {}
    try:
        while todo:
            i = todo.popleft()
            t = terms[i]
            for c in support_children(t):
                add(c)
            moves = step(t, limits.max_unfold_depth, _memo=step_memo)
            transitions[i] = tuple((a, add(s)) for a, s in moves)
    except RecursionError:
        # States deep enough to exhaust the interpreter stack only arise
        # while chasing an unbounded state space; report the resource bound.
        raise StateBoundExceeded(len(terms)) from None

    lts = Lts(terms, index, root_ids, transitions, limits)
    compute_inconsistent(lts)
    return lts


def build_lts(p: Term, limits: BuildLimits | None = None) -> Lts:
    """Build the transition graph rooted at ``p`` with inconsistency flags."""
    if free_vars(p):
        raise ValueError("only closed terms have a transition graph")
    return build_combined([p], limits)


def compute_inconsistent(lts: Lts, _reverse: bool = False) -> frozenset[int]:
    """Least fixpoint of the inconsistency rules over the universe.

    A state becomes inconsistent when: it is ``bot``; its single operand is
    (prefix) or either operand is (choice, parallel, conjunction); both
    operands are (disjunction); it is a stable conjunction whose conjuncts
    disagree on some visible action; it is a conjunction all of whose
    derivatives under one of its actions are inconsistent; it is a
    conjunction or recursion all of whose stable internal-move descendants
    are inconsistent (vacuously so when divergence leaves none); or it is a
    recursion whose expansion is inconsistent.
    """
    n = len(lts.terms)
    shapes = lts.shapes()
    F = [False] * n
    pending: deque[int] = deque()

    def fire(i: int) -> None:
        if not F[i]:
            F[i] = True
            pending.append(i)

    # reverse dependency maps
    single_parents: dict[int, list[int]] = {}
    disj_parents: dict[int, list[int]] = {}
    disj_waiting: dict[int, int] = {}
    deriv_parents: dict[int, list[tuple[int, str]]] = {}
    deriv_waiting: dict[tuple[int, str], int] = {}
    sd_parents: dict[int, list[int]] = {}
    sd_waiting: dict[int, int] = {}

    for i in range(n):
        shape = shapes[i]
        kind = shape[0]
        if kind == "bottom":
            fire(i)
        elif kind in ("prefix", "rec"):
            single_parents.setdefault(shape[1], []).append(i)
        elif kind in ("choice", "par", "conj"):
            single_parents.setdefault(shape[1], []).append(i)
            if shape[2] != shape[1]:
                single_parents.setdefault(shape[2], []).append(i)
        elif kind == "disj":
            l, r = shape[1], shape[2]
            disj_waiting[i] = 1 if l == r else 2
            disj_parents.setdefault(l, []).append(i)
            if r != l:
                disj_parents.setdefault(r, []).append(i)

        if kind == "conj":
            l, r = shape[1], shape[2]
            if lts.stable[i] and lts.visible_ready(l) != lts.visible_ready(r):
                fire(i)
            by_action: dict[str, set[int]] = {}
            for a, j in lts.transitions[i]:
                by_action.setdefault(a, set()).add(j)
            for a, targets in by_action.items():
                deriv_waiting[(i, a)] = len(targets)
                for j in targets:
                    deriv_parents.setdefault(j, []).append((i, a))
        if kind in ("conj", "rec"):
            sd = lts.stable_tau_descendants(i)
            if not sd:
                fire(i)
            else:
                sd_waiting[i] = len(sd)
                for j in sd:
                    sd_parents.setdefault(j, []).append(i)

    if _reverse:
        pending = deque(reversed(pending))

    while pending:
        j = pending.popleft()
        for i in single_parents.get(j, ()):
            fire(i)
        for i in disj_parents.get(j, ()):
            disj_waiting[i] -= 1
            if disj_waiting[i] == 0:
                fire(i)
        for i, a in deriv_parents.get(j, ()):
            deriv_waiting[(i, a)] -= 1
            if deriv_waiting[(i, a)] == 0:
                fire(i)
        for i in sd_parents.get(j, ()):
            sd_waiting[i] -= 1
            if sd_waiting[i] == 0:
                fire(i)

    lts.inconsistent = F
    lts._csd = None  # consistency changed; invalidate derived relation
    return frozenset(i for i in range(n) if F[i])


def stable_consistent_descendants(lts: Lts, s: int) -> frozenset[int]:
    """Stable consistent states reachable from ``s`` by internal moves that
    pass through consistent states only (``s`` itself included when stable)."""
    return lts.consistent_stable_descendants()[s]


def weak_visible_step(lts: Lts, s: int, a: str) -> frozenset[int]:
    """Stable consistent states reachable as one consistent ``a``-move
    followed by consistent internal moves."""
    if not is_visible(a):
        raise ValueError("weak steps are indexed by visible actions")
    if lts.inconsistent[s]:
        return frozenset()
    csd = lts.consistent_stable_descendants()
    out: set[int] = set()
    for b, r in lts.transitions[s]:
        if b == a and not lts.inconsistent[r]:
            out |= csd[r]
    return frozenset(out)


@dataclass
class ValidationReport:
    """Outcome of the structural model checks on a built graph."""

    tau_pure: bool
    lts1: bool
    lts2: bool
    forward_tau_f: bool
    counterexamples: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.tau_pure and self.lts1 and self.lts2 and self.forward_tau_f


def validate_llts(lts: Lts) -> ValidationReport:
    """Check every universe state for: internal/visible exclusivity; backward
    inconsistency propagation over fully inconsistent derivative sets; the
    existence of a consistent path to a stable consistent state; and forward
    inconsistency propagation along internal moves."""
    report = ValidationReport(True, True, True, True)
    csd = lts.consistent_stable_descendants()
    for i in range(len(lts.terms)):
        succ = lts.transitions[i]
        has_tau = any(a == TAU for a, _ in succ)
        has_vis = any(a != TAU for a, _ in succ)
        if has_tau and has_vis:
            report.tau_pure = False
            report.counterexamples.append((str(lts.terms[i]), "tau-purity"))
        if not lts.inconsistent[i]:
            by_action: dict[str, list[int]] = {}
            for a, j in succ:
                by_action.setdefault(a, []).append(j)
            for a, targets in by_action.items():
                if all(lts.inconsistent[j] for j in targets):
                    report.lts1 = False
                    report.counterexamples.append((str(lts.terms[i]), "lts1"))
                    break
            if not csd[i]:
                report.lts2 = False
                report.counterexamples.append((str(lts.terms[i]), "lts2"))
        else:
            for a, j in succ:
                if a == TAU and not lts.inconsistent[j]:
                    report.forward_tau_f = False
                    report.counterexamples.append((str(lts.terms[i]), "forward-tau"))
                    break
    return report


def consistency_law_violations(lts: Lts) -> list[tuple[str, str]]:
    """Check the compositional laws of the inconsistency predicate on every
    universe state; returns (state, law) pairs that fail."""
    out: list[tuple[str, str]] = []
    shapes = lts.shapes()
    F = lts.inconsistent
    for i in range(len(lts.terms)):
        shape = shapes[i]
        kind = shape[0]
        if kind == "disj":
            if F[i] != (F[shape[1]] and F[shape[2]]):
                out.append((str(lts.terms[i]), "disjunction-needs-both"))
        elif kind == "prefix":
            if F[i] != F[shape[1]]:
                out.append((str(lts.terms[i]), "prefix-transparent"))
        elif kind in ("choice", "par"):
            if F[i] != (F[shape[1]] or F[shape[2]]):
                out.append((str(lts.terms[i]), "composition-either-operand"))
        elif kind == "conj":
            if (F[shape[1]] or F[shape[2]]) and not F[i]:
                out.append((str(lts.terms[i]), "conjunction-either-operand"))
        elif kind == "rec":
            if F[i] != F[shape[1]]:
                out.append((str(lts.terms[i]), "recursion-matches-expansion"))
        sd = lts.stable_tau_descendants(i)
        if all(F[j] for j in sd) and not F[i]:
            out.append((str(lts.terms[i]), "doomed-descendants"))
    return out


# ---------------------------------------------------------------------------
# rule instances and the stratification diagnostic


@dataclass(frozen=True)
class RuleInstance:
    """A ground rule application: conclusion plus its premise literals.

    Literals are tuples: ``("t", src, action, dst)`` for transitions,
    ``("f", term)`` for inconsistency, ``("nt", term, action)`` for the
    negated transition side conditions.
    """

    rule: str
    conclusion: tuple
    positive: tuple = ()
    negative: tuple = ()


def used_rule_instances(lts: Lts) -> list[RuleInstance]:
    """The ground rule applications justifying every transition and every
    inconsistency flag of the built graph."""
    out: list[RuleInstance] = []
    for i, t in enumerate(lts.terms):
        out.extend(_transition_instances(lts, t))
        if lts.inconsistent[i]:
            out.extend(_inconsistency_instances(lts, i, t))
    return out


def _trans(lts: Lts, t: Term) -> list[tuple[str, Term]]:
    return [(a, lts.terms[j]) for a, j in lts.transitions[lts.index[t]]]


def _transition_instances(lts: Lts, t: Term) -> list[RuleInstance]:
    out: list[RuleInstance] = []
    match t:
        case Prefix(a, body):
            out.append(RuleInstance("prefix", ("t", t, a, body)))
        case Disj(l, r):
            out.append(RuleInstance("disj-left", ("t", t, TAU, l)))
            out.append(RuleInstance("disj-right", ("t", t, TAU, r)))
        case ExtChoice(l, r):
            lt, rt = _trans(lts, l), _trans(lts, r)
            l_stable = all(a != TAU for a, _ in lt)
            r_stable = all(a != TAU for a, _ in rt)
            for a, s in lt:
                if a == TAU:
                    out.append(
                        RuleInstance(
                            "choice-int-left",
                            ("t", t, TAU, ExtChoice(s, r)),
                            (("t", l, TAU, s),),
                        )
                    )
                elif r_stable:
                    out.append(
                        RuleInstance(
                            "choice-vis-left",
                            ("t", t, a, s),
                            (("t", l, a, s),),
                            (("nt", r, TAU),),
                        )
                    )
            for a, s in rt:
                if a == TAU:
                    out.append(
                        RuleInstance(
                            "choice-int-right",
                            ("t", t, TAU, ExtChoice(l, s)),
                            (("t", r, TAU, s),),
                        )
                    )
                elif l_stable:
                    out.append(
                        RuleInstance(
                            "choice-vis-right",
                            ("t", t, a, s),
                            (("t", r, a, s),),
                            (("nt", l, TAU),),
                        )
                    )
        case Conj(l, r):
            lt, rt = _trans(lts, l), _trans(lts, r)
            for a, s in lt:
                if a == TAU:
                    out.append(
                        RuleInstance(
                            "conj-int-left",
                            ("t", t, TAU, Conj(s, r)),
                            (("t", l, TAU, s),),
                        )
                    )
                else:
                    for b, s2 in rt:
                        if b == a:
                            out.append(
                                RuleInstance(
                                    "conj-sync",
                                    ("t", t, a, Conj(s, s2)),
                                    (("t", l, a, s), ("t", r, a, s2)),
                                )
                            )
            for a, s in rt:
                if a == TAU:
                    out.append(
                        RuleInstance(
                            "conj-int-right",
                            ("t", t, TAU, Conj(l, s)),
                            (("t", r, TAU, s),),
                        )
                    )
        case Parallel(sync, l, r):
            lt, rt = _trans(lts, l), _trans(lts, r)
            l_stable = all(a != TAU for a, _ in lt)
            r_stable = all(a != TAU for a, _ in rt)
            for a, s in lt:
                if a == TAU:
                    out.append(
                        RuleInstance(
                            "par-int-left",
                            ("t", t, TAU, Parallel(sync, s, r)),
                            (("t", l, TAU, s),),
                        )
                    )
                elif a in sync:
                    for b, s2 in rt:
                        if b == a:
                            out.append(
                                RuleInstance(
                                    "par-sync",
                                    ("t", t, a, Parallel(sync, s, s2)),
                                    (("t", l, a, s), ("t", r, a, s2)),
                                )
                            )
                elif r_stable:
                    out.append(
                        RuleInstance(
                            "par-vis-left",
                            ("t", t, a, Parallel(sync, s, r)),
                            (("t", l, a, s),),
                            (("nt", r, TAU),),
                        )
                    )
            for a, s in rt:
                if a == TAU:
                    out.append(
                        RuleInstance(
                            "par-int-right",
                            ("t", t, TAU, Parallel(sync, l, s)),
                            (("t", r, TAU, s),),
                        )
                    )
                elif a not in sync and l_stable:
                    out.append(
                        RuleInstance(
                            "par-vis-right",
                            ("t", t, a, Parallel(sync, l, s)),
                            (("t", r, a, s),),
                            (("nt", l, TAU),),
                        )
                    )
        case Rec(_, _):
            expansion = unfold_rec(t)
            for a, s in _trans(lts, t):
                out.append(
                    RuleInstance(
                        "rec-unfold", ("t", t, a, s), (("t", expansion, a, s),)
                    )
                )
        case _:
            pass
    return out


def _inconsistency_instances(lts: Lts, i: int, t: Term) -> list[RuleInstance]:
    out: list[RuleInstance] = []
    F = lts.inconsistent
    shapes = lts.shapes()
    shape = shapes[i]
    kind = shape[0]
    terms = lts.terms
    if kind == "bottom":
        out.append(RuleInstance("inconsistent-bottom", ("f", t)))
    elif kind == "prefix" and F[shape[1]]:
        out.append(
            RuleInstance("inconsistent-prefix", ("f", t), (("f", terms[shape[1]]),))
        )
    elif kind == "disj" and F[shape[1]] and F[shape[2]]:
        out.append(
            RuleInstance(
                "inconsistent-disj",
                ("f", t),
                (("f", terms[shape[1]]), ("f", terms[shape[2]])),
            )
        )
    if kind in ("choice", "par", "conj"):
        for side in (1, 2):
            if F[shape[side]]:
                out.append(
                    RuleInstance(
                        f"inconsistent-{kind}-operand",
                        ("f", t),
                        (("f", terms[shape[side]]),),
                    )
                )
    if kind == "conj":
        l, r = shape[1], shape[2]
        if lts.stable[i]:
            for a in sorted(lts.visible_ready(l) - lts.visible_ready(r)):
                witness = next(s for b, s in _trans(lts, terms[l]) if b == a)
                out.append(
                    RuleInstance(
                        "conj-ready-mismatch",
                        ("f", t),
                        (("t", terms[l], a, witness),),
                        (("nt", terms[r], a), ("nt", t, TAU)),
                    )
                )
            for a in sorted(lts.visible_ready(r) - lts.visible_ready(l)):
                witness = next(s for b, s in _trans(lts, terms[r]) if b == a)
                out.append(
                    RuleInstance(
                        "conj-ready-mismatch",
                        ("f", t),
                        (("t", terms[r], a, witness),),
                        (("nt", terms[l], a), ("nt", t, TAU)),
                    )
                )
        by_action: dict[str, list[int]] = {}
        for a, j in lts.transitions[i]:
            by_action.setdefault(a, []).append(j)
        for a, targets in sorted(by_action.items()):
            if all(F[j] for j in targets):
                positives = [("t", t, a, terms[targets[0]])]
                positives += [("f", terms[j]) for j in sorted(set(targets))]
                out.append(
                    RuleInstance("conj-doomed-derivatives", ("f", t), tuple(positives))
                )
    if kind in ("conj", "rec"):
        sd = lts.stable_tau_descendants(i)
        if all(F[j] for j in sd):
            out.append(
                RuleInstance(
                    f"{kind}-doomed-descendants",
                    ("f", t),
                    tuple(("f", terms[j]) for j in sorted(sd)),
                )
            )
    if kind == "rec" and F[shape[1]]:
        out.append(
            RuleInstance("inconsistent-rec", ("f", t), (("f", terms[shape[1]]),))
        )
    return out


def _literal_rank(lit: tuple):
    if lit[0] == "f":
        return rank_inconsistent()
    return rank_transition(lit[1])


def stratification_violations(
    lts: Lts, skip_rules: tuple[str, ...] = ()
) -> list[tuple[RuleInstance, tuple, str]]:
    """Rank-discipline violations over the used rule instances: positive
    premises must not rank above their conclusion, and the sources of negated
    transition premises must rank strictly below it."""
    out = []
    for inst in used_rule_instances(lts):
        if inst.rule in skip_rules:
            continue
        bound = _literal_rank(inst.conclusion)
        for prem in inst.positive:
            if not _literal_rank(prem) <= bound:
                out.append((inst, prem, "positive-premise-above-conclusion"))
        for prem in inst.negative:
            if not rank_transition(prem[1]) < bound:
                out.append((inst, prem, "negated-premise-not-below-conclusion"))
    return out


# ---------------------------------------------------------------------------
# exports


def lts_to_json(lts: Lts) -> str:
    """Reachable fragment as JSON; the internal action is labelled "tau"."""
    ids = lts.state_ids()
    remap = {old: new for new, old in enumerate(ids)}
    states = [
        {
            "id": remap[i],
            "term": str(lts.terms[i]),
            "stable": lts.stable[i],
            "inconsistent": lts.inconsistent[i],
        }
        for i in ids
    ]
    transitions = [
        {"src": remap[i], "label": a, "dst": remap[j]}
        for i in ids
        for a, j in lts.transitions[i]
    ]
    return json.dumps(
        {"root": remap[lts.root], "states": states, "transitions": transitions},
        indent=2,
    )


def lts_to_dot(lts: Lts) -> str:
    """Reachable fragment in DOT: inconsistent states are double-circled and
    internal moves dashed."""
    ids = lts.state_ids()
    remap = {old: new for new, old in enumerate(ids)}
    lines = ["digraph lts {", "  rankdir=LR;", "  node [shape=circle];"]
    for i in ids:
        shape = "doublecircle" if lts.inconsistent[i] else "circle"
        label = str(lts.terms[i]).replace("\\", "\\\\").replace('"', '\\"')
        lines.append(f'  s{remap[i]} [shape={shape}, label="{label}"];')
    lines.append(f"  init [shape=point]; init -> s{remap[lts.root]};")
    for i in ids:
        for a, j in lts.transitions[i]:
            style = ", style=dashed" if a == TAU else ""
            lines.append(f'  s{remap[i]} -> s{remap[j]} [label="{a}"{style}];')
    lines.append("}")
    return "\n".join(lines)
