"""Random term generation and desk-scale machine checks of the calculus laws.

Each check runs a number of independent, seed-derived trials and returns a
``TheoremReport``.  Failures carry the offending terms (greedily shrunk);
trials whose graphs exceed the configured bounds are skipped, not failed.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field, replace
from itertools import product

from .refinement import alt_refines, equivalent, largest_stable_sim, refines
from .semantics import (
    BuildLimits,
    Lts,
    StateBoundExceeded,
    build_combined,
    build_lts,
    consistency_law_violations,
    stratification_violations,
    validate_llts,
    weak_visible_step,
)
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
    RecSpec,
    Term,
    Var,
    free_vars,
    is_multi_unfolding,
    normalize,
    operands,
    substitute,
    unfold_one,
    variable_status,
)


@dataclass(frozen=True)
class GenConfig:
    seed: int = 0
    max_depth: int = 4
    alphabet: tuple[str, ...] = ("a", "b", "c")
    rec_probability: float = 0.2
    conj_probability: float = 0.2
    force_guarded: bool = True

    def __post_init__(self):
        if not self.alphabet:
            raise ValueError("alphabet must be nonempty")


@dataclass
class TheoremReport:
    theorem: str
    trials: int = 0
    failures: list = field(default_factory=list)  # (inputs, observed, expected)
    skipped: list = field(default_factory=list)  # (trial, reason)
    notes: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.failures

    def fail(self, inputs, observed, expected) -> None:
        self.failures.append((tuple(str(t) for t in inputs), observed, expected))

    def skip(self, trial: int, reason: str) -> None:
        self.skipped.append((trial, reason))

    def summary(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return (
            f"{self.theorem}: trials={self.trials} failures={len(self.failures)} "
            f"skipped={len(self.skipped)} [{status}]"
        )


def report_to_json(report: TheoremReport) -> str:
    return json.dumps(
        {
            "theorem": report.theorem,
            "trials": report.trials,
            "failures": [
                {"inputs": list(i), "observed": str(o), "expected": str(e)}
                for i, o, e in report.failures
            ],
            "skipped": [{"trial": t, "reason": r} for t, r in report.skipped],
            "notes": [str(n) for n in report.notes],
            "passed": report.passed,
        },
        indent=2,
    )


# ---------------------------------------------------------------------------
# generation


@dataclass(frozen=True)
class _Path:
    guarded: bool = False  # passed any prefix or a disjunction operand
    strong: bool = False  # passed a visible prefix
    in_conj: bool = False  # inside a conjunction operand


def _trial_rng(config: GenConfig, trial: int) -> random.Random:
    return random.Random(config.seed * 1_000_003 + trial)


class _Gen:
    """Recursive generator; ``scope`` maps in-scope variables to a placement
    requirement: "guarded" for recursion variables, "anywhere" for context
    holes, "strong-no-conj" for unique-solution equation bodies."""

    def __init__(self, rng: random.Random, config: GenConfig):
        self.rng = rng
        self.config = config
        self.counter = 0

    def fresh_var(self) -> str:
        self.counter += 1
        return f"R{self.counter}"

    def usable(self, scope: dict[str, str], path: _Path) -> list[str]:
        out = []
        for var, req in scope.items():
            if req == "anywhere":
                out.append(var)
            elif req == "guarded" and (path.guarded or not self.config.force_guarded):
                out.append(var)
            elif req == "strong-no-conj" and path.strong and not path.in_conj:
                out.append(var)
        return out

    def leaf(self, scope: dict[str, str], path: _Path) -> Term:
        usable = self.usable(scope, path)
        r = self.rng.random()
        if usable and r < 0.5:
            return Var(self.rng.choice(usable))
        if r < 0.85:
            return Nil()
        return Bottom()

    def action(self) -> str:
        if self.rng.random() < 0.2:
            return TAU
        return self.rng.choice(self.config.alphabet)

    def term(
        self, depth: int, scope: dict[str, str], path: _Path, in_rec: bool = False
    ) -> Term:
        if depth <= 0:
            return self.leaf(scope, path)
        cfg = self.config
        # recursion bodies avoid the state-multiplying operators: a recursive
        # call kept inside a parallel or conjunction context grows without
        # bound, which only produces bound-exceeded skips
        weights = [
            ("prefix", 0.30),
            ("choice", 0.14),
            ("disj", 0.14),
            ("conj", cfg.conj_probability * (0.4 if in_rec else 1.0)),
            ("par", 0.015 if in_rec else 0.08),
            ("rec", cfg.rec_probability * (0.4 if in_rec else 1.0)),
            ("leaf", 0.14),
        ]
        total = sum(w for _, w in weights)
        pick = self.rng.random() * total
        acc = 0.0
        kind = weights[-1][0]
        for name, w in weights:
            acc += w
            if pick < acc:
                kind = name
                break
        if kind == "leaf":
            return self.leaf(scope, path)
        if kind == "prefix":
            a = self.action()
            guarded = replace(path, guarded=True, strong=path.strong or a != TAU)
            return Prefix(a, self.term(depth - 1, scope, guarded, in_rec))
        if kind == "choice":
            return ExtChoice(
                self.term(depth - 1, scope, path, in_rec),
                self.term(depth - 1, scope, path, in_rec),
            )
        if kind == "disj":
            weak = replace(path, guarded=True)
            return Disj(
                self.term(depth - 1, scope, weak, in_rec),
                self.term(depth - 1, scope, weak, in_rec),
            )
        if kind == "conj":
            inner = replace(path, in_conj=True)
            return Conj(
                self.term(depth - 1, scope, inner, in_rec),
                self.term(depth - 1, scope, inner, in_rec),
            )
        if kind == "par":
            sync = frozenset(
                a for a in cfg.alphabet if self.rng.random() < 0.4
            )
            return Parallel(
                sync,
                self.term(depth - 1, scope, path, in_rec),
                self.term(depth - 1, scope, path, in_rec),
            )
        # recursion: bound variables start unguarded and may only be placed
        # after the path passes a guard, so the specification is guarded by
        # construction
        nvars = 2 if self.rng.random() < 0.15 else 1
        names = [self.fresh_var() for _ in range(nvars)]
        inner_scope = dict(scope)
        for name in names:
            inner_scope[name] = "guarded"
        body_depth = min(depth - 1, 3)
        fresh_path = _Path(in_conj=path.in_conj)
        equations = {
            name: self.term(body_depth, inner_scope, fresh_path, True)
            for name in names
        }
        return Rec(names[0], RecSpec(equations))


_PROBE_LIMITS = BuildLimits(max_states=800, max_unfold_depth=200)


def _probed(gen: _Gen, depth: int) -> Term:
    """Emit the first candidate whose graph fits a small probe bound;
    unbounded state spaces are resampled deterministically."""
    fallback = Prefix(gen.config.alphabet[0], Nil())
    for _ in range(20):
        candidate = normalize(gen.term(depth, {}, _Path()))
        try:
            build_lts(candidate, _PROBE_LIMITS)
        except StateBoundExceeded:
            continue
        return candidate
    return fallback


def gen_term(config: GenConfig) -> Term:
    """Deterministic-in-seed closed guarded term that builds within the
    default limits."""
    return _probed(_Gen(random.Random(config.seed), config), config.max_depth)


def _gen_term_trial(config: GenConfig, trial: int, depth: int | None = None) -> Term:
    gen = _Gen(_trial_rng(config, trial), config)
    return _probed(gen, depth or config.max_depth)


def gen_context(config: GenConfig, trial: int, hole: str = "HOLE") -> Term:
    """A term with the designated free variable as its hole (at least once)."""
    gen = _Gen(_trial_rng(config, trial), config)
    t = gen.term(config.max_depth, {hole: "anywhere"}, _Path())
    if hole not in free_vars(t):
        t = ExtChoice(t, Prefix(gen.rng.choice(config.alphabet), Var(hole)))
    return normalize(t)


def gen_equation_body(
    config: GenConfig, trial: int, var: str, conj_scope: bool = False
) -> Term:
    """A body for a single-variable equation; occurrences of ``var`` sit under
    a visible prefix and (unless ``conj_scope``) outside every conjunction.
    The resulting recursion is probed to build within a small bound."""
    gen = _Gen(_trial_rng(config, trial), config)
    req = "guarded" if conj_scope else "strong-no-conj"
    fallback = Prefix(gen.config.alphabet[0], Var(var))
    for _ in range(20):
        body = gen.term(config.max_depth, {var: req}, _Path(), in_rec=True)
        if var not in free_vars(body):
            graft = Prefix(gen.rng.choice(config.alphabet), Var(var))
            body = Conj(body, graft) if conj_scope else ExtChoice(body, graft)
        try:
            build_lts(normalize(Rec(var, RecSpec({var: body}))), _PROBE_LIMITS)
        except StateBoundExceeded:
            continue
        return body
    return fallback


# ---------------------------------------------------------------------------
# shrinking


def _replace_positions(t: Term) -> list[Term]:
    """Candidates with one subterm replaced by deadlock, plus equation drops."""
    out: list[Term] = []

    def rebuild(t: Term, path: tuple[int, ...], target: tuple[int, ...], repl: Term):
        if path == target:
            return repl
        match t:
            case Prefix(a, body):
                return Prefix(a, rebuild(body, path + (0,), target, repl))
            case ExtChoice(l, r):
                return ExtChoice(
                    rebuild(l, path + (0,), target, repl),
                    rebuild(r, path + (1,), target, repl),
                )
            case Conj(l, r):
                return Conj(
                    rebuild(l, path + (0,), target, repl),
                    rebuild(r, path + (1,), target, repl),
                )
            case Disj(l, r):
                return Disj(
                    rebuild(l, path + (0,), target, repl),
                    rebuild(r, path + (1,), target, repl),
                )
            case Parallel(sync, l, r):
                return Parallel(
                    sync,
                    rebuild(l, path + (0,), target, repl),
                    rebuild(r, path + (1,), target, repl),
                )
            case Rec(x, spec):
                eqs = {
                    n: rebuild(b, path + (2 + k,), target, repl)
                    for k, (n, b) in enumerate(spec.equations)
                }
                return Rec(x, RecSpec(eqs))
            case _:
                return t

    positions: list[tuple[int, ...]] = []

    def collect(t: Term, path: tuple[int, ...]):
        if not isinstance(t, Nil):
            positions.append(path)
        match t:
            case Prefix(_, body):
                collect(body, path + (0,))
            case ExtChoice(l, r) | Conj(l, r) | Disj(l, r):
                collect(l, path + (0,))
                collect(r, path + (1,))
            case Parallel(_, l, r):
                collect(l, path + (0,))
                collect(r, path + (1,))
            case Rec(_, spec):
                for k, (_, b) in enumerate(spec.equations):
                    collect(b, path + (2 + k,))
            case _:
                pass

    collect(t, ())
    for pos in positions:
        out.append(rebuild(t, (), pos, Nil()))

    def drop_equations(t: Term) -> None:
        match t:
            case Rec(x, spec) if len(spec) > 1:
                for name, _ in spec.equations:
                    if name == x:
                        continue
                    remaining = {n: b for n, b in spec.equations if n != name}
                    if all(name not in free_vars(b) for b in remaining.values()):
                        out.append(Rec(x, RecSpec(remaining)))
            case _:
                pass
        for c in operands(t):
            drop_equations(c)
        if isinstance(t, Rec):
            for _, b in t.spec.equations:
                drop_equations(b)

    drop_equations(t)
    return out


def shrink_term(t: Term, still_fails) -> Term:
    """Greedy minimisation: keep any deadlock-replacement or equation drop
    that preserves the failure."""
    changed = True
    while changed:
        changed = False
        for candidate in _replace_positions(t):
            if candidate == t:
                continue
            try:
                if still_fails(candidate):
                    t = candidate
                    changed = True
                    break
            except Exception:
                continue
    return t


# ---------------------------------------------------------------------------
# brute-force oracles


def inconsistent_fixpoint_naive(lts: Lts) -> frozenset[int]:
    """Independent evaluation of the inconsistency rules: saturate from the
    empty set, rescanning every state each round."""
    n = len(lts.terms)
    shapes = lts.shapes()
    F: set[int] = set()

    def fires(i: int) -> bool:
        shape = shapes[i]
        kind = shape[0]
        if kind == "bottom":
            return True
        if kind == "prefix":
            return shape[1] in F
        if kind == "disj":
            return shape[1] in F and shape[2] in F
        if kind in ("choice", "par"):
            return shape[1] in F or shape[2] in F
        if kind == "conj":
            if shape[1] in F or shape[2] in F:
                return True
            if lts.stable[i] and lts.visible_ready(shape[1]) != lts.visible_ready(
                shape[2]
            ):
                return True
            by_action: dict[str, list[int]] = {}
            for a, j in lts.transitions[i]:
                by_action.setdefault(a, []).append(j)
            if any(all(j in F for j in js) for js in by_action.values()):
                return True
            return all(j in F for j in lts.stable_tau_descendants(i))
        if kind == "rec":
            if shape[1] in F:
                return True
            return all(j in F for j in lts.stable_tau_descendants(i))
        return False

    changed = True
    while changed:
        changed = False
        for i in range(n):
            if i not in F and fires(i):
                F.add(i)
                changed = True
    return frozenset(F)


def enumerate_stable_sim_pairs(lts: Lts, max_subsets: int = 4096):
    """Union of all stable ready simulations, found by exhaustive enumeration
    of candidate relations.  Returns None when the search space exceeds
    ``max_subsets``."""
    stable_ids = [i for i in range(len(lts.terms)) if lts.stable[i]]
    F = lts.inconsistent

    def weak(i):
        out = {}
        for a in sorted(lts.visible_ready(i)):
            targets = weak_visible_step(lts, i, a)
            if targets:
                out[a] = targets
        return out

    weak_map = {i: weak(i) for i in stable_ids}
    base = []
    for p, q in product(stable_ids, stable_ids):
        if F[p]:
            base.append((p, q))
        elif not F[q] and lts.ready(p) == lts.ready(q):
            base.append((p, q))

    def obligations(p):
        if F[p]:
            return []
        return [(a, p2) for a, ts in weak_map[p].items() for p2 in sorted(ts)]

    always = [pair for pair in base if not obligations(pair[0])]
    active = [pair for pair in base if obligations(pair[0])]
    if 2 ** len(active) > max_subsets:
        return None

    always_set = frozenset(always)
    union: set[tuple[int, int]] = set(always)

    def is_simulation(rel: frozenset[tuple[int, int]]) -> bool:
        for p, q in rel:
            if F[p]:
                continue
            for a, ts in weak_map[p].items():
                q_targets = weak_map[q].get(a, frozenset())
                for p2 in ts:
                    if not any((p2, q2) in rel for q2 in q_targets):
                        return False
        return True

    for mask in range(2 ** len(active)):
        chosen = frozenset(
            active[k] for k in range(len(active)) if mask & (1 << k)
        )
        if chosen <= union:
            continue
        if is_simulation(always_set | chosen):
            union |= chosen
    return frozenset(union)


# ---------------------------------------------------------------------------
# theorem checks


def check_model_laws(config: GenConfig, trials: int = 200) -> TheoremReport:
    """Every generated term builds a graph that is internally-pure, satisfies
    both closure conditions of the inconsistency predicate, propagates
    inconsistency forward over internal moves, and obeys the compositional
    inconsistency laws."""
    report = TheoremReport("model-laws")
    for k in range(trials):
        report.trials += 1
        t = _gen_term_trial(config, k)
        try:
            lts = build_lts(t)
        except StateBoundExceeded:
            report.skip(k, "state-bound")
            continue
        v = validate_llts(lts)
        if not v.ok:
            report.fail([t], v.counterexamples[:3], "all model validators hold")
            continue
        bad = consistency_law_violations(lts)
        if bad:

            def still_fails(s: Term) -> bool:
                try:
                    l2 = build_lts(s)
                except Exception:
                    return False
                return bool(consistency_law_violations(l2)) or not validate_llts(l2).ok

            small = shrink_term(t, still_fails)
            report.fail([small], bad[:3], "compositional inconsistency laws hold")
    return report


def check_f_laws(config: GenConfig, trials: int = 200) -> TheoremReport:
    """Compositional inconsistency laws on explicitly constructed pairs."""
    report = TheoremReport("f-laws")
    for k in range(trials):
        report.trials += 1
        p = _gen_term_trial(config, 2 * k, depth=max(2, config.max_depth - 1))
        q = _gen_term_trial(config, 2 * k + 1, depth=max(2, config.max_depth - 1))
        rng = _trial_rng(config, trials + k)
        a = rng.choice(config.alphabet)
        composites = [
            (Disj(p, q), "both", lambda fp, fq: fp and fq),
            (ExtChoice(p, q), "either", lambda fp, fq: fp or fq),
            (Parallel(frozenset(), p, q), "either", lambda fp, fq: fp or fq),
            (Prefix(a, p), "left", lambda fp, fq: fp),
            (Prefix(TAU, p), "left", lambda fp, fq: fp),
        ]
        try:
            for composite, _, expect in composites:
                lts = build_combined([composite, p, q])
                fp = lts.inconsistent[lts.index[p]]
                fq = lts.inconsistent[lts.index[q]]
                fc = lts.inconsistent[lts.roots[0]]
                if fc != expect(fp, fq):
                    report.fail([composite], fc, expect(fp, fq))
            # a conjunction with an inconsistent operand is inconsistent
            lts = build_combined([Conj(p, q), p, q])
            if (
                lts.inconsistent[lts.index[p]] or lts.inconsistent[lts.index[q]]
            ) and not lts.inconsistent[lts.roots[0]]:
                report.fail([Conj(p, q)], False, True)
            # a recursion and its expansion agree
            var = "RF"
            body = gen_equation_body(config, 3 * trials + k, var)
            rec = normalize(Rec(var, RecSpec({var: body})))
            lts = build_lts(rec)
            shapes = lts.shapes()
            i = lts.roots[0]
            if lts.inconsistent[i] != lts.inconsistent[shapes[i][1]]:
                report.fail([rec], lts.inconsistent[i], lts.inconsistent[shapes[i][1]])
        except StateBoundExceeded:
            report.skip(k, "state-bound")
    return report


def check_unfolding_equiv(config: GenConfig, trials: int = 150) -> TheoremReport:
    """Expanding one recursion step preserves equivalence, and expansion
    commutes with single transitions in both directions."""
    from .semantics import step

    report = TheoremReport("unfolding")
    for k in range(trials):
        report.trials += 1
        t = _gen_term_trial(config, k)
        expansions = unfold_one(t)
        if not expansions:
            continue
        try:
            for s in expansions:
                if not equivalent(t, s):
                    report.fail([t, s], "inequivalent", "expansion preserves equivalence")
                    continue
                t_moves = step(t)
                s_moves = step(s)
                for a, t2 in t_moves:
                    if not any(
                        b == a and is_multi_unfolding(t2, s2) for b, s2 in s_moves
                    ):
                        report.fail([t, s], f"unmatched {a} move", "forward matching")
                        break
                for a, s2 in s_moves:
                    if not any(
                        b == a and is_multi_unfolding(t2, s2) for b, t2 in t_moves
                    ):
                        report.fail([t, s], f"unmatched {a} move", "backward matching")
                        break
        except StateBoundExceeded:
            report.skip(k, "state-bound")
    return report


def check_coincidence(config: GenConfig, trials: int = 100) -> TheoremReport:
    """The two formulations of the refinement preorder agree."""
    report = TheoremReport("coincidence")
    for k in range(trials):
        report.trials += 1
        p = _gen_term_trial(config, 2 * k)
        q = _gen_term_trial(config, 2 * k + 1)
        try:
            direct = refines(p, q).holds
            alternative = alt_refines(p, q)
        except StateBoundExceeded:
            report.skip(k, "state-bound")
            continue
        if direct != alternative:
            report.fail([p, q], f"direct={direct}", f"alternative={alternative}")
    return report


def _true_pairs(config: GenConfig, trial: int) -> list[tuple[Term, Term]]:
    """Candidate refinement-law pairs; callers verify each with ``refines``."""
    p = _gen_term_trial(config, 3 * trial, depth=max(2, config.max_depth - 1))
    r = _gen_term_trial(config, 3 * trial + 1, depth=max(2, config.max_depth - 1))
    rng = _trial_rng(config, 3 * trial + 2)
    pairs = [
        (p, p),
        (p, Disj(p, r)),
        (Prefix(TAU, p), p),
        (p, Prefix(TAU, p)),
    ]
    expansions = unfold_one(p)
    if expansions:
        pairs.append((p, expansions[0]))
    rng.shuffle(pairs)
    return pairs


def check_precongruence(config: GenConfig, trials: int = 100) -> TheoremReport:
    """Verified refinement pairs stay related inside every generated context."""
    report = TheoremReport("precongruence")
    hole = "HOLE"
    for k in range(trials):
        report.trials += 1
        try:
            pair = None
            for p, q in _true_pairs(config, k):
                if refines(p, q).holds:
                    pair = (p, q)
                    break
            if pair is None:
                report.fail(
                    [t for pq in _true_pairs(config, k) for t in pq][:2],
                    "no seed law verified",
                    "algebraic seed laws hold",
                )
                continue
        except StateBoundExceeded:
            report.skip(k, "state-bound")
            continue
        p, q = pair
        verdict = None
        for attempt in range(5):
            context = gen_context(config, 7_000_000 + 5 * k + attempt, hole)
            cp = substitute(context, {hole: p})
            cq = substitute(context, {hole: q})
            try:
                verdict = refines(cp, cq)
                break
            except StateBoundExceeded:
                continue  # resample a tamer context for this trial
        if verdict is None:
            report.skip(k, "state-bound")
        elif not verdict.holds:
            report.fail(
                [context, p, q],
                verdict.counterexample.reason,
                "context preserves refinement",
            )
    return report


def check_operator_closure(config: GenConfig, trials: int = 60) -> TheoremReport:
    """Refinement is preserved operator-wise by choice, parallel, disjunction
    and conjunction."""
    report = TheoremReport("operator-closure")
    for k in range(trials):
        report.trials += 1
        try:
            verified = [
                (p, q) for p, q in _true_pairs(config, k) if refines(p, q).holds
            ]
            if len(verified) < 2:
                report.skip(k, "no verified pairs")
                continue
            (p, q), (s, r) = verified[0], verified[1]
            rng = _trial_rng(config, 9_000_000 + k)
            sync = frozenset(a for a in config.alphabet if rng.random() < 0.4)
            combos = [
                (ExtChoice(p, s), ExtChoice(q, r), "choice"),
                (Parallel(sync, p, s), Parallel(sync, q, r), "parallel"),
                (Disj(p, s), Disj(q, r), "disjunction"),
                (Conj(p, s), Conj(q, r), "conjunction"),
            ]
            for lhs, rhs, name in combos:
                if not refines(lhs, rhs).holds:
                    report.fail([lhs, rhs], f"{name} not preserved", "closure holds")
        except StateBoundExceeded:
            report.skip(k, "state-bound")
    return report


def check_conjunction_laws(config: GenConfig, trials: int = 80) -> TheoremReport:
    """A stable consistent process simulated by two others is simulated by
    their conjunction, which is itself consistent."""
    report = TheoremReport("conjunction")
    applied = 0
    for k in range(trials):
        report.trials += 1
        p = _gen_term_trial(config, 3 * k, depth=max(2, config.max_depth - 1))
        q = Disj(p, _gen_term_trial(config, 3 * k + 1, depth=2))
        candidates = [(p, p, q), (p, q, q), (p, p, p)]
        try:
            for base, left, right in candidates:
                conj = Conj(left, right)
                lts = build_combined([base, left, right, conj])
                ib = lts.index[base]
                il, ir, ic = lts.index[left], lts.index[right], lts.index[conj]
                if not lts.stable[ib] or lts.inconsistent[ib]:
                    continue
                rel = largest_stable_sim(lts).pairs
                if (ib, il) in rel and (ib, ir) in rel:
                    applied += 1
                    if lts.inconsistent[ic]:
                        report.fail([base, conj], "conjunction inconsistent", "consistent")
                    if not lts.stable[ic] or (ib, ic) not in rel:
                        report.fail([base, conj], "not simulated", "conjunction simulates")
        except StateBoundExceeded:
            report.skip(k, "state-bound")
    report.notes.append(f"non-vacuous instances: {applied}")
    return report


def check_unique_solution(
    t_body: Term,
    x: str,
    config: GenConfig | None = None,
    candidates: list[Term] | None = None,
) -> TheoremReport:
    """For an equation body with the variable strongly guarded outside all
    conjunctions: the recursion is a fixed point, every consistent solution
    coincides with it, and consistent solutions exist exactly when the
    recursion itself is consistent.

    Unmet placement preconditions downgrade the outcomes to notes.
    """
    report = TheoremReport("unique-solution")
    report.trials = 1
    status = variable_status(t_body, x)
    preconditions: list[str] = []
    if not status.strongly_guarded:
        preconditions.append("variable-not-strongly-guarded")
    if status.in_conjunction_scope:
        preconditions.append("variable-in-conjunction-scope")
    informational = bool(preconditions)
    for p in preconditions:
        report.notes.append(f"precondition unmet: {p}")

    def record(inputs, observed, expected):
        if informational:
            report.notes.append(
                f"informational: {[str(i) for i in inputs]} observed={observed} expected={expected}"
            )
        else:
            report.fail(inputs, observed, expected)

    rec = normalize(Rec(x, RecSpec({x: t_body})))
    try:
        fixed_point = equivalent(rec, substitute(t_body, {x: rec}))
        if not fixed_point:
            record([rec], "not a fixed point", "recursion solves its equation")
        lts = build_lts(rec)
        rec_consistent = not lts.inconsistent[lts.roots[0]]
        pool = list(candidates or [])
        expansions = unfold_one(rec)
        pool.extend(expansions[:1])
        for s in expansions[:1]:
            pool.extend(unfold_one(s)[:1])
        pool.append(Prefix(TAU, rec))
        solutions = 0
        for cand in pool:
            try:
                cl = build_lts(cand)
            except StateBoundExceeded:
                report.skip(0, "state-bound")
                continue
            if cl.inconsistent[cl.roots[0]]:
                continue  # inconsistent candidates are outside the hypothesis
            if not equivalent(cand, substitute(t_body, {x: cand})):
                continue  # not a solution of the equation
            solutions += 1
            if not equivalent(cand, rec):
                record([cand, rec], "distinct solutions", "solutions coincide")
        if solutions and not rec_consistent:
            record(
                [rec],
                "consistent solution exists but recursion inconsistent",
                "existence matches recursion consistency",
            )
        if rec_consistent and not fixed_point:
            record([rec], "no solution found", "recursion itself solves the equation")
    except StateBoundExceeded:
        report.skip(0, "state-bound")
    return report


def check_unique_solutions(config: GenConfig, trials: int = 40) -> TheoremReport:
    """Driver over generated equation bodies, plus informational trials with
    the variable inside a conjunction."""
    report = TheoremReport("unique-solution")
    var = "RX"
    for k in range(trials):
        report.trials += 1
        body = gen_equation_body(config, k, var)
        sub = check_unique_solution(body, var, config)
        report.failures.extend(sub.failures)
        report.skipped.extend((k, reason) for _, reason in sub.skipped)
    for k in range(max(1, trials // 8)):
        body = gen_equation_body(config, 50_000 + k, var, conj_scope=True)
        sub = check_unique_solution(body, var, config)
        report.notes.extend(sub.notes)
    return report


def check_preorder(config: GenConfig, trials: int = 80) -> TheoremReport:
    """Reflexivity and transitivity of the refinement preorder."""
    report = TheoremReport("preorder")
    transitive_hits = 0
    for k in range(trials):
        report.trials += 1
        p = _gen_term_trial(config, 4 * k, depth=max(2, config.max_depth - 1))
        try:
            if not refines(p, p).holds:
                report.fail([p], "irreflexive", "refines(p, p)")
                continue
            extra = _gen_term_trial(config, 4 * k + 1, depth=2)
            extra2 = _gen_term_trial(config, 4 * k + 2, depth=2)
            rng = _trial_rng(config, 4 * k + 3)
            chains = [
                (p, Disj(p, extra), Disj(Disj(p, extra), extra2)),
                (p, Prefix(TAU, p), Disj(Prefix(TAU, p), extra)),
                (p, extra, extra2),
            ]
            q, r, s = chains[rng.randrange(len(chains))]
            pq = refines(q, r).holds
            qr = refines(r, s).holds
            if pq and qr:
                transitive_hits += 1
                if not refines(q, s).holds:
                    report.fail([q, r, s], "not transitive", "transitivity")
        except StateBoundExceeded:
            report.skip(k, "state-bound")
    report.notes.append(f"non-vacuous transitivity instances: {transitive_hits}")
    return report


def check_brute_force(config: GenConfig, trials: int = 60) -> TheoremReport:
    """The iterative simulation equals exhaustive relation enumeration on
    small graphs, and the worklist inconsistency fixpoint equals naive
    saturation on small universes."""
    report = TheoremReport("brute-force")
    small = replace(config, max_depth=min(config.max_depth, 3))
    sims = 0
    kleenes = 0
    k = 0
    budget = trials * 40
    while (sims < trials or kleenes < trials) and k < budget:
        k += 1
        p = _gen_term_trial(small, 2 * k, depth=3)
        q = _gen_term_trial(small, 2 * k + 1, depth=3)
        try:
            lts = build_combined([p, q])
        except StateBoundExceeded:
            continue
        if kleenes < trials and len(lts.terms) <= 30:
            kleenes += 1
            report.trials += 1
            naive = inconsistent_fixpoint_naive(lts)
            worklist = frozenset(
                i for i, f in enumerate(lts.inconsistent) if f
            )
            if naive != worklist:
                report.fail([p, q], sorted(naive), sorted(worklist))
        n_stable = sum(lts.stable)
        if sims < trials and n_stable <= 4:
            enumerated = enumerate_stable_sim_pairs(lts)
            if enumerated is None:
                continue
            sims += 1
            report.trials += 1
            iterative = largest_stable_sim(lts).pairs
            if enumerated != iterative:
                report.fail([p, q], sorted(enumerated), sorted(iterative))
    if sims < trials or kleenes < trials:
        report.skip(k, f"instances found: sims={sims} kleene={kleenes}")
    return report


def check_stratification(config: GenConfig, trials: int = 100) -> TheoremReport:
    """The rank discipline holds on the rule instances of generated graphs.

    The recursion-expansion rule is checked for its negated premises only:
    its positive premise can rank above the conclusion whenever an equation
    body contains further unguarded recursions, so the published pair rank is
    not a true stratification there (see the decisions ledger).
    """
    report = TheoremReport("stratification")
    for k in range(trials):
        report.trials += 1
        t = _gen_term_trial(config, k)
        try:
            lts = build_lts(t)
        except StateBoundExceeded:
            report.skip(k, "state-bound")
            continue
        bad = stratification_violations(lts, skip_rules=("rec-unfold",))
        if bad:
            inst, prem, kind = bad[0]
            report.fail([t], f"{inst.rule}: {kind}", "rank discipline holds")
    return report


ALL_CHECKS = {
    "model-laws": check_model_laws,
    "f-laws": check_f_laws,
    "unfolding": check_unfolding_equiv,
    "coincidence": check_coincidence,
    "precongruence": check_precongruence,
    "operator-closure": check_operator_closure,
    "conjunction": check_conjunction_laws,
    "unique-solution": check_unique_solutions,
    "preorder": check_preorder,
    "brute-force": check_brute_force,
    "stratification": check_stratification,
}


def run_checks(
    seed: int = 0, trials: int | None = None, only: str | None = None
) -> list[TheoremReport]:
    """Run the theorem suite with seed-derived trials; ``only`` selects one."""
    config = GenConfig(seed=seed)
    reports = []
    for name, fn in ALL_CHECKS.items():
        if only is not None and name != only:
            continue
        reports.append(fn(config, trials) if trials else fn(config))
    return reports


def load_baseline(path: str) -> list[tuple[str, int, int]]:
    """Read a pinned-seed baseline: a JSON list of [theorem, seed, trials]."""
    with open(path, "r", encoding="utf-8") as handle:
        doc = json.load(handle)
    entries = []
    for row in doc:
        theorem, seed, trials = row
        if theorem not in ALL_CHECKS:
            raise ValueError(f"unknown theorem id {theorem!r}")
        entries.append((str(theorem), int(seed), int(trials)))
    return entries


def run_baseline(entries: list[tuple[str, int, int]]) -> list[TheoremReport]:
    """Run each pinned (theorem, seed, trials) entry; the regression baseline
    passes when every report has zero failures and zero skips."""
    return [
        ALL_CHECKS[theorem](GenConfig(seed=seed), trials)
        for theorem, seed, trials in entries
    ]
