import json

import pytest

from llts.properties import (
    GenConfig,
    _gen_term_trial,
    enumerate_stable_sim_pairs,
)
from llts.refinement import (
    REASON_READY,
    alt_refines,
    equivalent,
    largest_stable_sim,
    refines,
    stable_refines,
    verdict_to_json,
)
from llts.semantics import StateBoundExceeded, build_combined, weak_visible_step
from llts.syntax import parse

CFG = GenConfig(seed=37, max_depth=3)


def build(*texts):
    return build_combined([parse(s) for s in texts])


class TestLargestStableSim:
    def test_reflexive_pair_retained(self):
        lts = build("a.0", "a.0")
        rel = largest_stable_sim(lts).pairs
        i = lts.roots[0]
        assert (i, i) in rel

    def test_ready_set_mismatch_deleted(self):
        lts = build("a.0", "b.0")
        rel = largest_stable_sim(lts).pairs
        assert (lts.roots[0], lts.roots[1]) not in rel

    def test_inconsistent_left_retained_right_deleted(self):
        lts = build("bot", "0")
        rel = largest_stable_sim(lts).pairs
        bot, nil = lts.roots
        assert (bot, nil) in rel
        assert (nil, bot) not in rel

    @pytest.mark.parametrize("seed", range(25))
    def test_witness_is_simulation(self, seed):
        p = _gen_term_trial(CFG, 2 * seed)
        q = _gen_term_trial(CFG, 2 * seed + 1)
        try:
            lts = build_combined([p, q])
        except StateBoundExceeded:
            return
        rel = largest_stable_sim(lts).pairs
        for i, j in rel:
            assert lts.stable[i] and lts.stable[j]
            if lts.inconsistent[i]:
                continue
            assert not lts.inconsistent[j]
            assert lts.ready(i) == lts.ready(j)
            for a in sorted(lts.visible_ready(i)):
                for p2 in weak_visible_step(lts, i, a):
                    assert any(
                        (p2, q2) in rel for q2 in weak_visible_step(lts, j, a)
                    ), "weak move unmatched inside witness"


class TestRefines:
    def test_branch_into_disjunction(self):
        assert refines(parse("a.0"), parse("a.0 \\/ b.0")).holds

    def test_disjunction_not_refined_by_branch(self):
        verdict = refines(parse("a.0 \\/ b.0"), parse("a.0"))
        assert not verdict.holds
        assert verdict.counterexample.reason == REASON_READY

    def test_inconsistent_refines_everything(self):
        assert refines(parse("bot"), parse("<X | X = a.X>")).holds
        assert refines(parse("bot"), parse("0")).holds

    def test_nothing_consistent_refines_inconsistent(self):
        v = refines(parse("<X | X = a.X>"), parse("bot"))
        assert not v.holds
        v2 = refines(parse("0"), parse("bot"))
        assert not v2.holds

    def test_witness_present_iff_holds(self):
        held = refines(parse("a.0"), parse("a.0"))
        assert held.holds and held.witness is not None and held.counterexample is None
        refuted = refines(parse("a.0"), parse("b.0"))
        assert not refuted.holds and refuted.witness is None
        assert refuted.counterexample is not None

    def test_counterexample_path_starts_with_descendant(self):
        v = refines(parse("a.b.0"), parse("a.c.0"))
        assert not v.holds
        path = v.counterexample.path
        assert path[0][0] == "eps"

    def test_deep_counterexample(self):
        v = refines(parse("a.b.c.0"), parse("a.b.e.0"))
        assert not v.holds
        assert len(v.counterexample.path) >= 2


class TestEquivalence:
    def test_internal_prefix_invisible(self):
        assert equivalent(parse("tau.a.0"), parse("a.0"))

    def test_unfolding_equivalent(self):
        assert equivalent(parse("<X | X = a.X>"), parse("a.<X | X = a.X>"))

    def test_distinct_ready_sets_not_equivalent(self):
        assert not equivalent(parse("a.0"), parse("b.0"))

    def test_stable_variant(self):
        assert stable_refines(parse("a.0"), parse("a.0"))
        assert not stable_refines(parse("tau.a.0"), parse("a.0"))  # left unstable
        assert equivalent(parse("a.0"), parse("a.0"), stable=True)

    @pytest.mark.parametrize("seed", range(20))
    def test_reflexive_on_generated(self, seed):
        p = _gen_term_trial(CFG, seed)
        try:
            assert refines(p, p).holds
        except StateBoundExceeded:
            pass


class TestAlternative:
    def test_agrees_on_named_pairs(self):
        cases = [
            ("a.0", "a.0 \\/ b.0"),
            ("a.0 \\/ b.0", "a.0"),
            ("bot", "<X | X = a.X>"),
            ("<X | X = a.X>", "bot"),
            ("tau.a.0", "a.0"),
        ]
        for p_text, q_text in cases:
            p, q = parse(p_text), parse(q_text)
            assert refines(p, q).holds == alt_refines(p, q)

    @pytest.mark.parametrize("seed", range(40))
    def test_agrees_on_generated(self, seed):
        p = _gen_term_trial(CFG, 2 * seed)
        q = _gen_term_trial(CFG, 2 * seed + 1)
        try:
            assert refines(p, q).holds == alt_refines(p, q)
        except StateBoundExceeded:
            pass


class TestBruteForce:
    @pytest.mark.parametrize("seed", range(40))
    def test_enumeration_matches_iteration(self, seed):
        p = _gen_term_trial(CFG, 2 * seed, depth=2)
        q = _gen_term_trial(CFG, 2 * seed + 1, depth=2)
        try:
            lts = build_combined([p, q])
        except StateBoundExceeded:
            return
        if sum(lts.stable) > 4:
            return
        enumerated = enumerate_stable_sim_pairs(lts)
        if enumerated is None:
            return
        assert enumerated == largest_stable_sim(lts).pairs


class TestCounterexampleFuzz:
    @pytest.mark.parametrize("seed", range(60))
    def test_refuted_verdicts_carry_valid_traces(self, seed):
        p = _gen_term_trial(CFG, 2 * seed)
        q = _gen_term_trial(CFG, 2 * seed + 1)
        try:
            verdict = refines(p, q)
        except StateBoundExceeded:
            return
        if verdict.holds:
            assert verdict.witness is not None
            return
        cex = verdict.counterexample
        assert cex is not None
        assert cex.reason in (
            "ready-set-mismatch",
            "consistency-violation",
            "no-matching-move",
            "no-stable-descendant-match",
        )
        assert cex.path and cex.path[0][0] == "eps"
        assert all(isinstance(state, str) and state for _, state in cex.path)
        assert len(cex.path) < 10_000


class TestSerialization:
    def test_holds_schema(self):
        doc = json.loads(verdict_to_json(refines(parse("a.0"), parse("a.0"))))
        assert doc["holds"] is True
        assert "witness_pairs" in doc and doc["witness_pairs"]

    def test_refuted_schema(self):
        doc = json.loads(verdict_to_json(refines(parse("a.0"), parse("b.0"))))
        assert doc["holds"] is False
        assert doc["counterexample"]["reason"] == REASON_READY
        assert isinstance(doc["counterexample"]["path"], list)
