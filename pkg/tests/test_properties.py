import pytest

from llts.properties import (
    GenConfig,
    _gen_term_trial,
    check_brute_force,
    check_coincidence,
    check_conjunction_laws,
    check_f_laws,
    check_model_laws,
    check_operator_closure,
    check_precongruence,
    check_preorder,
    check_stratification,
    check_unfolding_equiv,
    check_unique_solution,
    check_unique_solutions,
    gen_context,
    gen_equation_body,
    gen_term,
    report_to_json,
    shrink_term,
)
from llts.semantics import StateBoundExceeded, build_lts
from llts.syntax import parse, print_term
from llts.terms import (
    Conj,
    Nil,
    Prefix,
    Var,
    degree,
    free_vars,
    is_guarded_spec,
    rec_specs,
    variable_status,
)

CFG = GenConfig(seed=3, max_depth=4)


class TestGenerator:
    def test_deterministic_in_seed(self):
        a = gen_term(GenConfig(seed=1, max_depth=3))
        b = gen_term(GenConfig(seed=1, max_depth=3))
        assert a == b

    def test_distinct_seeds_vary(self):
        terms = {gen_term(GenConfig(seed=s, max_depth=4)) for s in range(30)}
        assert len(terms) > 20

    @pytest.mark.parametrize("seed", range(120))
    def test_closed_guarded_round_trip(self, seed):
        t = gen_term(GenConfig(seed=seed, max_depth=4))
        assert not free_vars(t)
        for _, spec in rec_specs(t):
            assert is_guarded_spec(spec)
        assert parse(print_term(t)) == t

    def test_build_rate_within_default_limits(self):
        built = 0
        total = 300
        for seed in range(total):
            t = gen_term(GenConfig(seed=seed, max_depth=5))
            try:
                build_lts(t)
                built += 1
            except StateBoundExceeded:
                pass
        assert built / total >= 0.95

    def test_bulk_generator_soundness(self):
        # 1000 samples: closed, guarded, and printable-parseable
        cfg = GenConfig(seed=77, max_depth=4)
        for k in range(1000):
            t = _gen_term_trial(cfg, k)
            assert not free_vars(t)
            assert all(is_guarded_spec(spec) for _, spec in rec_specs(t))
            assert parse(print_term(t)) == t

    def test_context_contains_hole(self):
        for k in range(30):
            c = gen_context(CFG, k, "HOLE")
            assert "HOLE" in free_vars(c)

    def test_equation_body_placement(self):
        for k in range(30):
            body = gen_equation_body(CFG, k, "RX")
            st = variable_status(body, "RX")
            assert st.free and st.strongly_guarded
            assert not st.in_conjunction_scope


class TestShrink:
    def test_shrinks_to_minimal_conjunction(self):
        t = parse("c.c.(a.a.0 /\\ b.0) [] tau.0")

        def still_fails(s):
            try:
                lts = build_lts(s)
            except StateBoundExceeded:
                return False
            return lts.inconsistent[lts.root]

        # the original is not inconsistent; shrink a failing variant instead
        bad = parse("a.a.0 /\\ a.b.0")
        small = shrink_term(bad, still_fails)
        assert still_fails(small)
        assert degree(small) <= degree(bad)

    def test_preserves_failure(self):
        bad = Conj(Prefix("a", Nil()), Prefix("b", Nil()))

        def still_fails(s):
            try:
                lts = build_lts(s)
            except StateBoundExceeded:
                return False
            return lts.inconsistent[lts.root]

        small = shrink_term(bad, still_fails)
        lts = build_lts(small)
        assert lts.inconsistent[lts.root]


class TestChecks:
    def test_model_laws(self):
        report = check_model_laws(CFG, trials=60)
        assert report.passed, report.failures

    def test_f_laws(self):
        report = check_f_laws(CFG, trials=40)
        assert report.passed, report.failures

    def test_unfolding(self):
        report = check_unfolding_equiv(CFG, trials=40)
        assert report.passed, report.failures

    def test_coincidence(self):
        report = check_coincidence(CFG, trials=30)
        assert report.passed, report.failures

    def test_precongruence(self):
        report = check_precongruence(CFG, trials=25)
        assert report.passed, report.failures

    def test_prefix_context_instance(self):
        from llts.refinement import refines
        from llts.syntax import parse

        assert refines(parse("c.a.0"), parse("c.(a.0 \\/ b.0)")).holds

    def test_conjunction_context_absorbs_internal_prefix(self):
        from llts.refinement import equivalent
        from llts.syntax import parse

        # plugging p and tau.p into X /\ a.0 gives equivalent processes
        assert equivalent(parse("tau.a.0 /\\ a.0"), parse("a.0 /\\ a.0"))
        assert equivalent(parse("a.0 /\\ tau.a.0"), parse("a.0 /\\ a.0"))

    def test_operator_closure(self):
        report = check_operator_closure(CFG, trials=15)
        assert report.passed, report.failures

    def test_conjunction_laws(self):
        report = check_conjunction_laws(CFG, trials=25)
        assert report.passed, report.failures

    def test_preorder(self):
        report = check_preorder(CFG, trials=25)
        assert report.passed, report.failures

    def test_brute_force(self):
        report = check_brute_force(CFG, trials=20)
        assert report.passed, report.failures

    def test_stratification(self):
        report = check_stratification(CFG, trials=40)
        assert report.passed, report.failures

    def test_report_json(self):
        import json

        report = check_f_laws(CFG, trials=5)
        doc = json.loads(report_to_json(report))
        assert set(doc) >= {"theorem", "trials", "failures", "skipped", "passed"}

    def test_baseline_round_trip(self, tmp_path):
        import json

        from llts.properties import load_baseline, run_baseline

        path = tmp_path / "baseline.json"
        path.write_text(json.dumps([["f-laws", 9, 6], ["coincidence", 9, 4]]))
        entries = load_baseline(str(path))
        assert entries == [("f-laws", 9, 6), ("coincidence", 9, 4)]
        reports = run_baseline(entries)
        assert [r.theorem for r in reports] == ["f-laws", "coincidence"]
        assert all(r.passed and not r.skipped for r in reports)

    def test_baseline_rejects_unknown_theorem(self, tmp_path):
        import json

        from llts.properties import load_baseline

        path = tmp_path / "bad.json"
        path.write_text(json.dumps([["no-such-theorem", 1, 1]]))
        with pytest.raises(ValueError):
            load_baseline(str(path))


class TestUniqueSolution:
    def test_strong_guard_fixed_point(self):
        report = check_unique_solution(Prefix("a", Var("X")), "X")
        assert report.passed, report.failures
        assert not report.notes  # preconditions met

    def test_weak_guard_informational(self):
        report = check_unique_solution(Prefix("tau", Var("X")), "X")
        assert report.passed  # outcomes downgraded
        assert any("precondition unmet" in n for n in report.notes)

    def test_conjunction_scope_informational(self):
        body = Conj(Prefix("a", Var("X")), Prefix("a", Nil()))
        report = check_unique_solution(body, "X")
        assert any("conjunction-scope" in n for n in report.notes)

    def test_generated_bodies(self):
        report = check_unique_solutions(CFG, trials=15)
        assert report.passed, report.failures

    def test_weak_guard_admits_many_solutions(self):
        # every process solves the internally guarded equation, so solutions
        # need not coincide once the strong-guard hypothesis is dropped
        from llts.refinement import equivalent
        from llts.terms import TAU

        zero, act = Nil(), Prefix("a", Nil())
        assert equivalent(zero, Prefix(TAU, zero))
        assert equivalent(act, Prefix(TAU, act))
        assert not equivalent(zero, act)

    def test_inconsistent_solution_excluded(self):
        # bot and the a-loop both solve the strongly guarded equation, but
        # bot is inconsistent and therefore outside the uniqueness claim
        from llts.refinement import equivalent
        from llts.syntax import parse

        bot = parse("bot")
        loop = parse("<X | X = a.X>")
        assert equivalent(bot, parse("a.bot"))  # bot solves the equation
        assert not equivalent(bot, loop)
        report = check_unique_solution(
            Prefix("a", Var("X")), "X", candidates=[bot, parse("a.<X | X = a.X>")]
        )
        assert report.passed, report.failures
