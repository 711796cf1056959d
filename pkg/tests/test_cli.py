import json

from llts.cli import expand_source, main


def run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


class TestCheck:
    def test_inconsistent(self, capsys):
        code, out, _ = run(capsys, "check", "<X | X = tau.X>")
        assert code == 1 and out.strip() == "inconsistent"

    def test_consistent(self, capsys):
        code, out, _ = run(capsys, "check", "a.0")
        assert code == 0 and out.strip() == "consistent"

    def test_bottom_handled(self, capsys):
        code, out, _ = run(capsys, "check", "bot [] a.0 /\\ tau.bot")
        assert code in (0, 1) and out


class TestRefine:
    def test_holds(self, capsys):
        code, out, _ = run(capsys, "refine", "a.0", "a.0 \\/ b.0")
        assert code == 0 and out.strip() == "holds"

    def test_refuted_with_counterexample(self, capsys):
        code, out, _ = run(capsys, "refine", "a.0 \\/ b.0", "a.0")
        assert code == 1
        assert "refuted" in out and "ready-set-mismatch" in out

    def test_json_format(self, capsys):
        code, out, _ = run(capsys, "refine", "a.0", "b.0", "--format", "json")
        doc = json.loads(out)
        assert code == 1 and doc["holds"] is False
        assert doc["counterexample"]["reason"]


class TestEquiv:
    def test_equivalent(self, capsys):
        code, out, _ = run(capsys, "equiv", "tau.a.0", "a.0")
        assert code == 0 and out.strip() == "equivalent"

    def test_not_equivalent(self, capsys):
        code, out, _ = run(capsys, "equiv", "a.0", "b.0")
        assert code == 1 and out.strip() == "not equivalent"


class TestLts:
    def test_json(self, capsys):
        code, out, _ = run(capsys, "lts", "a.0 \\/ b.0", "--format", "json")
        assert code == 0
        doc = json.loads(out)
        assert len(doc["states"]) == 4
        assert any(t["label"] == "tau" for t in doc["transitions"])

    def test_dot(self, capsys):
        code, out, _ = run(capsys, "lts", "tau.bot", "--format", "dot")
        assert code == 0 and "doublecircle" in out and "style=dashed" in out

    def test_text(self, capsys):
        code, out, _ = run(capsys, "lts", "a.0")
        assert code == 0 and "states: 2" in out

    def test_max_states_flag(self, capsys):
        code, _, err = run(
            capsys, "lts", "<X | X = a.(X |[]| X)>", "--max-states", "50"
        )
        assert code == 2 and "state bound" in err

    def test_env_override(self, capsys, monkeypatch):
        monkeypatch.setenv("LLTS_MAX_STATES", "50")
        code, _, err = run(capsys, "lts", "<X | X = a.(X |[]| X)>")
        assert code == 2 and "state bound" in err


class TestValidate:
    def test_ok(self, capsys):
        code, out, _ = run(capsys, "validate", "<X | X = a.X \\/ tau.X>")
        assert code == 0
        assert out.count("ok") == 4


class TestParse:
    def test_stdin(self, capsys, monkeypatch, tmp_path):
        src = tmp_path / "spec.llts"
        src.write_text(
            "# a vending machine fragment\n"
            "let COIN = coin.tea.0\n"
            "let LOOP = <X | X = coin.tea.X>\n"
            "COIN [] LOOP\n"
        )
        code, out, _ = run(capsys, "parse", str(src))
        assert code == 0
        assert out.strip() == "coin.tea.0 [] <X | X = coin.tea.X>"

    def test_parse_error_exit_2(self, capsys, tmp_path):
        src = tmp_path / "bad.llts"
        src.write_text("a.0 [] (")
        code, _, err = run(capsys, "parse", str(src))
        assert code == 2 and "error" in err

    def test_guardedness_error_exit_2(self, capsys, tmp_path):
        src = tmp_path / "unguarded.llts"
        src.write_text("<X | X = X [] a.0>")
        code, _, err = run(capsys, "parse", str(src))
        assert code == 2 and "unguarded" in err

    def test_expand_source_chained_lets(self):
        text = "let A = a.0\nlet B = A [] b.0\nB /\\ A\n"
        assert expand_source(text) == "((a.0) [] b.0) /\\ (a.0)"


class TestProps:
    def test_single_check_passes(self, capsys):
        code, out, _ = run(
            capsys, "props", "--seed", "1", "--trials", "5", "--only", "f-laws"
        )
        assert code == 0 and "f-laws" in out and "PASS" in out

    def test_baseline_file(self, capsys, tmp_path):
        baseline = tmp_path / "base.json"
        baseline.write_text('[["f-laws", 3, 4], ["preorder", 3, 5]]')
        code, out, _ = run(capsys, "props", "--baseline", str(baseline))
        assert code == 0
        assert "f-laws" in out and "preorder" in out

    def test_json_format(self, capsys):
        code, out, _ = run(
            capsys,
            "props",
            "--seed",
            "1",
            "--trials",
            "4",
            "--only",
            "coincidence",
            "--format",
            "json",
        )
        assert code == 0
        doc = json.loads(out)
        assert doc["theorem"] == "coincidence" and doc["passed"]


class TestOutputStability:
    def test_identical_invocations_identical_output(self, capsys):
        _, out1, _ = run(capsys, "lts", "a.0 \\/ tau.b.0", "--format", "json")
        _, out2, _ = run(capsys, "lts", "a.0 \\/ tau.b.0", "--format", "json")
        assert out1 == out2
        _, out3, _ = run(capsys, "refine", "a.b.0", "a.c.0", "--format", "json")
        _, out4, _ = run(capsys, "refine", "a.b.0", "a.c.0", "--format", "json")
        assert out3 == out4
