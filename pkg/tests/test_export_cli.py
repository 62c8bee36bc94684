import json
import subprocess
import sys

import pytest

from cna.cli import main
from cna.export import export_dot, export_structured, import_structured, to_json_bytes
from cna.process import Call, parse_program
from cna.semantics import Bounds, build_lts


@pytest.fixture()
def run(capsys):
    def invoke(*argv):
        code = main(list(argv))
        captured = capsys.readouterr()
        return code, captured.out, captured.err

    return invoke


class TestExport:
    def test_structured_fields(self, corpus_programs):
        prog = corpus_programs["rt.cna"]
        lts = build_lts(Call("R", ("a", "b")), prog.defs)
        doc = export_structured(lts)
        assert doc["version"] == "1"
        assert doc["complete"] is True
        assert doc["initial"] == 0
        assert doc["states"] == [{"id": 0, "term": "a\\b . R(a, b)"}]
        assert doc["transitions"] == [
            {
                "src": 0,
                "dst": 0,
                "blocks": [[{"s": "a", "t": "b"}]],
                "essential": "a\\b",
            }
        ]

    def test_empty_main(self):
        prog = parse_program("main := 0")
        doc = export_structured(build_lts(prog.main, prog.defs))
        assert len(doc["states"]) == 1
        assert doc["transitions"] == []

    def test_import_roundtrip(self, corpus_programs):
        prog = corpus_programs["composite_routing.cna"]
        lts = build_lts(prog.main, prog.defs, Bounds(max_states=100))
        doc = export_structured(lts)
        again = import_structured(json.loads(to_json_bytes(doc)))
        assert again.states == lts.states
        assert again.transitions == lts.transitions
        assert again.initial == lts.initial
        assert again.complete == lts.complete

    def test_dot_output(self, corpus_programs):
        prog = corpus_programs["rt.cna"]
        lts = build_lts(Call("T", ("a", "b")), prog.defs)
        dot = export_dot(lts)
        assert dot.startswith("digraph lts {")
        assert '0 -> 0 [label="a\\\\b"];' in dot


class TestCli:
    def test_parse_ok(self, run, corpus_dir):
        code, out, _ = run("parse", str(corpus_dir / "rt.cna"))
        assert code == 0
        assert "R(a, b) := a\\b . R(a, b)" in out

    def test_parse_error_exit_2(self, run, tmp_path):
        bad = tmp_path / "bad.cna"
        bad.write_text("main := (a\\b . 0")
        code, _, err = run("parse", str(bad))
        assert code == 2
        assert "error" in err

    def test_chain_reduce_golden(self, run):
        code, out, _ = run("chain", "reduce", r"a\tau ; tau\b ; b\c")
        assert code == 0
        assert out.strip() == "a\\b ; _\\_ ; b\\c"

    def test_chain_merge(self, run):
        code, out, _ = run("chain", "merge", r"tau\a ; _\_ ; _\_", r"_\_ ; a\b ; _\_")
        assert code == 0 and out.strip() == "tau\\a ; a\\b ; _\\_"

    def test_chain_merge_undefined_exit_1(self, run):
        code, out, _ = run("chain", "merge", r"tau\a", r"tau\b")
        assert code == 1 and out.strip() == "undefined"

    def test_chain_restrict(self, run):
        code, out, _ = run("chain", "restrict", "a", r"tau\a ; a\b ; _\_")
        assert code == 0 and out.strip() == "tau\\tau ; tau\\b ; _\\_"

    def test_chain_normalize_and_rename(self, run):
        code, out, _ = run("chain", "normalize", r"_\_ ; a\b ; b\c")
        assert code == 0 and out.strip() == "a\\b ; _\\_ ; b\\c"
        code, out, _ = run("chain", "rename", r"a\b ; b\c", "a<->b")
        assert code == 0 and out.strip() == "b\\a ; a\\c"

    def test_bisim_exit_codes(self, run, corpus_dir):
        code, out, _ = run("bisim", str(corpus_dir / "rt.cna"), "R", "T")
        assert code == 0 and out.strip() == "Bisimilar"
        code, out, _ = run(
            "bisim", str(corpus_dir / "rt.cna"), "R", "T", "--mode", "strong"
        )
        assert code == 1 and out.splitlines()[0] == "Distinguished"
        code, out, _ = run("bisim", str(corpus_dir / "ccs_counter.cna"), "P", "Q")
        assert code == 1
        assert "tau\\a ; _\\_ ; b\\tau" in out

    def test_lts_structured(self, run, corpus_dir):
        code, out, _ = run("lts", str(corpus_dir / "rt.cna"), "R")
        assert code == 0
        doc = json.loads(out)
        assert doc["version"] == "1" and len(doc["states"]) == 1

    def test_lts_dot(self, run, corpus_dir):
        code, out, _ = run("lts", str(corpus_dir / "rt.cna"), "R", "--format", "dot")
        assert code == 0 and out.startswith("digraph lts {")

    def test_lts_deterministic_across_processes(self, corpus_dir):
        # byte-identical output across two separate interpreter runs
        cmd = [
            sys.executable,
            "-m",
            "cna.cli",
            "lts",
            str(corpus_dir / "blind_routing.cna"),
        ]
        one = subprocess.run(cmd, capture_output=True, check=True).stdout
        two = subprocess.run(cmd, capture_output=True, check=True).stdout
        assert one == two and one

    def test_laws_small(self, run):
        code, out, _ = run("laws", "--seed", "5", "--samples", "2")
        assert code == 0
        assert "total failures: 0" in out

    def test_infra_verify(self, run, corpus_dir):
        code, out, _ = run("infra", "verify", str(corpus_dir / "composite.infra"))
        assert code == 0
        assert out.count("[   pass]") == 3

    def test_infra_paths_and_basic_equivalent(self, run, corpus_dir):
        code, out, _ = run("infra", "paths", str(corpus_dir / "composite.infra"))
        assert code == 0
        assert "req1 -> srv2  (length 3)" in out
        code, out, _ = run(
            "infra", "basic-equivalent", str(corpus_dir / "composite.infra")
        )
        assert code == 0 and "req1\\srv2" in out

    def test_step_scripted(self, corpus_dir):
        # drive the terminal stepper through one step and an undo
        cmd = [sys.executable, "-m", "cna.cli", "step", str(corpus_dir / "dynamic_1_1.cna")]
        out = subprocess.run(
            cmd, input="0\nu\nq\n", text=True, capture_output=True, check=True
        ).stdout
        assert "add_1_1\\tau" in out
        states = [l.split("state: ", 1)[1] for l in out.splitlines() if "state: " in l]
        assert len(states) == 3
        assert states[0] == states[2]  # undo returned to the start

    def test_usage_error_exit_2(self, run):
        code, _, _ = run("chain", "merge", r"a\b")
        assert code == 2

    def test_oracle_subcommand(self, run, corpus_dir):
        code, out, _ = run("oracle", str(corpus_dir / "three_party.cna"))
        assert code == 0
        assert "agreement: yes" in out

    def test_no_normalize_exposes_debris(self, run, corpus_dir):
        # Q leaves a dead zero and restriction behind on every cycle; with
        # the spine compaction disabled the state space keeps growing
        code, out, _ = run(
            "lts", str(corpus_dir / "rt.cna"), "Q", "--no-normalize", "--max-states", "8"
        )
        assert code == 3
        doc = json.loads(out)
        assert doc["complete"] is False and len(doc["states"]) == 8
