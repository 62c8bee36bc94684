"""Acceptance suite: one test per criterion, each printing a PASS/FAIL
line (run with ``pytest tests/test_acceptance.py -s`` to see them) and
enforcing its runtime budget."""

import random
import subprocess
import sys
import time
from contextlib import contextmanager
from pathlib import Path

import pytest
from helpers import stretch_steps, raw

from cna.chains import (
    merge_concrete,
    normalize,
    parse_chain,
    reduce_chain,
    restrict_concrete,
)
from cna.equivalence import NETWORK, STRONG, ProcessSampler, check_bisim, law_harness
from cna.process import Call, format_process, parse_program, struct_normalize
from cna.routing import (
    Basic,
    Compose,
    build_dynamic_infra,
    infra_to_process,
    verify_paths,
)
from cna.semantics import Bounds, build_lts, concrete_step_oracle, symbolic_step

CORPUS = Path(__file__).resolve().parent.parent / "corpus"


@contextmanager
def criterion(name: str, seconds: float):
    start = time.monotonic()
    try:
        yield
    except BaseException:
        print(f"ACCEPTANCE [{name}] FAIL")
        raise
    elapsed = time.monotonic() - start
    if elapsed >= seconds:
        print(f"ACCEPTANCE [{name}] FAIL (took {elapsed:.2f}s, budget {seconds}s)")
        raise AssertionError(f"{name}: {elapsed:.2f}s exceeded {seconds}s budget")
    print(f"ACCEPTANCE [{name}] PASS ({elapsed:.2f}s < {seconds}s)")


def test_chain_algebra_goldens():
    with criterion("chain goldens", 1.0):
        s1 = parse_chain(r"tau\a ; _\_ ; _\_")
        s2 = parse_chain(r"_\_ ; a\b ; _\_")
        s3 = parse_chain(r"_\_ ; _\_ ; b\tau")
        assert str(merge_concrete(merge_concrete(s1, s2), s3)) == "tau\\a ; a\\b ; b\\tau"
        hidden = restrict_concrete("a", parse_chain(r"tau\a ; a\b ; _\_"))
        assert str(hidden) == "tau\\tau ; tau\\b ; _\\_"
        essential = reduce_chain(parse_chain(r"a\tau ; tau\b ; b\c"))
        assert str(essential) == "a\\b ; _\\_ ; b\\c"


def _corpus_processes(count: int = 200, seed: int = 42):
    sampler = ProcessSampler(random.Random(seed))
    return [sampler.process() for _ in range(count)]


def test_oracle_equivalence():
    max_len = 7
    with criterion("oracle equivalence (200 processes)", 60.0):
        for p in _corpus_processes():
            symbolic = {
                (t.label, format_process(t.target))
                for t in symbolic_step(p, {})
                if t.label.min_concrete_length() <= max_len
            }
            concrete = {
                (normalize(chain), format_process(struct_normalize(target)))
                for chain, target in concrete_step_oracle(p, {}, max_len)
            }
            assert symbolic == concrete, format_process(p)


def test_accordion_closure():
    max_len = 7
    with criterion("stretching closure of the oracle", 60.0):
        for p in _corpus_processes():
            groups: dict[str, set] = {}
            for chain, target in concrete_step_oracle(p, {}, max_len):
                groups.setdefault(format_process(target), set()).add(raw(chain))
            # one-step closure of every member implies closure of the set
            for group in groups.values():
                for member in group:
                    for variant in stretch_steps(member):
                        if len(variant) <= max_len:
                            assert variant in group, format_process(p)


def test_bisimilarity_verdicts():
    prog = parse_program((CORPUS / "rt.cna").read_text())
    counter = parse_program((CORPUS / "ccs_counter.cna").read_text())
    with criterion("bisimilarity verdicts", 5.0):
        r, t = Call("R", ("a", "b")), Call("T", ("a", "b"))
        assert check_bisim(r, t, prog.defs, NETWORK).bisimilar
        assert check_bisim(r, t, prog.defs, STRONG).distinguished
        p, q = Call("P", ("a", "b")), Call("Q", ("a", "b"))
        assert check_bisim(p, q, prog.defs, NETWORK).bisimilar
        verdict = check_bisim(
            Call("P", ("a", "b")), Call("Q", ("a", "b")), counter.defs, NETWORK
        )
        assert verdict.distinguished
        assert any(m.label == "tau\\a ; _\\_ ; b\\tau" for m in verdict.witness)


def _composite_example():
    r1 = Basic(
        "R1", ("req1", "req2"), ("s1", "s2"), frozenset({(0, 0), (0, 1), (1, 1)})
    )
    r2 = Basic("R2", ("s1", "s2"), ("sp1", "sp2"), frozenset({(0, 0), (1, 1)}))
    r3 = Basic("R3", ("sp1", "sp2"), ("srv1", "srv2"), frozenset({(1, 1)}))
    return Compose(Compose(r1, r2, ("s1", "s2")), r3, ("sp1", "sp2"))


def test_routing_composite_example():
    with criterion("composite routing", 5.0):
        infra = _composite_example()
        proc, defs = infra_to_process(infra)
        lts = build_lts(proc, defs, Bounds(max_states=50))
        assert lts.complete and len(lts.states) == 1
        essentials = {str(reduce_chain(t.label)) for t in lts.transitions}
        assert essentials == {"req1\\srv2", "req2\\srv2"}
        assert len(lts.transitions) == 2
        assert all(t.label.size == 3 for t in lts.transitions)
        report = verify_paths(infra, Bounds(max_states=100))
        assert report.ok, report.render_text()


def test_law_harness():
    with criterion("law harness (seed 42, 100 samples)", 300.0):
        report = law_harness({}, seed=42, samples=100)
        assert report.failures == 0, report.render_text()
        assert report.unknowns <= 0.05 * report.samples, report.render_text()


def test_dynamic_routing_replay():
    with criterion("dynamic routing add/rem replay", 5.0):
        proc, defs = build_dynamic_infra(1, 1)
        lts = build_lts(proc, defs, Bounds(max_states=60))

        def outgoing(state):
            return {
                str(reduce_chain(t.label)): t.dst
                for t in lts.transitions
                if t.src == state
            }

        initial = outgoing(lts.initial)
        assert "a1\\b1" not in initial
        added = outgoing(initial["add_1_1\\tau"])
        assert "a1\\b1" in added
        removed = outgoing(added["rem_1_1\\tau"])
        assert "a1\\b1" not in removed


@pytest.mark.parametrize("name", sorted(p.name for p in CORPUS.glob("*.cna")))
def test_lts_export_determinism(name):
    with criterion(f"deterministic lts export ({name})", 60.0):
        cmd = [
            sys.executable,
            "-m",
            "cna.cli",
            "lts",
            str(CORPUS / name),
            "--format",
            "structured",
            "--max-states",
            "500",
        ]
        first = subprocess.run(cmd, capture_output=True).stdout
        second = subprocess.run(cmd, capture_output=True).stdout
        assert first and first == second
