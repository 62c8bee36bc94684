import random

import pytest

from cna.chains import reduce_chain
from cna.equivalence import NETWORK, check_bisim
from cna.process import Call, format_process, format_program, Program
from cna.routing import (
    Basic,
    Compose,
    InfraError,
    InterfaceMismatch,
    basic_equivalent,
    boundary_paths,
    build_dynamic_infra,
    infra_graph,
    infra_to_process,
    parse_infra,
    verify_paths,
)
from cna.semantics import Bounds, build_lts, canonical_state, symbolic_step


@pytest.fixture(scope="module")
def example(corpus_dir):
    infras = parse_infra((corpus_dir / "composite.infra").read_text())
    return infras


@pytest.fixture(scope="module")
def root(example):
    return example["R"]


class TestProcessConstruction:
    def test_basic_becomes_recursive_sum(self, example):
        proc, defs = infra_to_process(example["R1"])
        body = format_process(defs["R1"].body)
        assert body == (
            "req1\\s1 . R1(req1, req2, s1, s2) + req1\\s2 . R1(req1, req2, s1, s2)"
            " + req2\\s2 . R1(req1, req2, s1, s2)"
        )
        assert proc == Call("R1", ("req1", "req2", "s1", "s2"))

    def test_compose_restricts_shared(self, root):
        proc, _ = infra_to_process(root)
        text = format_process(proc)
        assert text.startswith("new n0, n1 in")
        assert "R3" in text

    def test_empty_links_degenerate_to_nil(self):
        box = Basic("E", ("a",), ("b",), frozenset())
        _, defs = infra_to_process(box)
        assert format_process(defs["E"].body) == "0"

    def test_interface_mismatch(self, example):
        with pytest.raises(InterfaceMismatch):
            Compose(example["R1"], example["R3"], ("s1", "s2"))


class TestGraph:
    def test_example_arcs(self, root):
        graph = infra_graph(root)
        assert graph.arcs == frozenset(
            {
                ("req1", "s1"),
                ("req1", "s2"),
                ("req2", "s2"),
                ("s1", "sp1"),
                ("s2", "sp2"),
                ("sp2", "srv2"),
            }
        )

    def test_example_paths(self, root):
        paths = boundary_paths(root)
        assert paths == [("req1", "srv2", 3), ("req2", "srv2", 3)]
        assert not any(dst == "srv1" for _, dst, _ in paths)

    def test_single_basic_paths_are_links(self, example):
        assert boundary_paths(example["R1"]) == [
            ("req1", "s1", 1),
            ("req1", "s2", 1),
            ("req2", "s2", 1),
        ]

    def test_compose_graph_is_union(self, example, root):
        g = infra_graph(root)
        union = (
            infra_graph(example["R1"]).arcs
            | infra_graph(example["R2"]).arcs
            | infra_graph(example["R3"]).arcs
        )
        assert g.arcs == union


class TestBasicEquivalent:
    def test_example_collapses_to_two_links(self, root):
        proc, defs = basic_equivalent(root)
        name = proc.name
        body = format_process(defs[name].body)
        assert body == (
            f"req1\\srv2 . {name}(req1, req2, srv1, srv2)"
            f" + req2\\srv2 . {name}(req1, req2, srv1, srv2)"
        )

    def test_no_paths_gives_nil(self):
        box = Basic("E", ("a",), ("b",), frozenset())
        proc, defs = basic_equivalent(box)
        assert format_process(defs[proc.name].body) == "0"

    def test_single_link(self):
        box = Basic("One", ("a",), ("b",), frozenset({(0, 0)}))
        proc, defs = basic_equivalent(box)
        assert format_process(defs[proc.name].body) == f"a\\b . {proc.name}(a, b)"

    def test_idempotent_up_to_bisimilarity(self, root):
        p1, d1 = basic_equivalent(root)
        # feed the collapsed box back in as an infrastructure
        lefts, rights = ("req1", "req2"), ("srv1", "srv2")
        box = Basic("again", lefts, rights, frozenset({(0, 1), (1, 1)}))
        p2, d2 = basic_equivalent(box)
        merged = {**d1, **d2}
        assert check_bisim(p1, p2, merged, NETWORK).bisimilar


class TestVerify:
    def test_example_passes_all_checks(self, root):
        report = verify_paths(root, Bounds(max_states=100))
        assert report.ok, report.render_text()

    def test_transition_sizes_match_path_length(self, root):
        proc, defs = infra_to_process(root)
        entry = canonical_state(proc, defs)
        trs = symbolic_step(entry, defs)
        assert {str(reduce_chain(t.label)) for t in trs} == {"req1\\srv2", "req2\\srv2"}
        assert {t.label.size for t in trs} == {3}

    def test_empty_infrastructure_trivially_passes(self):
        report = verify_paths(Basic("E", ("a",), ("b",), frozenset()))
        assert report.ok

    def test_random_composites(self):
        rng = random.Random(50)
        for trial in range(50):
            layers = rng.randint(1, 3)
            widths = [rng.randint(1, 3) for _ in range(layers + 1)]
            infra = None
            for layer in range(layers):
                n, m = widths[layer], widths[layer + 1]
                left = tuple(f"c{layer}_{i}" for i in range(n))
                right = tuple(f"c{layer + 1}_{i}" for i in range(m))
                possible = [(i, j) for i in range(n) for j in range(m)]
                count = rng.randint(0, len(possible))
                links = frozenset(rng.sample(possible, count))
                box = Basic(f"L{layer}", left, right, links)
                infra = box if infra is None else Compose(infra, box, left)
            report = verify_paths(infra, Bounds(max_states=200))
            assert report.ok, (trial, report.render_text())


class TestDynamic:
    def test_initial_offers_one_add_per_slot(self):
        for n, m in [(1, 1), (2, 2), (1, 3)]:
            proc, defs = build_dynamic_infra(n, m)
            entry = canonical_state(proc, defs)
            trs = symbolic_step(entry, defs)
            adds = {str(reduce_chain(t.label)) for t in trs}
            assert adds == {
                f"add_{i}_{j}\\tau" for i in range(1, n + 1) for j in range(1, m + 1)
            }
            assert len(trs) == n * m

    def test_add_enables_then_rem_disables(self):
        proc, defs = build_dynamic_infra(1, 1)
        lts = build_lts(proc, defs, Bounds(max_states=50))

        def outgoing(state):
            return {str(reduce_chain(t.label)): t.dst for t in lts.transitions if t.src == state}

        start = outgoing(lts.initial)
        assert "a1\\b1" not in start
        after_add = outgoing(start["add_1_1\\tau"])
        assert "a1\\b1" in after_add
        after_rem = outgoing(after_add["rem_1_1\\tau"])
        assert "a1\\b1" not in after_rem

    def test_links_accumulate(self):
        proc, defs = build_dynamic_infra(1, 1)
        lts = build_lts(proc, defs, Bounds(max_states=80))

        def outgoing(state):
            return {str(reduce_chain(t.label)): t.dst for t in lts.transitions if t.src == state}

        s1 = outgoing(lts.initial)["add_1_1\\tau"]
        s2 = outgoing(s1)["add_1_1\\tau"]
        s3 = outgoing(s2)["rem_1_1\\tau"]
        assert "a1\\b1" in outgoing(s3)


class TestInfraFiles:
    def test_parse_example(self, example):
        assert set(example) == {"R1", "R2", "R3", "Q", "R"}
        assert isinstance(example["R"], Compose)

    def test_reject_unknown_reference(self):
        with pytest.raises(InfraError):
            parse_infra("compose X = A * B over (c)")

    def test_reject_bad_link(self):
        with pytest.raises(InfraError):
            parse_infra("basic B left(a) right(b) { a->z }")

    def test_roundtrip_to_program_text(self, root):
        proc, defs = infra_to_process(root)
        text = format_program(Program(defs, proc))
        from cna.process import parse_program

        again = parse_program(text)
        assert format_program(again) == text
