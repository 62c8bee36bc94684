"""Operational semantics: a symbolic step function with one transition
per stretching class of labels, a literal rule-by-rule concrete step
function used as a cross-validation oracle, and bounded reachability
closure into a finite transition system.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

from .chains import (
    LinkChain,
    NormalLabel,
    merge_concrete,
    merge_symbolic,
    normalize,
    reduce_chain,
    rename_chain,
    restrict_concrete,
    restrict_symbolic,
    stretch_variants,
)
from .process import (
    Call,
    Definitions,
    Nil,
    Par,
    Prefix,
    Process,
    Rename,
    Restrict,
    Sum,
    UndefinedConstant,
    format_process,
    struct_normalize,
    subst_parallel,
)

DEFAULT_MAX_STATES = 10000
DEFAULT_MAX_UNFOLD = 64
DEFAULT_ORACLE_LEN = 7


class UnguardedRecursion(RuntimeError):
    """Definition unfolding did not reach a guard within the allowance."""


@dataclass(frozen=True)
class SymbolicTransition:
    label: NormalLabel
    target: Process

    def sort_key(self) -> tuple[str, str]:
        return (str(self.label), format_process(self.target))


@dataclass(frozen=True)
class Bounds:
    max_states: int = DEFAULT_MAX_STATES
    max_unfold: int = DEFAULT_MAX_UNFOLD


def unfold_call(p: Call, defs: Definitions) -> Process:
    if p.name not in defs:
        raise UndefinedConstant(f"undefined constant {p.name}")
    d = defs[p.name]
    if len(d.params) != len(p.args):
        raise UndefinedConstant(
            f"{p.name} expects {len(d.params)} argument(s), got {len(p.args)}"
        )
    return subst_parallel(d.body, dict(zip(d.params, p.args)))


def canonical_state(
    p: Process,
    defs: Definitions,
    max_unfold: int = DEFAULT_MAX_UNFOLD,
    normalize_spine: bool = True,
) -> Process:
    """Normalize the spine and unfold top-level constants.

    A bare constant has exactly the transitions of its body, so the body
    is the state representative; this keeps recursive models that step
    back into a constant finite.  ``normalize_spine=False`` skips the
    spine compaction (diagnostics only; many recursive models stop being
    finite-state without it).
    """
    if normalize_spine:
        p = struct_normalize(p)
    unfolds = 0
    while isinstance(p, Call):
        if unfolds >= max_unfold:
            raise UnguardedRecursion(f"constant {p.name} never reaches a guard")
        p = unfold_call(p, defs)
        if normalize_spine:
            p = struct_normalize(p)
        unfolds += 1
    return p


def _step(p: Process, defs: Definitions, budget: int) -> set[tuple[NormalLabel, Process]]:
    if isinstance(p, Nil):
        return set()
    if isinstance(p, Prefix):
        return {(normalize(p.label.to_chain()), p.cont)}
    if isinstance(p, Sum):
        return _step(p.left, defs, budget) | _step(p.right, defs, budget)
    if isinstance(p, Par):
        lefts = _step(p.left, defs, budget)
        rights = _step(p.right, defs, budget)
        out: set[tuple[NormalLabel, Process]] = set()
        for lab, target in lefts:
            out.add((lab, Par(target, p.right)))
        for lab, target in rights:
            out.add((lab, Par(p.left, target)))
        for llab, ltarget in lefts:
            for rlab, rtarget in rights:
                for lab in merge_symbolic(llab, rlab):
                    out.add((lab, Par(ltarget, rtarget)))
        return out
    if isinstance(p, Restrict):
        out = set()
        for lab, target in _step(p.body, defs, budget):
            hidden = restrict_symbolic(p.chan, lab)
            if hidden is not None:
                out.add((hidden, Restrict(p.chan, target)))
        return out
    if isinstance(p, Rename):
        return {
            (rename_chain(lab, p.phi), Rename(target, p.phi))
            for lab, target in _step(p.body, defs, budget)
        }
    if isinstance(p, Call):
        if budget <= 0:
            raise UnguardedRecursion(f"constant {p.name} never reaches a guard")
        return _step(unfold_call(p, defs), defs, budget - 1)
    raise TypeError(f"not a process: {p!r}")


def symbolic_step(
    p: Process,
    defs: Definitions,
    max_unfold: int = DEFAULT_MAX_UNFOLD,
    normalize_targets: bool = True,
) -> frozenset[SymbolicTransition]:
    """All transitions of ``p``, one per stretching class of labels."""
    raw = _step(p, defs, max_unfold)
    if normalize_targets:
        return frozenset(SymbolicTransition(lab, struct_normalize(t)) for lab, t in raw)
    return frozenset(SymbolicTransition(lab, t) for lab, t in raw)


def sorted_transitions(
    p: Process,
    defs: Definitions,
    max_unfold: int = DEFAULT_MAX_UNFOLD,
    normalize_targets: bool = True,
) -> list[SymbolicTransition]:
    return sorted(
        symbolic_step(p, defs, max_unfold, normalize_targets),
        key=SymbolicTransition.sort_key,
    )


def _oracle(
    p: Process, defs: Definitions, max_len: int, budget: int
) -> set[tuple[LinkChain, Process]]:
    if isinstance(p, Nil):
        return set()
    if isinstance(p, Prefix):
        return {(c, p.cont) for c in stretch_variants(p.label.to_chain(), max_len)}
    if isinstance(p, Sum):
        return _oracle(p.left, defs, max_len, budget) | _oracle(p.right, defs, max_len, budget)
    if isinstance(p, Par):
        lefts = _oracle(p.left, defs, max_len, budget)
        rights = _oracle(p.right, defs, max_len, budget)
        out: set[tuple[LinkChain, Process]] = set()
        for chain, target in lefts:
            out.add((chain, Par(target, p.right)))
        for chain, target in rights:
            out.add((chain, Par(p.left, target)))
        by_len: dict[int, list[tuple[LinkChain, Process]]] = {}
        for item in rights:
            by_len.setdefault(len(item[0]), []).append(item)
        for lchain, ltarget in lefts:
            for rchain, rtarget in by_len.get(len(lchain), ()):
                merged = merge_concrete(lchain, rchain)
                if merged is not None:
                    out.add((merged, Par(ltarget, rtarget)))
        return out
    if isinstance(p, Restrict):
        out = set()
        for chain, target in _oracle(p.body, defs, max_len, budget):
            hidden = restrict_concrete(p.chan, chain)
            if hidden is not None:
                out.add((hidden, Restrict(p.chan, target)))
        return out
    if isinstance(p, Rename):
        return {
            (rename_chain(chain, p.phi), Rename(target, p.phi))
            for chain, target in _oracle(p.body, defs, max_len, budget)
        }
    if isinstance(p, Call):
        if budget <= 0:
            raise UnguardedRecursion(f"constant {p.name} never reaches a guard")
        return _oracle(unfold_call(p, defs), defs, max_len, budget - 1)
    raise TypeError(f"not a process: {p!r}")


def concrete_step_oracle(
    p: Process,
    defs: Definitions,
    max_len: int = DEFAULT_ORACLE_LEN,
    max_unfold: int = DEFAULT_MAX_UNFOLD,
) -> set[tuple[LinkChain, Process]]:
    """Exhaustive concrete transitions with labels of length <= max_len.

    The action rule enumerates every stretching of the prefix label, so
    the result is closed under stretching within the length bound.  Meant
    for testing the symbolic step, not for exploration.
    """
    if max_len < 1:
        raise ValueError("max_len must be positive")
    return _oracle(p, defs, max_len, max_unfold)


@dataclass(frozen=True)
class LtsTransition:
    src: int
    label: NormalLabel
    dst: int

    @property
    def essential(self) -> str:
        return str(reduce_chain(self.label))


@dataclass
class SymbolicLts:
    """Bounded reachable fragment of the symbolic transition system.

    States are canonical process strings; ``expanded[i]`` records whether
    state ``i`` had all successors explored.  ``complete`` is true only
    when every reachable state was fully expanded within bounds.
    """

    states: tuple[str, ...]
    processes: tuple[Process, ...]
    transitions: tuple[LtsTransition, ...]
    initial: int = 0
    complete: bool = True
    expanded: tuple[bool, ...] = ()
    bounds: Bounds = field(default_factory=Bounds)

    def successors(self, state: int) -> list[LtsTransition]:
        return [t for t in self.transitions if t.src == state]


def build_lts(
    p: Process,
    defs: Definitions,
    bounds: Bounds = Bounds(),
    normalize_states: bool = True,
) -> SymbolicLts:
    """Breadth-first closure of the symbolic step from ``p``.

    Deterministic: successor transitions are sorted by label then target,
    and states are numbered in discovery order.  Exhausting ``max_states``
    is reported via ``complete=False``, never an error.
    """
    if bounds.max_states < 1 or bounds.max_unfold < 1:
        raise ValueError("bounds must be positive")
    start = canonical_state(p, defs, bounds.max_unfold, normalize_states)
    start_str = format_process(start)
    index: dict[str, int] = {start_str: 0}
    states: list[str] = [start_str]
    processes: list[Process] = [start]
    expanded: list[bool] = [False]
    transitions: list[LtsTransition] = []
    queue: deque[int] = deque([0])
    complete = True
    while queue:
        src = queue.popleft()
        fully = True
        for tr in sorted_transitions(
            processes[src], defs, bounds.max_unfold, normalize_states
        ):
            target = canonical_state(tr.target, defs, bounds.max_unfold, normalize_states)
            target_str = format_process(target)
            dst = index.get(target_str)
            if dst is None:
                if len(states) >= bounds.max_states:
                    fully = False
                    complete = False
                    continue
                dst = len(states)
                index[target_str] = dst
                states.append(target_str)
                processes.append(target)
                expanded.append(False)
                queue.append(dst)
            transitions.append(LtsTransition(src, tr.label, dst))
        expanded[src] = fully
    return SymbolicLts(
        states=tuple(states),
        processes=tuple(processes),
        transitions=tuple(transitions),
        initial=0,
        complete=complete,
        expanded=tuple(expanded),
        bounds=bounds,
    )
