"""Bisimilarity up to label reduction, decided by partition refinement
over bounded transition systems, and a randomized harness for the
algebraic laws the equivalence is expected to satisfy (congruence,
substitution closure, monoidal laws).
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Optional

from .chains import TAU, EssentialLabel, Link, NormalLabel, Renaming, reduce_chain
from .process import (
    NIL,
    Definitions,
    Par,
    Prefix,
    Process,
    Rename,
    Restrict,
    Sum,
    format_process,
    free_names,
    subst_process,
)
from .semantics import Bounds, SymbolicLts, build_lts

NETWORK = "network"
STRONG = "strong"


def label_key(label: NormalLabel, mode: str) -> str:
    """The string on which two transition labels are matched.

    Network mode matches labels up to reduction (equal essential forms);
    strong mode matches the stretching classes themselves.
    """
    if mode == NETWORK:
        return str(reduce_chain(label))
    if mode == STRONG:
        return str(label)
    raise ValueError(f"unknown mode {mode!r}")


@dataclass(frozen=True)
class WitnessMove:
    """One attack: from the recorded pair, ``side`` fires a transition
    with key ``label``.  In the last move the other side has no reply."""

    side: str  # "left" | "right"
    label: str
    left_state: int
    right_state: int


@dataclass
class Verdict:
    kind: str  # "bisimilar" | "distinguished" | "unknown"
    witness: tuple[WitnessMove, ...] = ()
    reason: str = ""
    left: Optional[SymbolicLts] = None
    right: Optional[SymbolicLts] = None

    @property
    def bisimilar(self) -> bool:
        return self.kind == "bisimilar"

    @property
    def distinguished(self) -> bool:
        return self.kind == "distinguished"

    @property
    def unknown(self) -> bool:
        return self.kind == "unknown"


def _adjacency(lts: SymbolicLts, mode: str) -> list[dict[str, set[int]]]:
    adj: list[dict[str, set[int]]] = [dict() for _ in lts.states]
    for tr in lts.transitions:
        adj[tr.src].setdefault(label_key(tr.label, mode), set()).add(tr.dst)
    return adj


def partition_refine(adjacencies: list[dict[str, set[int]]]) -> list[int]:
    """Coarsest partition in which related states have, per label key,
    successors into the same set of blocks (signature refinement).
    Returns a block id per state."""
    n = len(adjacencies)
    blocks = [0] * n
    while True:
        signatures: dict[tuple, int] = {}
        merged: dict[tuple[int, int], int] = {}
        nxt = [0] * n
        for s in range(n):
            sig = frozenset(
                (key, frozenset(blocks[d] for d in dsts))
                for key, dsts in adjacencies[s].items()
            )
            sig_id = signatures.setdefault(sig, len(signatures))
            nxt[s] = merged.setdefault((blocks[s], sig_id), len(merged))
        if nxt == blocks:
            return blocks
        blocks = nxt


_STUCK = (-1, -1)


class _Game:
    """Attacker-wins levels over the reachable product of two LTSs.

    Pairs involving an unexpanded state are never distinguishable, which
    keeps "distinguished" verdicts sound under exploration bounds.
    """

    def __init__(self, left: SymbolicLts, right: SymbolicLts, mode: str):
        self.left = left
        self.right = right
        self.ladj = _adjacency(left, mode)
        self.radj = _adjacency(right, mode)
        self.pairs = self._reachable_pairs()
        self.level: dict[tuple[int, int], int] = {}
        self.move: dict[tuple[int, int], tuple[str, str, tuple[int, int]]] = {}
        self._solve()

    def _reachable_pairs(self) -> list[tuple[int, int]]:
        start = (self.left.initial, self.right.initial)
        seen = {start}
        frontier = [start]
        while frontier:
            l, r = frontier.pop()
            for key, ldsts in self.ladj[l].items():
                for ld in ldsts:
                    for rd in self.radj[r].get(key, ()):
                        pair = (ld, rd)
                        if pair not in seen:
                            seen.add(pair)
                            frontier.append(pair)
        return sorted(seen)

    def _attack(
        self, pair: tuple[int, int], cap: int
    ) -> Optional[tuple[str, str, tuple[int, int]]]:
        """A winning attack from ``pair`` all of whose defender replies are
        already distinguishable below ``cap``; None if there is none."""
        l, r = pair
        for side in ("left", "right"):
            adj_att, adj_def = (self.ladj, self.radj) if side == "left" else (self.radj, self.ladj)
            att, dfn = (l, r) if side == "left" else (r, l)
            for key in sorted(adj_att[att]):
                defender = adj_def[dfn].get(key, set())
                for succ in sorted(adj_att[att][key]):
                    worst: tuple[int, tuple[int, int]] | None = None
                    refuted = True
                    for reply in defender:
                        dpair = (succ, reply) if side == "left" else (reply, succ)
                        lvl = self.level.get(dpair)
                        if lvl is None or lvl >= cap:
                            refuted = False
                            break
                        if worst is None or lvl > worst[0]:
                            worst = (lvl, dpair)
                    if refuted:
                        return (side, key, worst[1] if worst else _STUCK)
        return None

    def _solve(self) -> None:
        sweep = 1
        changed = True
        while changed:
            changed = False
            for pair in self.pairs:
                if pair in self.level:
                    continue
                if not (self.left.expanded[pair[0]] and self.right.expanded[pair[1]]):
                    continue
                attack = self._attack(pair, sweep)
                if attack is not None:
                    self.level[pair] = sweep
                    self.move[pair] = attack
                    changed = True
            sweep += 1

    def distinguishable(self) -> bool:
        return (self.left.initial, self.right.initial) in self.level

    def witness(self) -> tuple[WitnessMove, ...]:
        moves = []
        pair = (self.left.initial, self.right.initial)
        while True:
            side, key, nxt = self.move[pair]
            moves.append(WitnessMove(side, key, pair[0], pair[1]))
            if nxt == _STUCK:
                return tuple(moves)
            pair = nxt


def check_bisim(
    p: Process,
    q: Process,
    defs: Definitions,
    mode: str = NETWORK,
    bounds: Bounds = Bounds(),
    normalize_states: bool = True,
) -> Verdict:
    """Decide bisimilarity of two processes with labels matched by mode.

    Builds both bounded transition systems.  When both are complete the
    answer is exact; otherwise only a "distinguished" verdict (sound
    within the explored fragment) or "unknown" is possible.
    """
    left = build_lts(p, defs, bounds, normalize_states)
    right = build_lts(q, defs, bounds, normalize_states)
    if left.complete and right.complete:
        n = len(left.states)
        union = _adjacency(left, mode) + [
            {key: {d + n for d in dsts} for key, dsts in row.items()}
            for row in _adjacency(right, mode)
        ]
        blocks = partition_refine(union)
        if blocks[left.initial] == blocks[right.initial + n]:
            return Verdict("bisimilar", left=left, right=right)
        game = _Game(left, right, mode)
        assert game.distinguishable(), "refinement and game disagree"
        return Verdict("distinguished", witness=game.witness(), left=left, right=right)
    game = _Game(left, right, mode)
    if game.distinguishable():
        return Verdict("distinguished", witness=game.witness(), left=left, right=right)
    hit = []
    if not left.complete:
        hit.append("left")
    if not right.complete:
        hit.append("right")
    return Verdict(
        "unknown",
        reason=f"state bound {bounds.max_states} exhausted on: {', '.join(hit)}",
        left=left,
        right=right,
    )


# ---------------------------------------------------------------------------
# law harness


@dataclass
class LawResult:
    name: str
    passed: int = 0
    failed: int = 0
    unknown: int = 0
    counterexamples: list[str] = field(default_factory=list)

    def record(self, verdict: Verdict, description: str, limit: int = 3) -> None:
        if verdict.bisimilar:
            self.passed += 1
        elif verdict.distinguished:
            self.failed += 1
            if len(self.counterexamples) < limit:
                self.counterexamples.append(description)
        else:
            self.unknown += 1


@dataclass
class LawReport:
    seed: int
    samples: int
    results: list[LawResult] = field(default_factory=list)

    @property
    def failures(self) -> int:
        return sum(r.failed for r in self.results)

    @property
    def unknowns(self) -> int:
        return sum(r.unknown for r in self.results)

    @property
    def checks(self) -> int:
        return sum(r.passed + r.failed + r.unknown for r in self.results)

    @property
    def ok(self) -> bool:
        return self.failures == 0

    def to_doc(self) -> dict:
        return {
            "seed": self.seed,
            "samples": self.samples,
            "ok": self.ok,
            "laws": [
                {
                    "name": r.name,
                    "passed": r.passed,
                    "failed": r.failed,
                    "unknown": r.unknown,
                    "counterexamples": r.counterexamples,
                }
                for r in self.results
            ],
        }

    def render_text(self) -> str:
        lines = [f"law harness: seed={self.seed} samples={self.samples}"]
        width = max(len(r.name) for r in self.results)
        for r in self.results:
            status = "ok" if r.failed == 0 else "FAIL"
            lines.append(
                f"  {r.name.ljust(width)}  pass={r.passed:<4} fail={r.failed:<3} "
                f"unknown={r.unknown:<3} {status}"
            )
            for ce in r.counterexamples:
                lines.append(f"      counterexample: {ce}")
        lines.append(f"total failures: {self.failures}, unknowns: {self.unknowns}")
        return "\n".join(lines)


_ALPHABET = ("a", "b", "c")

_LAW_NAMES = (
    "par commutative: P|Q ~ Q|P",
    "par associative: (P|Q)|R ~ P|(Q|R)",
    "par unit: P|0 ~ P",
    "sum commutative: P+Q ~ Q+P",
    "sum associative: (P+Q)+R ~ P+(Q+R)",
    "sum unit: P+0 ~ P",
    "sum idempotent: P+P ~ P",
    "restriction swap: (na)(nb)P ~ (nb)(na)P",
    "congruence: prefix",
    "congruence: sum",
    "congruence: parallel",
    "congruence: restriction",
    "congruence: renaming",
    "substitution: P~Q implies P{b/a}~Q{b/a}",
)


class ProcessSampler:
    """Seeded generator of small closed processes over a 3-letter alphabet."""

    def __init__(self, rng: random.Random, max_depth: int = 4, max_width: int = 3):
        self.rng = rng
        self.max_depth = max_depth
        self.max_width = max_width

    def site(self, allow_tau: bool = True) -> str:
        pool = _ALPHABET + ((TAU,) if allow_tau else ())
        return self.rng.choice(pool)

    def label(self) -> EssentialLabel:
        if self.rng.random() < 0.15:
            first = Link(self.site(), self.site(allow_tau=False))
            second = Link(self.site(allow_tau=False), self.site())
            return EssentialLabel((first, second))
        return EssentialLabel((Link(self.site(), self.site()),))

    def process(self, depth: int | None = None, width: int | None = None) -> Process:
        if depth is None:
            depth = self.max_depth
        if width is None:
            width = self.max_width
        if depth <= 0:
            return NIL
        roll = self.rng.random()
        if roll < 0.10:
            return NIL
        if roll < 0.55:
            return Prefix(self.label(), self.process(depth - 1, width))
        if roll < 0.70:
            return Sum(self.process(depth - 1, width), self.process(depth - 1, width))
        if roll < 0.85 and width > 1:
            return Par(self.process(depth - 1, width - 1), self.process(depth - 1, width - 1))
        if roll < 0.95:
            return Restrict(self.rng.choice(_ALPHABET), self.process(depth - 1, width))
        a, b = self.rng.sample(_ALPHABET, 2)
        return Rename(self.process(depth - 1, width), Renaming.swap(a, b))

    def mutate(self, p: Process) -> Process:
        """A law-preserving rewrite of ``p``: bisimilar by construction."""
        choice = self.rng.randrange(4)
        if choice == 0:
            return Par(p, NIL)
        if choice == 1 and isinstance(p, Par):
            return Par(p.right, p.left)
        if choice == 2 and isinstance(p, Sum):
            return Sum(p.right, p.left)
        if choice == 3:
            dead = "z0" if "z0" not in free_names(p) else "z1"
            return Restrict(dead, p)
        return Par(NIL, p)


def law_harness(
    defs: Definitions,
    seed: int = 42,
    samples: int = 100,
    bounds: Bounds = Bounds(max_states=2000),
) -> LawReport:
    """Check the expected laws on seeded random processes.

    Every instance is decided by the checker itself, so a defect in the
    semantics (e.g. a lost merge interleaving) surfaces as law failures.
    """
    rng = random.Random(seed)
    sampler = ProcessSampler(rng)
    report = LawReport(seed=seed, samples=samples)
    laws = {name: LawResult(name) for name in _LAW_NAMES}

    def check(name: str, lhs: Process, rhs: Process) -> None:
        verdict = check_bisim(lhs, rhs, defs, mode=NETWORK, bounds=bounds)
        laws[name].record(verdict, f"{format_process(lhs)}  vs  {format_process(rhs)}")

    for _ in range(samples):
        p = sampler.process()
        q = sampler.process()
        r = sampler.process(depth=2)

        check("par commutative: P|Q ~ Q|P", Par(p, q), Par(q, p))
        check("par associative: (P|Q)|R ~ P|(Q|R)", Par(Par(p, q), r), Par(p, Par(q, r)))
        check("par unit: P|0 ~ P", Par(p, NIL), p)
        check("sum commutative: P+Q ~ Q+P", Sum(p, q), Sum(q, p))
        check("sum associative: (P+Q)+R ~ P+(Q+R)", Sum(Sum(p, q), r), Sum(p, Sum(q, r)))
        check("sum unit: P+0 ~ P", Sum(p, NIL), p)
        check("sum idempotent: P+P ~ P", Sum(p, p), p)
        a, b = rng.sample(_ALPHABET, 2)
        check(
            "restriction swap: (na)(nb)P ~ (nb)(na)P",
            Restrict(a, Restrict(b, p)),
            Restrict(b, Restrict(a, p)),
        )

        # congruence and substitution closure on a bisimilar-by-construction pair
        mate = sampler.mutate(p)
        lab = sampler.label()
        check("congruence: prefix", Prefix(lab, p), Prefix(lab, mate))
        check("congruence: sum", Sum(p, r), Sum(mate, r))
        check("congruence: parallel", Par(p, r), Par(mate, r))
        chan = rng.choice(_ALPHABET)
        check("congruence: restriction", Restrict(chan, p), Restrict(chan, mate))
        x, y = rng.sample(_ALPHABET, 2)
        check("congruence: renaming", Rename(p, Renaming.swap(x, y)), Rename(mate, Renaming.swap(x, y)))
        old, new = rng.sample(_ALPHABET, 2)
        check(
            "substitution: P~Q implies P{b/a}~Q{b/a}",
            subst_process(p, new, old),
            subst_process(mate, new, old),
        )

    report.results = list(laws.values())
    return report
