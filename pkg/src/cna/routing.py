"""Routing infrastructures: boxes with a left and a right interface and
forwarding links between them, composed by restricting the shared
interface.  The induced graph's boundary-to-boundary paths characterise
the composite's transitions, and collapsing every path to one link gives
a behaviourally interchangeable basic infrastructure.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterator, Union

from .chains import TAU, Link, reduce_chain
from .process import (
    Call,
    Definition,
    Definitions,
    EssentialLabel,
    Par,
    Prefix,
    Process,
    Restrict,
    Sum,
    par_of,
    sum_of,
)
from .semantics import Bounds, build_lts
from .equivalence import NETWORK, check_bisim


class InfraError(ValueError):
    pass


class InterfaceMismatch(InfraError):
    pass


@dataclass(frozen=True)
class Basic:
    """A recursive sum of one-hop forwarders between two interfaces."""

    name: str
    left: tuple[str, ...]
    right: tuple[str, ...]
    links: frozenset[tuple[int, int]]

    def __post_init__(self) -> None:
        if len(set(self.left)) != len(self.left) or len(set(self.right)) != len(self.right):
            raise InterfaceMismatch(f"{self.name}: interface channels must be distinct")
        if set(self.left) & set(self.right):
            raise InterfaceMismatch(f"{self.name}: left and right interfaces overlap")
        for i, j in self.links:
            if not (0 <= i < len(self.left) and 0 <= j < len(self.right)):
                raise InterfaceMismatch(f"{self.name}: link index ({i},{j}) out of range")


@dataclass(frozen=True)
class Compose:
    """Two infrastructures glued along (and hiding) a shared interface."""

    first: "Infra"
    second: "Infra"
    shared: tuple[str, ...]

    def __post_init__(self) -> None:
        if right_interface(self.first) != self.shared or left_interface(self.second) != self.shared:
            raise InterfaceMismatch(
                f"shared interface {self.shared} does not match "
                f"{right_interface(self.first)} / {left_interface(self.second)}"
            )
        overlap = _channels(self.first) & _channels(self.second)
        if overlap != set(self.shared):
            raise InterfaceMismatch(
                f"channels reused across composed infrastructures: {sorted(overlap - set(self.shared))}"
            )


Infra = Union[Basic, Compose]


def left_interface(infra: Infra) -> tuple[str, ...]:
    return infra.left if isinstance(infra, Basic) else left_interface(infra.first)


def right_interface(infra: Infra) -> tuple[str, ...]:
    return infra.right if isinstance(infra, Basic) else right_interface(infra.second)


def infra_name(infra: Infra) -> str:
    if isinstance(infra, Basic):
        return infra.name
    return f"{infra_name(infra.first)}_{infra_name(infra.second)}"


def _channels(infra: Infra) -> set[str]:
    if isinstance(infra, Basic):
        return set(infra.left) | set(infra.right)
    return _channels(infra.first) | _channels(infra.second)


def _basics(infra: Infra) -> Iterator[Basic]:
    if isinstance(infra, Basic):
        yield infra
    else:
        yield from _basics(infra.first)
        yield from _basics(infra.second)


def _basic_definition(basic: Basic) -> Definition:
    params = basic.left + basic.right
    summands = [
        Prefix(
            EssentialLabel((Link(basic.left[i], basic.right[j]),)),
            Call(basic.name, params),
        )
        for i, j in sorted(basic.links)
    ]
    return Definition(basic.name, params, sum_of(summands))


def infra_to_process(infra: Infra) -> tuple[Process, Definitions]:
    """The process denoted by an infrastructure.

    A basic box becomes a recursive sum of link prefixes; a composition
    restricts the shared channels over the parallel of its parts.  An
    empty link set degenerates to the inert process.
    """
    defs: Definitions = {}
    for basic in _basics(infra):
        d = _basic_definition(basic)
        if basic.name in defs and defs[basic.name] != d:
            raise InterfaceMismatch(f"two different boxes share the name {basic.name}")
        defs[basic.name] = d

    def build(i: Infra) -> Process:
        if isinstance(i, Basic):
            return Call(i.name, i.left + i.right)
        body = Par(build(i.first), build(i.second))
        for chan in reversed(i.shared):
            body = Restrict(chan, body)
        return body

    return build(infra), defs


@dataclass(frozen=True)
class InfraGraph:
    nodes: frozenset[str]
    arcs: frozenset[tuple[str, str]]

    def successors(self, node: str) -> list[str]:
        return sorted(dst for src, dst in self.arcs if src == node)


def infra_graph(infra: Infra) -> InfraGraph:
    """Nodes are the interface channels, arcs the forwarding links."""
    nodes: set[str] = set()
    arcs: set[tuple[str, str]] = set()
    for basic in _basics(infra):
        nodes.update(basic.left)
        nodes.update(basic.right)
        for i, j in basic.links:
            arcs.add((basic.left[i], basic.right[j]))
    return InfraGraph(frozenset(nodes), frozenset(arcs))


def boundary_paths(infra: Infra) -> list[tuple[str, str, int]]:
    """All simple paths (>= 1 arc) from the left boundary to the right
    boundary, as (source, destination, length) triples."""
    graph = infra_graph(infra)
    sources = left_interface(infra)
    targets = set(right_interface(infra))
    found: set[tuple[str, str, int]] = set()

    def walk(node: str, length: int, seen: frozenset[str], origin: str) -> None:
        for nxt in graph.successors(node):
            if nxt in seen:
                continue
            if nxt in targets:
                found.add((origin, nxt, length + 1))
            walk(nxt, length + 1, seen | {nxt}, origin)

    for src in sources:
        walk(src, 0, frozenset({src}), src)
    return sorted(found)


def basic_equivalent(infra: Infra) -> tuple[Process, Definitions]:
    """The one-box infrastructure with a link per boundary path."""
    pairs = sorted({(a, b) for a, b, _ in boundary_paths(infra)})
    lefts = left_interface(infra)
    rights = right_interface(infra)
    links = frozenset((lefts.index(a), rights.index(b)) for a, b in pairs)
    box = Basic(f"{infra_name(infra)}_paths", lefts, rights, links)
    return infra_to_process(box)


@dataclass
class CheckItem:
    name: str
    status: str  # "pass" | "fail" | "unknown"
    detail: str = ""


@dataclass
class RoutingReport:
    items: list[CheckItem] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return all(i.status == "pass" for i in self.items)

    @property
    def unknown(self) -> bool:
        return any(i.status == "unknown" for i in self.items)

    def to_doc(self) -> dict:
        return {
            "ok": self.ok,
            "checks": [
                {"name": i.name, "status": i.status, "detail": i.detail}
                for i in self.items
            ],
        }

    def render_text(self) -> str:
        lines = []
        for i in self.items:
            lines.append(f"  [{i.status:>7}] {i.name}" + (f" -- {i.detail}" if i.detail else ""))
        return "\n".join(lines)


def verify_paths(infra: Infra, bounds: Bounds = Bounds()) -> RoutingReport:
    """Check the path/transition correspondence and the collapse to the
    path-equivalent basic infrastructure."""
    report = RoutingReport()
    proc, defs = infra_to_process(infra)
    lts = build_lts(proc, defs, bounds)
    paths = boundary_paths(infra)
    lengths: dict[tuple[str, str], set[int]] = {}
    for a, b, n in paths:
        lengths.setdefault((a, b), set()).add(n)
    lefts = set(left_interface(infra))
    rights = set(right_interface(infra))

    status = "pass" if lts.complete else "unknown"
    detail = ""
    for tr in lts.transitions:
        essential = reduce_chain(tr.label)
        if len(essential.links) != 1:
            status, detail = "fail", f"label {tr.label} does not reduce to one link"
            break
        link = essential.links[0]
        if link.source not in lefts or link.target not in rights:
            status, detail = "fail", f"{link} is not a boundary link"
            break
        if tr.label.size not in lengths.get((link.source, link.target), set()):
            status, detail = (
                "fail",
                f"no path {link.source}->{link.target} of length {tr.label.size}",
            )
            break
    report.items.append(
        CheckItem("every transition reduces to a boundary link with a matching path", status, detail)
    )

    by_key: dict[tuple[str, str, int], bool] = {}
    for tr in lts.transitions:
        essential = reduce_chain(tr.label)
        if len(essential.links) == 1:
            link = essential.links[0]
            by_key[(link.source, link.target, tr.label.size)] = True
    missing = [p for p in paths if p not in by_key]
    if missing:
        status = "unknown" if not lts.complete else "fail"
        detail = f"paths without matching transition: {missing[:5]}"
    else:
        status, detail = "pass", ""
    report.items.append(
        CheckItem("every boundary path is realised by a transition of equal size", status, detail)
    )

    basic_proc, basic_defs = basic_equivalent(infra)
    merged = dict(defs)
    merged.update(basic_defs)
    verdict = check_bisim(proc, basic_proc, merged, mode=NETWORK, bounds=bounds)
    report.items.append(
        CheckItem(
            "network bisimilar to the path-equivalent basic infrastructure",
            "pass" if verdict.bisimilar else ("unknown" if verdict.unknown else "fail"),
            verdict.reason,
        )
    )
    return report


def build_dynamic_infra(n: int, m: int) -> tuple[Process, Definitions]:
    """A programmable infrastructure: every (i, j) slot starts without a
    forwarding link; an ``add`` interaction installs one copy, ``rem``
    removes one.  Copies accumulate, so add twice / remove once leaves a
    link available."""
    if n < 1 or m < 1:
        raise ValueError("interface sizes must be positive")
    defs: Definitions = {}
    slots = []
    for i in range(1, n + 1):
        for j in range(1, m + 1):
            a, b = f"a{i}", f"b{j}"
            add, rem = f"add_{i}_{j}", f"rem_{i}_{j}"
            active, dormant = f"R_{i}_{j}", f"Rhat_{i}_{j}"
            params = (a, b, add, rem)
            call_active = Call(active, params)
            call_dormant = Call(dormant, params)
            defs[dormant] = Definition(
                dormant, params, Prefix(EssentialLabel((Link(add, TAU),)), call_active)
            )
            defs[active] = Definition(
                active,
                params,
                Sum(
                    Sum(
                        Prefix(EssentialLabel((Link(a, b),)), call_active),
                        Prefix(EssentialLabel((Link(rem, TAU),)), call_dormant),
                    ),
                    Prefix(
                        EssentialLabel((Link(add, TAU),)),
                        Par(call_active, call_active),
                    ),
                ),
            )
            slots.append(call_dormant)
    return par_of(slots), defs


# ---------------------------------------------------------------------------
# .infra files


_INFRA_TOKEN = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<comment>//[^\n]*)
  | (?P<ident>[a-zA-Z][a-zA-Z0-9_]*)
  | (?P<arrow>->)
  | (?P<punct>[(){},*=])
    """,
    re.VERBOSE,
)


def _infra_tokens(text: str) -> list[str]:
    out = []
    pos = 0
    while pos < len(text):
        m = _INFRA_TOKEN.match(text, pos)
        if not m:
            raise InfraError(f"unexpected character {text[pos]!r} in infrastructure file")
        if m.lastgroup not in ("ws", "comment"):
            out.append(m.group())
        pos = m.end()
    return out


class _InfraParser:
    def __init__(self, text: str):
        self.tokens = _infra_tokens(text)
        self.pos = 0
        self.defined: dict[str, Infra] = {}

    def cur(self) -> str:
        return self.tokens[self.pos] if self.pos < len(self.tokens) else ""

    def take(self, expected: str | None = None) -> str:
        tok = self.cur()
        if expected is not None and tok != expected:
            raise InfraError(f"expected {expected!r}, found {tok or 'end of file'!r}")
        self.pos += 1
        return tok

    def name_list(self) -> tuple[str, ...]:
        self.take("(")
        names = [self.take()]
        while self.cur() == ",":
            self.take()
            names.append(self.take())
        self.take(")")
        return tuple(names)

    def parse(self) -> dict[str, Infra]:
        while self.pos < len(self.tokens):
            kw = self.take()
            if kw == "basic":
                self.basic()
            elif kw == "compose":
                self.compose()
            else:
                raise InfraError(f"expected 'basic' or 'compose', found {kw!r}")
        if not self.defined:
            raise InfraError("empty infrastructure file")
        return self.defined

    def basic(self) -> None:
        name = self.take()
        self.take("left")
        left = self.name_list()
        self.take("right")
        right = self.name_list()
        self.take("{")
        links = set()
        while self.cur() != "}":
            src = self.take()
            self.take("->")
            dst = self.take()
            if src not in left or dst not in right:
                raise InfraError(f"link {src}->{dst} not between the declared interfaces")
            links.add((left.index(src), right.index(dst)))
            if self.cur() == ",":
                self.take()
        self.take("}")
        self._define(name, Basic(name, left, right, frozenset(links)))

    def compose(self) -> None:
        name = self.take()
        self.take("=")
        first = self.reference()
        self.take("*")
        second = self.reference()
        self.take("over")
        shared = self.name_list()
        self._define(name, Compose(first, second, shared))

    def reference(self) -> Infra:
        name = self.take()
        if name not in self.defined:
            raise InfraError(f"undefined infrastructure {name!r}")
        return self.defined[name]

    def _define(self, name: str, infra: Infra) -> None:
        if name in self.defined:
            raise InfraError(f"duplicate infrastructure name {name!r}")
        self.defined[name] = infra


def parse_infra(text: str) -> dict[str, Infra]:
    """Parse an ``.infra`` file into named infrastructures (insertion order
    preserved; the last entry is the conventional root)."""
    return _InfraParser(text).parse()
