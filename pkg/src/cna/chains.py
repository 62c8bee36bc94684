"""Link-chain algebra: the label language of the calculus.

A link ``source\\target`` records one hop of an interaction.  Chains of
links are the transition labels; virtual links (``_\\_``) are holes that
other parties may fill via ``merge_concrete``.  Two canonical label forms
are provided on top of the concrete chains:

* ``NormalLabel`` -- the canonical representative of a chain up to
  *stretching* (placement of virtual links): a sequence of blocks of
  solid links, one implicit virtual link between blocks.
* ``EssentialLabel`` -- the canonical representative up to stretching
  plus collapsing of internally tau-matched hops: the alternation of
  solid links with single virtual links.

All values are immutable; all operations are pure.  Partial operations
return ``None`` instead of raising.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass
from typing import Iterator, Union

TAU = "tau"
VIRTUAL = "_"

_IDENT_RE = re.compile(r"[a-zA-Z][a-zA-Z0-9_]*\Z")


class ChainError(ValueError):
    """Base class for chain construction/parsing failures."""


class ChainSyntaxError(ChainError):
    """Malformed chain literal."""


class InvalidLink(ChainError):
    """A link mixing a virtual site with a non-virtual one."""


class InvalidAdjacency(ChainError):
    """Adjacent links whose facing sites do not agree."""


class AllVirtual(ChainError):
    """A chain without any solid link."""


class InvalidRenaming(ChainError):
    """A renaming map that is not a finite permutation of channels."""


def is_channel(site: str) -> bool:
    return site != TAU and site != VIRTUAL


def check_site(site: str) -> str:
    if site == TAU or site == VIRTUAL:
        return site
    if not _IDENT_RE.match(site):
        raise ChainSyntaxError(f"invalid site {site!r}")
    return site


@dataclass(frozen=True)
class Link:
    """One hop ``source\\target``; solid (both sites given) or virtual."""

    source: str
    target: str

    def __post_init__(self) -> None:
        check_site(self.source)
        check_site(self.target)
        if (self.source == VIRTUAL) != (self.target == VIRTUAL):
            raise InvalidLink(
                f"link {self.source}\\{self.target} mixes virtual and non-virtual sites"
            )

    @property
    def solid(self) -> bool:
        return self.source != VIRTUAL

    @property
    def virtual(self) -> bool:
        return self.source == VIRTUAL

    def __str__(self) -> str:
        return f"{self.source}\\{self.target}"


VIRTUAL_LINK = Link(VIRTUAL, VIRTUAL)


def _check_adjacent(left: Link, right: Link) -> None:
    b, a = left.target, right.source
    if is_channel(b) and is_channel(a) and b != a:
        raise InvalidAdjacency(f"facing channels differ: ...{b} | {a}...")
    if (b == TAU) != (a == TAU):
        raise InvalidAdjacency(f"tau must face tau: ...{b} | {a}...")


@dataclass(frozen=True)
class LinkChain:
    """A non-empty sequence of valid links with agreeing adjacent sites."""

    links: tuple[Link, ...]

    def __post_init__(self) -> None:
        if not self.links:
            raise AllVirtual("empty chain")
        for left, right in zip(self.links, self.links[1:]):
            _check_adjacent(left, right)
        if all(l.virtual for l in self.links):
            raise AllVirtual("chain consists of virtual links only")

    def __len__(self) -> int:
        return len(self.links)

    @property
    def size(self) -> int:
        """Number of solid links."""
        return sum(1 for l in self.links if l.solid)

    @property
    def solid(self) -> bool:
        return all(l.solid for l in self.links)

    def sites(self) -> Iterator[str]:
        for l in self.links:
            yield l.source
            yield l.target

    def channels(self) -> set[str]:
        return {s for s in self.sites() if is_channel(s)}

    def __str__(self) -> str:
        return format_chain(self)


def parse_chain(text: str) -> LinkChain:
    """Parse a ``;``-separated list of ``site\\site`` literals."""
    pieces = text.split(";")
    links = []
    for piece in pieces:
        if piece.count("\\") != 1:
            raise ChainSyntaxError(f"malformed link literal {piece.strip()!r}")
        src, tgt = (part.strip() for part in piece.split("\\"))
        if not src or not tgt:
            raise ChainSyntaxError(f"malformed link literal {piece.strip()!r}")
        links.append(Link(check_site(src), check_site(tgt)))
    return LinkChain(tuple(links))


def format_chain(chain: LinkChain) -> str:
    """Canonical spelling; inverse of ``parse_chain``."""
    return " ; ".join(str(l) for l in chain.links)


# ---------------------------------------------------------------------------
# concrete operations


def _merge_site(x: str, y: str) -> str | None:
    if x == VIRTUAL:
        return y
    if y == VIRTUAL:
        return x
    return None


def merge_concrete(s: LinkChain, t: LinkChain) -> LinkChain | None:
    """Position-wise superposition of two equal-length chains.

    Undefined (``None``) on length mismatch, on a clash of two solid
    sites, or when the superposition is not a valid chain.
    """
    if len(s) != len(t):
        return None
    links = []
    for l, r in zip(s.links, t.links):
        src = _merge_site(l.source, r.source)
        tgt = _merge_site(l.target, r.target)
        if src is None or tgt is None:
            return None
        links.append(Link(src, tgt))
    try:
        return LinkChain(tuple(links))
    except ChainError:
        return None


def is_matched(chan: str, s: LinkChain) -> bool:
    """True when every occurrence of ``chan`` is an agreeing junction pair.

    A channel absent from the chain is vacuously matched.
    """
    if not is_channel(chan):
        raise ValueError(f"{chan!r} is not a channel")
    if s.links[0].source == chan or s.links[-1].target == chan:
        return False
    for left, right in zip(s.links, s.links[1:]):
        if (left.target == chan) != (right.source == chan):
            return False
    return True


def restrict_concrete(chan: str, s: LinkChain) -> LinkChain | None:
    """Hide ``chan``: every occurrence becomes tau; undefined if pending."""
    if not is_matched(chan, s):
        return None
    links = tuple(
        Link(TAU if l.source == chan else l.source, TAU if l.target == chan else l.target)
        for l in s.links
    )
    return LinkChain(links)


# ---------------------------------------------------------------------------
# renaming and substitution


@dataclass(frozen=True)
class Renaming:
    """A finite permutation of channels (identity elsewhere).

    ``pairs`` holds the non-identity mappings, sorted by source channel.
    """

    pairs: tuple[tuple[str, str], ...]

    def __post_init__(self) -> None:
        mapping = {}
        for src, dst in self.pairs:
            if not is_channel(src) or not is_channel(dst):
                raise InvalidRenaming("renamings act on channels only")
            if src in mapping:
                raise InvalidRenaming(f"channel {src} renamed twice")
            mapping[src] = dst
        if len(set(mapping.values())) != len(mapping):
            raise InvalidRenaming("renaming is not injective")
        if set(mapping) != set(mapping.values()):
            raise InvalidRenaming("renaming domain and range differ: not a permutation")
        canonical = tuple(sorted((s, d) for s, d in mapping.items() if s != d))
        object.__setattr__(self, "pairs", canonical)

    @classmethod
    def identity(cls) -> "Renaming":
        return cls(())

    @classmethod
    def swap(cls, a: str, b: str) -> "Renaming":
        if a == b:
            return cls(())
        return cls(((a, b), (b, a)))

    @classmethod
    def from_map(cls, mapping: dict[str, str]) -> "Renaming":
        return cls(tuple(mapping.items()))

    @property
    def is_identity(self) -> bool:
        return not self.pairs

    def apply(self, site: str) -> str:
        if not is_channel(site):
            return site
        return dict(self.pairs).get(site, site)

    def inverse(self) -> "Renaming":
        return Renaming(tuple((d, s) for s, d in self.pairs))

    def inverse_apply(self, site: str) -> str:
        return self.inverse().apply(site)

    def then(self, after: "Renaming") -> "Renaming":
        """Composition: first self, then ``after``."""
        domain = {s for s, _ in self.pairs} | {s for s, _ in after.pairs}
        return Renaming(tuple((s, after.apply(self.apply(s))) for s in sorted(domain)))

    def cycles(self) -> list[tuple[str, ...]]:
        """Disjoint cycles sorted by their least element (fixed points omitted)."""
        mapping = dict(self.pairs)
        seen: set[str] = set()
        out = []
        for start in sorted(mapping):
            if start in seen:
                continue
            cycle = [start]
            seen.add(start)
            cur = mapping[start]
            while cur != start:
                cycle.append(cur)
                seen.add(cur)
                cur = mapping[cur]
            out.append(tuple(cycle))
        return out


Label = Union["LinkChain", "NormalLabel", "EssentialLabel"]


def _map_sites(label: Label, fn) -> Label:
    if isinstance(label, LinkChain):
        return LinkChain(tuple(Link(fn(l.source), fn(l.target)) for l in label.links))
    if isinstance(label, NormalLabel):
        return NormalLabel(
            tuple(
                Block(tuple(Link(fn(l.source), fn(l.target)) for l in b.links))
                for b in label.blocks
            )
        )
    if isinstance(label, EssentialLabel):
        return EssentialLabel(tuple(Link(fn(l.source), fn(l.target)) for l in label.links))
    raise TypeError(f"not a label: {label!r}")


def rename_chain(label: Label, phi: Renaming) -> Label:
    """Apply a channel permutation site-wise; tau and ``_`` are fixed."""
    return _map_sites(label, phi.apply)


def subst_chain(label: Label, new: str, old: str) -> Label:
    """Replace every occurrence of channel ``old`` by ``new`` site-wise."""
    if not is_channel(new) or not is_channel(old):
        raise ValueError("substitution acts on channels")
    return _map_sites(label, lambda s: new if s == old else s)


# ---------------------------------------------------------------------------
# canonical forms


@dataclass(frozen=True)
class Block:
    """A run of solid links joined at tau-matched junctions."""

    links: tuple[Link, ...]

    def __post_init__(self) -> None:
        if not self.links:
            raise ChainError("empty block")
        for l in self.links:
            if not l.solid:
                raise ChainError("virtual link inside a block")
        for left, right in zip(self.links, self.links[1:]):
            if left.target != TAU or right.source != TAU:
                raise ChainError("block junctions must be tau-matched")

    @property
    def first_source(self) -> str:
        return self.links[0].source

    @property
    def last_target(self) -> str:
        return self.links[-1].target

    def collapse(self) -> Link:
        """The single link spanning the block's endpoints."""
        return Link(self.first_source, self.last_target)

    def __str__(self) -> str:
        return " ; ".join(str(l) for l in self.links)


@dataclass(frozen=True)
class NormalLabel:
    """Canonical form up to stretching: blocks separated by one virtual link.

    Tau may occur only at the outer extremes and at intra-block junctions;
    the facing sites of consecutive blocks are channels (not necessarily
    equal).
    """

    blocks: tuple[Block, ...]

    def __post_init__(self) -> None:
        if not self.blocks:
            raise ChainError("label without blocks")
        for i, block in enumerate(self.blocks):
            if i > 0 and not is_channel(block.first_source):
                raise ChainError("tau may open the first block only")
            if i < len(self.blocks) - 1 and not is_channel(block.last_target):
                raise ChainError("tau may close the last block only")

    @property
    def size(self) -> int:
        return sum(len(b.links) for b in self.blocks)

    def to_chain(self) -> LinkChain:
        """The canonical concrete representative."""
        links: list[Link] = []
        for i, block in enumerate(self.blocks):
            if i > 0:
                links.append(VIRTUAL_LINK)
            links.extend(block.links)
        return LinkChain(tuple(links))

    def min_concrete_length(self) -> int:
        """Length of the shortest chain in this label's stretching class.

        The virtual link between two blocks can be contracted exactly when
        the facing channels are equal.
        """
        gaps = sum(
            1
            for left, right in zip(self.blocks, self.blocks[1:])
            if left.last_target != right.first_source
        )
        return self.size + gaps

    def channels(self) -> set[str]:
        return self.to_chain().channels()

    def __str__(self) -> str:
        return format_chain(self.to_chain())


@dataclass(frozen=True)
class EssentialLabel:
    """Canonical form up to stretching and tau-collapse: solid links only,
    denoting their alternation with single virtual links."""

    links: tuple[Link, ...]

    def __post_init__(self) -> None:
        if not self.links:
            raise ChainError("empty essential label")
        for l in self.links:
            if not l.solid:
                raise ChainError("virtual link in an essential label")
        for i, l in enumerate(self.links):
            if i > 0 and not is_channel(l.source):
                raise ChainError("internal sources of an essential label are channels")
            if i < len(self.links) - 1 and not is_channel(l.target):
                raise ChainError("internal targets of an essential label are channels")

    @property
    def size(self) -> int:
        return len(self.links)

    def to_chain(self) -> LinkChain:
        links: list[Link] = []
        for i, l in enumerate(self.links):
            if i > 0:
                links.append(VIRTUAL_LINK)
            links.append(l)
        return LinkChain(tuple(links))

    def channels(self) -> set[str]:
        return self.to_chain().channels()

    def __str__(self) -> str:
        return format_chain(self.to_chain())


def normalize(s: LinkChain) -> NormalLabel:
    """Canonical representative of ``s`` up to stretching.

    Outer virtuals are dropped, virtual runs collapse to one, and every
    channel-matched solid adjacency is split into separate blocks.
    Tau-matched junctions cannot be stretched apart and stay within one
    block.  The number of solid links is preserved.
    """
    blocks: list[list[Link]] = []
    current: list[Link] = []
    prev_solid = False
    for link in s.links:
        if link.virtual:
            if current:
                blocks.append(current)
                current = []
            prev_solid = False
            continue
        if current and prev_solid and current[-1].target != TAU:
            # channel-matched adjacency: split here
            blocks.append(current)
            current = []
        current.append(link)
        prev_solid = True
    if current:
        blocks.append(current)
    return NormalLabel(tuple(Block(tuple(b)) for b in blocks))


def reduce_chain(label: LinkChain | NormalLabel) -> EssentialLabel:
    """The unique essential representative: each block collapses to the
    link spanning its endpoints.  Two labels are interchangeable in the
    bisimulation game exactly when their reductions are equal."""
    normal = normalize(label) if isinstance(label, LinkChain) else label
    return EssentialLabel(tuple(b.collapse() for b in normal.blocks))


# ---------------------------------------------------------------------------
# symbolic operations (one result per stretching class)


def _tau_extremes_ok(blocks: tuple[Block, ...]) -> bool:
    last = len(blocks) - 1
    for i, b in enumerate(blocks):
        if b.first_source == TAU and i != 0:
            return False
        if b.last_target == TAU and i != last:
            return False
    return True


def merge_symbolic(left: NormalLabel, right: NormalLabel) -> frozenset[NormalLabel]:
    """All results of merging any stretching of ``left`` with any stretching
    of ``right``, one per class.

    Blocks are atomic: a tau junction can only arise within one side, so a
    merge interleaves whole blocks, preserving each side's order.  A block
    opened by tau must come first overall; one closed by tau must come
    last.  The empty set plays the role of the undefined concrete merge.
    """
    p, q = len(left.blocks), len(right.blocks)
    out = set()
    for positions in itertools.combinations(range(p + q), p):
        blocks: list[Block | None] = [None] * (p + q)
        for block, pos in zip(left.blocks, positions):
            blocks[pos] = block
        rest = iter(right.blocks)
        for i in range(p + q):
            if blocks[i] is None:
                blocks[i] = next(rest)
        candidate = tuple(blocks)
        if _tau_extremes_ok(candidate):
            out.add(NormalLabel(candidate))
    return frozenset(out)


def restrict_symbolic(chan: str, label: NormalLabel) -> NormalLabel | None:
    """Hide ``chan`` in a canonical label.

    In a canonical label a channel occurs only at block extremes.  An
    occurrence at the outer extremes is pending; at an inter-block
    junction it is matched only if both facing sites carry it, in which
    case the two blocks fuse into one across a new tau junction.
    """
    if not is_channel(chan):
        raise ValueError(f"{chan!r} is not a channel")
    if label.blocks[0].first_source == chan or label.blocks[-1].last_target == chan:
        return None
    merged: list[list[Link]] = [list(label.blocks[0].links)]
    for block in label.blocks[1:]:
        left_site = merged[-1][-1].target
        right_site = block.links[0].source
        if left_site == chan and right_site == chan:
            tail = merged[-1][-1]
            merged[-1][-1] = Link(tail.source, TAU)
            rest = list(block.links)
            rest[0] = Link(TAU, rest[0].target)
            merged[-1].extend(rest)
        elif left_site == chan or right_site == chan:
            return None
        else:
            merged.append(list(block.links))
    return NormalLabel(tuple(Block(tuple(links)) for links in merged))


# ---------------------------------------------------------------------------
# stretching-class enumeration (used by the literal rule-by-rule semantics)


def _insertions(chain: LinkChain) -> Iterator[LinkChain]:
    for i in range(len(chain) + 1):
        links = chain.links[:i] + (VIRTUAL_LINK,) + chain.links[i:]
        try:
            yield LinkChain(links)
        except ChainError:
            continue


def _deletions(chain: LinkChain) -> Iterator[LinkChain]:
    for i, link in enumerate(chain.links):
        if not link.virtual:
            continue
        links = chain.links[:i] + chain.links[i + 1 :]
        if not links:
            continue
        try:
            yield LinkChain(links)
        except ChainError:
            continue


def stretch_variants(chain: LinkChain, max_len: int) -> set[LinkChain]:
    """Every chain in the stretching class of ``chain`` of length <= max_len.

    Single virtual insertions/removals that keep the chain valid generate
    the whole class; intermediate steps never need to exceed
    ``max(len(chain), max_len)``.
    """
    bound = max(len(chain), max_len)
    seen = {chain}
    frontier = [chain]
    while frontier:
        cur = frontier.pop()
        steps: list[LinkChain] = list(_deletions(cur))
        if len(cur) < bound:
            steps.extend(_insertions(cur))
        for nxt in steps:
            if nxt not in seen:
                seen.add(nxt)
                frontier.append(nxt)
    return {c for c in seen if len(c) <= max_len}
