"""Independent desk-scale oracles used to check the package against the
definitions directly: raw axiom closures over plain tuples (a separate
code path from the package's canonical forms) plus small generators.
"""

from __future__ import annotations

import random

from cna.chains import ChainError, Link, LinkChain, normalize

ALPHABET = ("a", "b", "c")
V = ("_", "_")


# ---------------------------------------------------------------------------
# raw chains as tuples of (source, target)


def raw(chain: LinkChain) -> tuple[tuple[str, str], ...]:
    return tuple((l.source, l.target) for l in chain.links)


def unraw(links: tuple[tuple[str, str], ...]) -> LinkChain:
    return LinkChain(tuple(Link(s, t) for s, t in links))


def raw_valid(links: tuple[tuple[str, str], ...]) -> bool:
    if not links or all(l == V for l in links):
        return False
    for s, t in links:
        if (s == "_") != (t == "_"):
            return False
    for (_, t1), (s2, _) in zip(links, links[1:]):
        if t1 not in ("tau", "_") and s2 not in ("tau", "_") and t1 != s2:
            return False
        if (t1 == "tau") != (s2 == "tau"):
            return False
    return True


def stretch_steps(links):
    """One application of each stretching axiom, in both directions."""
    n = len(links)
    out = [links + (V,), (V,) + links]
    if links[-1] == V:
        out.append(links[:-1])
    if links[0] == V:
        out.append(links[1:])
    for i in range(n - 1):
        if links[i] == V and links[i + 1] == V:
            out.append(links[:i] + links[i + 1 :])
    for i in range(n):
        if links[i] == V:
            out.append(links[: i] + (V,) + links[i:])
    for i in range(n - 1):
        site = links[i][1]
        if site not in ("tau", "_") and links[i + 1][0] == site:
            out.append(links[: i + 1] + (V,) + links[i + 1 :])
    for i in range(n - 2):
        site = links[i][1]
        if site not in ("tau", "_") and links[i + 1] == V and links[i + 2][0] == site:
            out.append(links[: i + 1] + links[i + 2 :])
    return [l for l in out if raw_valid(l)]


def collapse_steps(links):
    """The tau-collapse axiom, in both directions."""
    out = []
    for i in range(len(links) - 1):
        if links[i][1] == "tau" and links[i + 1][0] == "tau":
            out.append(links[:i] + ((links[i][0], links[i + 1][1]),) + links[i + 2 :])
    for i, (s, t) in enumerate(links):
        if (s, t) != V:
            out.append(links[:i] + ((s, "tau"), ("tau", t)) + links[i + 1 :])
    return [l for l in out if raw_valid(l)]


def _closure(start, steps, max_len):
    seen = {start}
    frontier = [start]
    while frontier:
        cur = frontier.pop()
        for nxt in steps(cur):
            if len(nxt) <= max_len and nxt not in seen:
                seen.add(nxt)
                frontier.append(nxt)
    return seen


def stretch_closure(chain: LinkChain, max_len: int) -> set:
    return _closure(raw(chain), stretch_steps, max(max_len, len(chain)))


def stretch_equiv(a: LinkChain, b: LinkChain, slack: int = 2) -> bool:
    cap = max(len(a), len(b)) + slack
    return raw(b) in stretch_closure(a, cap)


def collapse_equiv(a: LinkChain, b: LinkChain, slack: int = 2) -> bool:
    """Exhaustive-closure decision of interchangeability of labels
    (stretching plus tau-collapse).  The cap covers the rewrite path via
    the essential form (length 2k+1 for k solid links), so the decision
    is exact at desk scale; the search exits early on a hit."""
    cap = max(len(a), len(b), 2 * a.size + 1, 2 * b.size + 1) + slack
    target = raw(b)
    start = raw(a)
    if start == target:
        return True
    seen = {start}
    frontier = [start]
    while frontier:
        cur = frontier.pop()
        for nxt in stretch_steps(cur) + collapse_steps(cur):
            if len(nxt) > cap or nxt in seen:
                continue
            if nxt == target:
                return True
            seen.add(nxt)
            frontier.append(nxt)
    return False


# ---------------------------------------------------------------------------
# generators


def random_chain(rng: random.Random, max_len: int = 6, alphabet=ALPHABET) -> LinkChain:
    """Uniform-ish valid chain built left to right."""
    channels = list(alphabet)
    while True:
        n = rng.randint(1, max_len)
        links = []
        for _ in range(n):
            prev_t = links[-1][1] if links else None
            if prev_t is None:
                sources = channels + ["tau", "_"]
            elif prev_t == "tau":
                sources = ["tau"]
            elif prev_t == "_":
                sources = channels + ["_"]
            else:
                sources = [prev_t, "_"]
            src = rng.choice(sources)
            if src == "_":
                links.append(("_", "_"))
            else:
                links.append((src, rng.choice(channels + ["tau"])))
        if any(l != V for l in links):
            try:
                return unraw(tuple(links))
            except ChainError:
                continue


def random_label(rng: random.Random, max_blocks: int = 3, max_len: int = 6):
    while True:
        label = normalize(random_chain(rng, max_len))
        if len(label.blocks) <= max_blocks:
            return label


# ---------------------------------------------------------------------------
# reference bisimulation (naive greatest fixpoint)


def naive_bisim(adjacencies: list[dict[str, set[int]]]) -> list[list[bool]]:
    n = len(adjacencies)
    related = [[True] * n for _ in range(n)]

    def simulates(i: int, j: int) -> bool:
        for key, dsts in adjacencies[i].items():
            replies = adjacencies[j].get(key, set())
            for d in dsts:
                if not any(related[d][e] for e in replies):
                    return False
        return True

    changed = True
    while changed:
        changed = False
        for i in range(n):
            for j in range(n):
                if related[i][j] and not (simulates(i, j) and simulates(j, i)):
                    related[i][j] = False
                    changed = True
    return related
