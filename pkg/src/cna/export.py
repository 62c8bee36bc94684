"""Serialization of transition systems: a structured JSON document and
DOT for graph viewers.  Output is deterministic byte for byte."""

from __future__ import annotations

import json

from .chains import Block, Link, NormalLabel, reduce_chain
from .semantics import Bounds, LtsTransition, SymbolicLts

STRUCTURED_VERSION = "1"


def label_to_blocks(label: NormalLabel) -> list[list[dict[str, str]]]:
    return [[{"s": l.source, "t": l.target} for l in b.links] for b in label.blocks]


def blocks_to_label(blocks: list[list[dict[str, str]]]) -> NormalLabel:
    return NormalLabel(
        tuple(Block(tuple(Link(d["s"], d["t"]) for d in block)) for block in blocks)
    )


def export_structured(lts: SymbolicLts) -> dict:
    return {
        "version": STRUCTURED_VERSION,
        "complete": lts.complete,
        "initial": lts.initial,
        "states": [{"id": i, "term": term} for i, term in enumerate(lts.states)],
        "transitions": [
            {
                "src": t.src,
                "dst": t.dst,
                "blocks": label_to_blocks(t.label),
                "essential": str(reduce_chain(t.label)),
            }
            for t in lts.transitions
        ],
    }


def import_structured(doc: dict) -> SymbolicLts:
    """Rebuild a transition system from its structured document.

    Process objects are not serialized; the imported system carries terms
    and transitions only (state ids are preserved)."""
    if doc.get("version") != STRUCTURED_VERSION:
        raise ValueError(f"unsupported document version {doc.get('version')!r}")
    states = tuple(s["term"] for s in sorted(doc["states"], key=lambda s: s["id"]))
    transitions = tuple(
        LtsTransition(t["src"], blocks_to_label(t["blocks"]), t["dst"])
        for t in doc["transitions"]
    )
    return SymbolicLts(
        states=states,
        processes=(),
        transitions=transitions,
        initial=doc["initial"],
        complete=doc["complete"],
        expanded=(),
        bounds=Bounds(),
    )


def to_json_bytes(doc: dict) -> bytes:
    return (json.dumps(doc, indent=2) + "\n").encode("utf-8")


def _dot_escape(text: str) -> str:
    return text.replace("\\", "\\\\").replace('"', '\\"')


def export_dot(lts: SymbolicLts) -> str:
    lines = ["digraph lts {", "  rankdir=LR;"]
    for i, term in enumerate(lts.states):
        shape = "doublecircle" if i == lts.initial else "circle"
        lines.append(
            f'  {i} [label="{i}", shape={shape}, tooltip="{_dot_escape(term)}"];'
        )
    for t in lts.transitions:
        lines.append(
            f'  {t.src} -> {t.dst} [label="{_dot_escape(t.essential)}"];'
        )
    lines.append("}")
    return "\n".join(lines) + "\n"
