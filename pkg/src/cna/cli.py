"""Command line surface.

Exit codes: 0 success; 1 a check ran and came out negative (not
bisimilar, law failures, failed verification); 2 usage or parse errors;
3 undecided because an exploration bound was hit.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import __version__
from .chains import (
    ChainError,
    Renaming,
    format_chain,
    merge_concrete,
    normalize,
    parse_chain,
    reduce_chain,
    rename_chain,
    restrict_concrete,
)
from .equivalence import NETWORK, STRONG, check_bisim, law_harness
from .export import export_dot, export_structured, to_json_bytes
from .process import (
    Call,
    Process,
    Program,
    ProgramError,
    format_process,
    format_program,
    parse_program,
)
from .routing import (
    InfraError,
    basic_equivalent,
    boundary_paths,
    infra_graph,
    infra_to_process,
    parse_infra,
    verify_paths,
)
from .semantics import (
    DEFAULT_MAX_STATES,
    DEFAULT_MAX_UNFOLD,
    DEFAULT_ORACLE_LEN,
    Bounds,
    SymbolicLts,
    UnguardedRecursion,
    build_lts,
    canonical_state,
    sorted_transitions,
)

EXIT_OK = 0
EXIT_NEGATIVE = 1
EXIT_USAGE = 2
EXIT_UNKNOWN = 3


class CliError(Exception):
    def __init__(self, message: str, code: int = EXIT_USAGE):
        super().__init__(message)
        self.code = code


def _read(path: str) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise CliError(f"cannot read {path}: {exc}") from exc


def load_program(path: str) -> Program:
    return parse_program(_read(path))


def resolve_entry(program: Program, name: str | None) -> Process:
    """The process a name denotes: a definition is entered with its own
    formal parameters as free channels; no name means the file's main."""
    if name is None or name == "main":
        if program.main is None:
            raise CliError("program has no main process", EXIT_USAGE)
        return program.main
    if name in program.defs:
        d = program.defs[name]
        return Call(d.name, d.params)
    raise CliError(f"no definition named {name}", EXIT_USAGE)


def _bounds(args: argparse.Namespace) -> Bounds:
    return Bounds(max_states=args.max_states, max_unfold=args.max_unfold)


def _add_bound_flags(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--max-states", type=int, default=DEFAULT_MAX_STATES)
    sub.add_argument("--max-unfold", type=int, default=DEFAULT_MAX_UNFOLD)
    sub.add_argument(
        "--no-normalize",
        action="store_true",
        help="do not compact inert structure between steps (diagnostics)",
    )


# ---------------------------------------------------------------------------
# subcommands


def cmd_parse(args) -> int:
    program = load_program(args.file)
    sys.stdout.write(format_program(program))
    return EXIT_OK


def cmd_chain(args) -> int:
    op = args.op
    if op == "merge":
        if len(args.chains) != 2:
            raise CliError("chain merge takes exactly two chain literals")
        merged = merge_concrete(parse_chain(args.chains[0]), parse_chain(args.chains[1]))
        if merged is None:
            print("undefined")
            return EXIT_NEGATIVE
        print(format_chain(merged))
        return EXIT_OK
    if op == "restrict":
        if len(args.chains) != 2:
            raise CliError("chain restrict takes a channel and a chain literal")
        hidden = restrict_concrete(args.chains[0], parse_chain(args.chains[1]))
        if hidden is None:
            print("undefined")
            return EXIT_NEGATIVE
        print(format_chain(hidden))
        return EXIT_OK
    if op == "rename":
        if len(args.chains) != 2:
            raise CliError('chain rename takes a chain literal and a renaming like "a<->b"')
        pairs = []
        for item in args.chains[1].strip("[]").split(","):
            item = item.strip()
            if "<->" in item:
                a, b = (x.strip() for x in item.split("<->"))
                pairs.extend([(a, b), (b, a)])
            elif "->" in item:
                a, b = (x.strip() for x in item.split("->"))
                pairs.append((a, b))
            else:
                raise CliError(f"bad renaming item {item!r}")
        out = rename_chain(parse_chain(args.chains[0]), Renaming(tuple(pairs)))
        print(format_chain(out))
        return EXIT_OK
    if op == "normalize":
        if len(args.chains) != 1:
            raise CliError("chain normalize takes one chain literal")
        print(str(normalize(parse_chain(args.chains[0]))))
        return EXIT_OK
    if op == "reduce":
        if len(args.chains) != 1:
            raise CliError("chain reduce takes one chain literal")
        print(str(reduce_chain(parse_chain(args.chains[0]))))
        return EXIT_OK
    raise CliError(f"unknown chain operation {op!r}")


def _build(args) -> tuple[Program, SymbolicLts]:
    program = load_program(args.file)
    entry = resolve_entry(program, getattr(args, "entry", None))
    lts = build_lts(entry, program.defs, _bounds(args), not args.no_normalize)
    return program, lts


def cmd_lts(args) -> int:
    _, lts = _build(args)
    if args.format == "dot":
        sys.stdout.write(export_dot(lts))
    else:
        sys.stdout.buffer.write(to_json_bytes(export_structured(lts)))
    return EXIT_OK if lts.complete else EXIT_UNKNOWN


def cmd_step(args) -> int:
    program = load_program(args.file)
    defs = program.defs
    current = canonical_state(resolve_entry(program, args.entry), defs, args.max_unfold)
    history: list[Process] = []
    out = sys.stdout
    while True:
        out.write(f"state: {format_process(current)}\n")
        transitions = sorted_transitions(current, defs, args.max_unfold)
        if not transitions:
            out.write("no transitions\n")
        for i, tr in enumerate(transitions):
            target = canonical_state(tr.target, defs, args.max_unfold)
            out.write(f"  [{i}] {reduce_chain(tr.label)}  ->  {format_process(target)}\n")
        out.write("> ")
        out.flush()
        line = sys.stdin.readline()
        if not line:
            return EXIT_OK
        line = line.strip()
        if line in ("q", "quit", "exit"):
            return EXIT_OK
        if line in ("u", "undo"):
            if history:
                current = history.pop()
            else:
                out.write("nothing to undo\n")
            continue
        if not line.isdigit() or int(line) >= len(transitions):
            out.write("enter a transition index, 'u' to undo or 'q' to quit\n")
            continue
        history.append(current)
        current = canonical_state(transitions[int(line)].target, defs, args.max_unfold)


def cmd_bisim(args) -> int:
    program = load_program(args.file)
    left = resolve_entry(program, args.left)
    right = resolve_entry(program, args.right)
    verdict = check_bisim(
        left, right, program.defs, mode=args.mode, bounds=_bounds(args),
        normalize_states=not args.no_normalize,
    )
    if verdict.bisimilar:
        print("Bisimilar")
        return EXIT_OK
    if verdict.distinguished:
        print("Distinguished")
        for move in verdict.witness:
            print(f"  {move.side} plays {move.label} from pair "
                  f"({move.left_state}, {move.right_state})")
        return EXIT_NEGATIVE
    print(f"Unknown: {verdict.reason}")
    return EXIT_UNKNOWN


def cmd_oracle(args) -> int:
    """Cross-check the class-per-transition step against the literal
    rule-by-rule semantics, on one entry point."""
    from .chains import normalize as normalize_label
    from .process import struct_normalize
    from .semantics import concrete_step_oracle, symbolic_step

    program = load_program(args.file)
    entry = canonical_state(
        resolve_entry(program, args.entry), program.defs, args.max_unfold
    )
    symbolic = {
        (t.label, format_process(t.target))
        for t in symbolic_step(entry, program.defs, args.max_unfold)
        if t.label.min_concrete_length() <= args.oracle_len
    }
    concrete = {
        (normalize_label(chain), format_process(struct_normalize(target)))
        for chain, target in concrete_step_oracle(
            entry, program.defs, args.oracle_len, args.max_unfold
        )
    }
    print(f"symbolic transition classes (witness length <= {args.oracle_len}): "
          f"{len(symbolic)}")
    print(f"concrete transition classes (length <= {args.oracle_len}): {len(concrete)}")
    if symbolic == concrete:
        print("agreement: yes")
        return EXIT_OK
    print("agreement: NO")
    for lab, target in sorted(symbolic - concrete, key=lambda x: str(x[0])):
        print(f"  symbolic only: {lab}  ->  {target}")
    for lab, target in sorted(concrete - symbolic, key=lambda x: str(x[0])):
        print(f"  concrete only: {lab}  ->  {target}")
    return EXIT_NEGATIVE


def cmd_laws(args) -> int:
    defs = load_program(args.file).defs if args.file else {}
    report = law_harness(defs, seed=args.seed, samples=args.samples,
                         bounds=Bounds(max_states=args.max_states))
    if args.json:
        sys.stdout.buffer.write(to_json_bytes(report.to_doc()))
    else:
        print(report.render_text())
    return EXIT_OK if report.ok else EXIT_NEGATIVE


def cmd_infra(args) -> int:
    infras = parse_infra(_read(args.file))
    name = args.name or next(reversed(list(infras)))
    if name not in infras:
        raise CliError(f"no infrastructure named {name}")
    infra = infras[name]
    if args.op == "graph":
        graph = infra_graph(infra)
        print("digraph infra {")
        for node in sorted(graph.nodes):
            print(f'  "{node}";')
        for src, dst in sorted(graph.arcs):
            print(f'  "{src}" -> "{dst}";')
        print("}")
        return EXIT_OK
    if args.op == "paths":
        for a, b, n in boundary_paths(infra):
            print(f"{a} -> {b}  (length {n})")
        return EXIT_OK
    if args.op == "process":
        proc, defs = infra_to_process(infra)
        sys.stdout.write(format_program(Program(defs, proc)))
        return EXIT_OK
    if args.op == "basic-equivalent":
        proc, defs = basic_equivalent(infra)
        sys.stdout.write(format_program(Program(defs, proc)))
        return EXIT_OK
    if args.op == "verify":
        report = verify_paths(infra, _bounds(args))
        if args.json:
            sys.stdout.buffer.write(to_json_bytes(report.to_doc()))
        else:
            print(f"verification of {name}:")
            print(report.render_text())
        if report.ok:
            return EXIT_OK
        return EXIT_UNKNOWN if report.unknown else EXIT_NEGATIVE
    raise CliError(f"unknown infra operation {args.op!r}")


def cmd_serve(args) -> int:
    from .service import serve_forever

    serve_forever(port=args.port, root=args.root)
    return EXIT_OK


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cna",
        description="workbench for link-chain processes: parse, explore, compare",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("parse", help="validate a program and print its canonical form")
    p.add_argument("file")
    p.set_defaults(func=cmd_parse)

    p = sub.add_parser("chain", help="operate on chain literals")
    p.add_argument("op", choices=["merge", "restrict", "rename", "normalize", "reduce"])
    p.add_argument("chains", nargs="+")
    p.set_defaults(func=cmd_chain)

    p = sub.add_parser("lts", help="build and export the reachable transition system")
    p.add_argument("file")
    p.add_argument("entry", nargs="?", default=None)
    p.add_argument("--format", choices=["structured", "dot"], default="structured")
    _add_bound_flags(p)
    p.set_defaults(func=cmd_lts)

    p = sub.add_parser("step", help="step a process interactively in the terminal")
    p.add_argument("file")
    p.add_argument("entry", nargs="?", default=None)
    p.add_argument("--max-unfold", type=int, default=DEFAULT_MAX_UNFOLD)
    p.set_defaults(func=cmd_step)

    p = sub.add_parser(
        "oracle",
        help="cross-check one step of the symbolic semantics against the "
        "exhaustive concrete one",
    )
    p.add_argument("file")
    p.add_argument("entry", nargs="?", default=None)
    p.add_argument("--oracle-len", type=int, default=DEFAULT_ORACLE_LEN)
    p.add_argument("--max-unfold", type=int, default=DEFAULT_MAX_UNFOLD)
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("bisim", help="decide bisimilarity of two entry points")
    p.add_argument("file")
    p.add_argument("left")
    p.add_argument("right")
    p.add_argument("--mode", choices=[NETWORK, STRONG], default=NETWORK)
    _add_bound_flags(p)
    p.set_defaults(func=cmd_bisim)

    p = sub.add_parser("laws", help="run the algebraic law harness")
    p.add_argument("file", nargs="?", default=None)
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--samples", type=int, default=100)
    p.add_argument("--max-states", type=int, default=2000)
    p.add_argument("--json", action="store_true", help="machine-readable report")
    p.set_defaults(func=cmd_laws)

    p = sub.add_parser("infra", help="analyse routing infrastructures")
    p.add_argument("op", choices=["graph", "paths", "process", "basic-equivalent", "verify"])
    p.add_argument("file")
    p.add_argument("--name", default=None)
    p.add_argument("--json", action="store_true", help="machine-readable report")
    _add_bound_flags(p)
    p.set_defaults(func=cmd_infra)

    p = sub.add_parser("serve", help="serve the stepping API (loopback only)")
    p.add_argument("--port", type=int, default=7401)
    p.add_argument("root", nargs="?", default=None,
                   help="directory of static files and example programs")
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = make_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else EXIT_OK
    try:
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except (ProgramError, ChainError, InfraError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except UnguardedRecursion as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except BrokenPipeError:
        return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
