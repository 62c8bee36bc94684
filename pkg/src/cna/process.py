"""Process terms: abstract syntax, the ``.cna`` grammar, canonical
printing, free names, capture-avoiding substitution and spine
normalization.

Grammar (``//`` comments, whitespace insignificant)::

    program  := (def | main)*
    def      := IDENT params? ":=" proc
    main     := "main" ":=" proc
    params   := "(" IDENT ("," IDENT)* ")"
    proc     := sum
    sum      := par ("+" par)*
    par      := unary ("|" unary)*
    unary    := chainlit ("." unary)?
              | "new" IDENT ("," IDENT)* "in" unary
              | atom renames*
    atom     := "0" | IDENT args? | "(" proc ")"
    args     := "(" IDENT ("," IDENT)* ")"
    renames  := "[" renitem ("," renitem)* "]"
    renitem  := IDENT "<->" IDENT | IDENT "->" IDENT
    chainlit := link (";" link)*          -- must denote an essential label

A trailing ``. 0`` may be omitted after a prefix.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass, field
from typing import Optional

from .chains import (
    TAU,
    VIRTUAL,
    ChainError,
    EssentialLabel,
    InvalidRenaming,
    Link,
    Renaming,
    check_site,
    is_channel,
    subst_chain,
)


class ProgramError(ValueError):
    """Base class for program-level validation failures."""

    def __init__(self, message: str, line: int | None = None, col: int | None = None):
        self.line = line
        self.col = col
        if line is not None:
            message = f"{line}:{col}: {message}"
        super().__init__(message)


class ParseError(ProgramError):
    pass


class ArityError(ProgramError):
    pass


class UndefinedConstant(ProgramError):
    pass


class NonEssentialPrefix(ProgramError):
    pass


class UnboundChannel(ProgramError):
    pass


# ---------------------------------------------------------------------------
# abstract syntax


class Process:
    __slots__ = ()


@dataclass(frozen=True)
class Nil(Process):
    def __str__(self) -> str:
        return format_process(self)


@dataclass(frozen=True)
class Prefix(Process):
    label: EssentialLabel
    cont: Process

    def __str__(self) -> str:
        return format_process(self)


@dataclass(frozen=True)
class Sum(Process):
    left: Process
    right: Process

    def __str__(self) -> str:
        return format_process(self)


@dataclass(frozen=True)
class Par(Process):
    left: Process
    right: Process

    def __str__(self) -> str:
        return format_process(self)


@dataclass(frozen=True)
class Restrict(Process):
    chan: str
    body: Process

    def __str__(self) -> str:
        return format_process(self)


@dataclass(frozen=True)
class Rename(Process):
    body: Process
    phi: Renaming

    def __str__(self) -> str:
        return format_process(self)


@dataclass(frozen=True)
class Call(Process):
    name: str
    args: tuple[str, ...] = ()

    def __str__(self) -> str:
        return format_process(self)


NIL = Nil()


@dataclass(frozen=True)
class Definition:
    name: str
    params: tuple[str, ...]
    body: Process


@dataclass(frozen=True)
class Program:
    defs: dict[str, Definition] = field(default_factory=dict)
    main: Optional[Process] = None


Definitions = dict[str, Definition]


def sum_of(terms: list[Process]) -> Process:
    """Left-associated sum; the empty sum is 0."""
    if not terms:
        return NIL
    out = terms[0]
    for t in terms[1:]:
        out = Sum(out, t)
    return out


def par_of(terms: list[Process]) -> Process:
    if not terms:
        return NIL
    out = terms[0]
    for t in terms[1:]:
        out = Par(out, t)
    return out


# ---------------------------------------------------------------------------
# free names, fresh names, substitution


def free_names(p: Process) -> frozenset[str]:
    if isinstance(p, Nil):
        return frozenset()
    if isinstance(p, Prefix):
        return frozenset(p.label.channels()) | free_names(p.cont)
    if isinstance(p, (Sum, Par)):
        return free_names(p.left) | free_names(p.right)
    if isinstance(p, Restrict):
        return free_names(p.body) - {p.chan}
    if isinstance(p, Rename):
        return frozenset(p.phi.apply(x) for x in free_names(p.body))
    if isinstance(p, Call):
        return frozenset(p.args)
    raise TypeError(f"not a process: {p!r}")


def fresh_channel(base: str, avoid: set[str] | frozenset[str]) -> str:
    base = base.rstrip("0123456789") or "n"
    for i in itertools.count():
        cand = f"{base}{i}"
        if cand not in avoid and cand not in (TAU, VIRTUAL):
            return cand
    raise AssertionError("unreachable")


def subst_process(p: Process, new: str, old: str) -> Process:
    """Capture-avoiding substitution of channel ``old`` by ``new``."""
    if new == old:
        return p
    if isinstance(p, Nil):
        return p
    if isinstance(p, Prefix):
        return Prefix(subst_chain(p.label, new, old), subst_process(p.cont, new, old))
    if isinstance(p, Sum):
        return Sum(subst_process(p.left, new, old), subst_process(p.right, new, old))
    if isinstance(p, Par):
        return Par(subst_process(p.left, new, old), subst_process(p.right, new, old))
    if isinstance(p, Restrict):
        if p.chan == old:
            return p  # occurrences below are bound
        if p.chan == new and old in free_names(p.body):
            avoid = set(free_names(p.body)) | {new, old}
            d = fresh_channel(p.chan, avoid)
            body = subst_process(subst_process(p.body, d, p.chan), new, old)
            return Restrict(d, body)
        return Restrict(p.chan, subst_process(p.body, new, old))
    if isinstance(p, Rename):
        return Rename(
            subst_process(p.body, p.phi.inverse_apply(new), p.phi.inverse_apply(old)),
            p.phi,
        )
    if isinstance(p, Call):
        return Call(p.name, tuple(new if a == old else a for a in p.args))
    raise TypeError(f"not a process: {p!r}")


def subst_parallel(p: Process, mapping: dict[str, str]) -> Process:
    """Simultaneous substitution, e.g. instantiating formals by actuals.

    Routed through fresh temporaries so swaps do not interfere.
    """
    mapping = {k: v for k, v in mapping.items() if k != v}
    if not mapping:
        return p
    avoid = set(free_names(p)) | set(mapping) | set(mapping.values())
    temps = {}
    for key in mapping:
        t = fresh_channel("tmp", avoid)
        avoid.add(t)
        temps[key] = t
    for key, t in temps.items():
        p = subst_process(p, t, key)
    for key, t in temps.items():
        p = subst_process(p, mapping[key], t)
    return p


# ---------------------------------------------------------------------------
# spine normalization


def struct_normalize(p: Process) -> Process:
    """Remove inert structure along the spine: dead zeros under ``|``,
    renamings and restrictions of 0, and restrictions of absent channels.
    Never rewrites under a prefix; the result is bisimilar to the input.
    """
    if isinstance(p, Sum):
        return Sum(struct_normalize(p.left), struct_normalize(p.right))
    if isinstance(p, Par):
        left = struct_normalize(p.left)
        right = struct_normalize(p.right)
        if isinstance(left, Nil):
            return right
        if isinstance(right, Nil):
            return left
        return Par(left, right)
    if isinstance(p, Restrict):
        body = struct_normalize(p.body)
        if isinstance(body, Nil):
            return NIL
        if p.chan not in free_names(body):
            return body
        return Restrict(p.chan, body)
    if isinstance(p, Rename):
        body = struct_normalize(p.body)
        if isinstance(body, Nil):
            return NIL
        if p.phi.is_identity:
            return body
        return Rename(body, p.phi)
    return p


# ---------------------------------------------------------------------------
# canonical printing


_SUM, _PAR, _UNARY, _ATOM = range(4)


def format_renaming(phi: Renaming) -> str:
    items = []
    for cycle in phi.cycles():
        if len(cycle) == 2:
            items.append(f"{cycle[0]}<->{cycle[1]}")
        else:
            steps = list(cycle) + [cycle[0]]
            items.extend(f"{a}->{b}" for a, b in zip(steps, steps[1:]))
    return "[" + ", ".join(items) + "]"


def format_process(p: Process) -> str:
    """Canonical text: binders are renumbered ``n0, n1, ...`` left to
    right, so alpha-equivalent terms print identically."""
    avoid = free_names(p)
    counter = itertools.count()

    def fresh() -> str:
        while True:
            cand = f"n{next(counter)}"
            if cand not in avoid:
                return cand

    def chan(x: str, env: dict[str, str]) -> str:
        return env.get(x, x)

    def pp(p: Process, level: int, env: dict[str, str]) -> str:
        if isinstance(p, Nil):
            return "0"
        if isinstance(p, Call):
            if p.args:
                return f"{p.name}({', '.join(chan(a, env) for a in p.args)})"
            return p.name
        if isinstance(p, Prefix):
            lab = " ; ".join(
                f"{chan(l.source, env) if is_channel(l.source) else l.source}"
                f"\\{chan(l.target, env) if is_channel(l.target) else l.target}"
                for l in p.label.to_chain().links
            )
            body = f"{lab} . {pp(p.cont, _UNARY, env)}"
            return f"({body})" if level > _UNARY else body
        if isinstance(p, Sum):
            body = f"{pp(p.left, _SUM, env)} + {pp(p.right, _PAR, env)}"
            return f"({body})" if level > _SUM else body
        if isinstance(p, Par):
            body = f"{pp(p.left, _PAR, env)} | {pp(p.right, _UNARY, env)}"
            return f"({body})" if level > _PAR else body
        if isinstance(p, Restrict):
            binders = []
            cur: Process = p
            env2 = dict(env)
            while isinstance(cur, Restrict):
                name = fresh()
                env2[cur.chan] = name
                binders.append(name)
                cur = cur.body
            body = f"new {', '.join(binders)} in {pp(cur, _UNARY, env2)}"
            return f"({body})" if level > _UNARY else body
        if isinstance(p, Rename):
            if p.phi.is_identity:
                return pp(p.body, level, env)
            phi = Renaming(tuple((chan(a, env), chan(b, env)) for a, b in p.phi.pairs))
            return f"{pp(p.body, _ATOM, env)}{format_renaming(phi)}"
        raise TypeError(f"not a process: {p!r}")

    return pp(p, _SUM, {})


def alpha_equivalent(p: Process, q: Process) -> bool:
    return format_process(p) == format_process(q)


# ---------------------------------------------------------------------------
# tokenizer


_TOKEN_RE = re.compile(
    r"""
    (?P<ws>[ \t\r]+)
  | (?P<comment>//[^\n]*)
  | (?P<nl>\n)
  | (?P<assign>:=)
  | (?P<swap><->)
  | (?P<arrow>->)
  | (?P<ident>[a-zA-Z][a-zA-Z0-9_]*)
  | (?P<punct>[\\;.+|(),\[\]_])
  | (?P<zero>0)
    """,
    re.VERBOSE,
)

_KEYWORDS = {"new", "in", "main"}


@dataclass(frozen=True)
class _Token:
    kind: str  # 'ident', 'zero', or the literal punctuation/keyword
    value: str
    line: int
    col: int


def _tokenize(text: str) -> list[_Token]:
    tokens = []
    line, col = 1, 1
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if not m:
            raise ParseError(f"unexpected character {text[pos]!r}", line, col)
        kind = m.lastgroup
        value = m.group()
        if kind == "nl":
            line += 1
            col = 1
        elif kind in ("ws", "comment"):
            col += len(value)
        else:
            if kind == "ident":
                tok_kind = value if value in _KEYWORDS else "ident"
            else:  # assign, swap, arrow, punct and zero carry their spelling
                tok_kind = value
            tokens.append(_Token(tok_kind, value, line, col))
            col += len(value)
        pos = m.end()
    tokens.append(_Token("eof", "", line, col))
    return tokens


# ---------------------------------------------------------------------------
# parser


class _Parser:
    def __init__(self, text: str):
        self.tokens = _tokenize(text)
        self.pos = 0

    @property
    def cur(self) -> _Token:
        return self.tokens[self.pos]

    def peek(self, ahead: int = 1) -> _Token:
        return self.tokens[min(self.pos + ahead, len(self.tokens) - 1)]

    def advance(self) -> _Token:
        tok = self.cur
        self.pos += 1
        return tok

    def expect(self, kind: str) -> _Token:
        if self.cur.kind != kind:
            raise ParseError(
                f"expected {kind!r}, found {self.cur.value or 'end of input'!r}",
                self.cur.line,
                self.cur.col,
            )
        return self.advance()

    def fail(self, message: str):
        raise ParseError(message, self.cur.line, self.cur.col)

    # program level -----------------------------------------------------

    def parse_program(self) -> Program:
        defs: dict[str, Definition] = {}
        main: Optional[Process] = None
        while self.cur.kind != "eof":
            if self.cur.kind == "main":
                tok = self.advance()
                self.expect(":=")
                if main is not None:
                    raise ParseError("duplicate main", tok.line, tok.col)
                main = self.parse_proc()
            elif self.cur.kind == "ident":
                tok = self.advance()
                params: tuple[str, ...] = ()
                if self.cur.kind == "(":
                    params = tuple(self.parse_name_list())
                self.expect(":=")
                body = self.parse_proc()
                if tok.value in defs:
                    raise ParseError(f"duplicate definition {tok.value}", tok.line, tok.col)
                if len(set(params)) != len(params):
                    raise ParseError(
                        f"repeated parameter in definition {tok.value}", tok.line, tok.col
                    )
                defs[tok.value] = Definition(tok.value, params, body)
            else:
                self.fail(f"expected a definition or main, found {self.cur.value!r}")
        return Program(defs, main)

    def parse_name_list(self) -> list[str]:
        self.expect("(")
        names = [self.parse_channel()]
        while self.cur.kind == ",":
            self.advance()
            names.append(self.parse_channel())
        self.expect(")")
        return names

    def parse_channel(self) -> str:
        tok = self.expect("ident")
        if tok.value == TAU:
            raise ParseError("tau is not a channel", tok.line, tok.col)
        return tok.value

    # process level ------------------------------------------------------

    def parse_proc(self) -> Process:
        return self.parse_sum()

    def parse_sum(self) -> Process:
        out = self.parse_par()
        while self.cur.kind == "+":
            self.advance()
            out = Sum(out, self.parse_par())
        return out

    def parse_par(self) -> Process:
        out = self.parse_unary()
        while self.cur.kind == "|":
            self.advance()
            out = Par(out, self.parse_unary())
        return out

    def _at_chainlit(self) -> bool:
        return self.cur.kind in ("ident", "_") and self.peek().kind == "\\"

    def parse_unary(self) -> Process:
        if self._at_chainlit():
            tok = self.cur
            label = self.parse_prefix_label(tok)
            if self.cur.kind == ".":
                self.advance()
                return Prefix(label, self.parse_unary())
            return Prefix(label, NIL)
        if self.cur.kind == "new":
            self.advance()
            names = [self.parse_channel()]
            while self.cur.kind == ",":
                self.advance()
                names.append(self.parse_channel())
            self.expect("in")
            body = self.parse_unary()
            for name in reversed(names):
                body = Restrict(name, body)
            return body
        return self.parse_postfix()

    def parse_prefix_label(self, start: _Token) -> EssentialLabel:
        links = [self.parse_link()]
        while self.cur.kind == ";":
            self.advance()
            links.append(self.parse_link())
        solid = [l for l in links if l is not None]
        # essential shape: solid extremes, exactly one virtual between solids
        expected: list[Optional[Link]] = []
        for i, l in enumerate(solid):
            if i > 0:
                expected.append(None)
            expected.append(l)
        if links != expected:
            raise NonEssentialPrefix(
                "prefix labels must alternate solid links with single virtual links",
                start.line,
                start.col,
            )
        try:
            return EssentialLabel(tuple(solid))
        except ChainError as exc:
            raise NonEssentialPrefix(str(exc), start.line, start.col) from exc

    def parse_link(self) -> Optional[Link]:
        """One ``site\\site``; None stands for a virtual link."""
        src = self.parse_site()
        self.expect("\\")
        tgt = self.parse_site()
        if (src == VIRTUAL) != (tgt == VIRTUAL):
            self.fail("a link is either solid or virtual")
        if src == VIRTUAL:
            return None
        return Link(src, tgt)

    def parse_site(self) -> str:
        if self.cur.kind == "_":
            self.advance()
            return VIRTUAL
        tok = self.expect("ident")
        return check_site(tok.value)

    def parse_postfix(self) -> Process:
        out = self.parse_atom()
        while self.cur.kind == "[":
            tok = self.cur
            out_phi = self.parse_renaming(tok)
            out = Rename(out, out_phi) if not out_phi.is_identity else out
        return out

    def parse_renaming(self, start: _Token) -> Renaming:
        self.expect("[")
        pairs: list[tuple[str, str]] = []
        while True:
            a = self.parse_channel()
            if self.cur.kind == "<->":
                self.advance()
                b = self.parse_channel()
                pairs.extend([(a, b), (b, a)])
            else:
                self.expect("->")
                b = self.parse_channel()
                pairs.append((a, b))
            if self.cur.kind != ",":
                break
            self.advance()
        self.expect("]")
        # InvalidRenaming propagates as itself (it is a validation error,
        # not a syntax error); the token position goes into the message
        try:
            return Renaming(tuple(pairs))
        except InvalidRenaming as exc:
            raise InvalidRenaming(f"{start.line}:{start.col}: {exc}") from None

    def parse_atom(self) -> Process:
        if self.cur.kind == "0":
            self.advance()
            return NIL
        if self.cur.kind == "(":
            self.advance()
            inner = self.parse_proc()
            self.expect(")")
            return inner
        if self.cur.kind == "ident":
            tok = self.advance()
            if tok.value == TAU:
                raise ParseError("tau is not a process", tok.line, tok.col)
            args: tuple[str, ...] = ()
            if self.cur.kind == "(":
                args = tuple(self.parse_name_list())
            return Call(tok.value, args)
        self.fail(f"expected a process, found {self.cur.value or 'end of input'!r}")
        raise AssertionError("unreachable")


def _validate_calls(p: Process, defs: Definitions) -> None:
    if isinstance(p, Call):
        if p.name not in defs:
            raise UndefinedConstant(f"undefined constant {p.name}")
        want = len(defs[p.name].params)
        if len(p.args) != want:
            raise ArityError(f"{p.name} expects {want} argument(s), got {len(p.args)}")
    elif isinstance(p, Prefix):
        _validate_calls(p.cont, defs)
    elif isinstance(p, (Sum, Par)):
        _validate_calls(p.left, defs)
        _validate_calls(p.right, defs)
    elif isinstance(p, (Restrict, Rename)):
        _validate_calls(p.body, defs)


def parse_program(text: str) -> Program:
    """Parse and validate a ``.cna`` program."""
    program = _Parser(text).parse_program()
    for d in program.defs.values():
        _validate_calls(d.body, program.defs)
        extra = free_names(d.body) - set(d.params)
        if extra:
            raise UnboundChannel(
                f"definition {d.name} uses channels outside its parameters: "
                f"{', '.join(sorted(extra))}"
            )
    if program.main is not None:
        _validate_calls(program.main, program.defs)
    return program


def parse_process(text: str, defs: Definitions | None = None) -> Process:
    """Parse a single process term (validated against ``defs`` if given)."""
    parser = _Parser(text)
    p = parser.parse_proc()
    if parser.cur.kind != "eof":
        parser.fail(f"trailing input {parser.cur.value!r}")
    if defs is not None:
        _validate_calls(p, defs)
    return p


def format_program(program: Program) -> str:
    lines = []
    for d in program.defs.values():
        params = f"({', '.join(d.params)})" if d.params else ""
        lines.append(f"{d.name}{params} := {format_process(d.body)}")
    if program.main is not None:
        lines.append(f"main := {format_process(program.main)}")
    return "\n".join(lines) + "\n"
