"""Recursive-descent parsers for the formula DSL and the text formats built on it.

Operator precedence, tightest first: ``!``, ``&``, ``|``, ``->``, ``<->``.
``->`` and ``<->`` associate to the right.  A quantifier body extends as far
right as possible.  ``#`` followed by a digit is a domain constant, otherwise
it starts a comment running to the end of the line.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable

from .errors import ParseError
from .logic import (And, Atom, Const, Eq, Exists, Forall, Formula, Iff, Implies, Not, Or,
                    Predicate, Term, Var, Vocabulary)
from .structures import EsoSentence, Evidence, Structure

__all__ = ["Token", "tokenize", "parse_formula", "parse_eso", "parse_structure",
           "parse_evidence", "parse_fraction", "TokenStream"]

_TOKEN_RE = re.compile(r"""
    (?P<ws>[ \t\r]+)
  | (?P<nl>\n)
  | (?P<const>\#\d+)
  | (?P<comment>\#[^\n]*)
  | (?P<number>\d+(?:\.\d+)?)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<op><->|<=>|->|[()!&|,:;./=*])
""", re.VERBOSE)

QUANTIFIERS = {"forall", "exists"}


@dataclass(frozen=True)
class Token:
    kind: str   # ident, const, number, op, eof
    text: str
    line: int
    col: int


def tokenize(text: str) -> list[Token]:
    tokens: list[Token] = []
    line, line_start, pos = 1, 0, 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", line, pos - line_start + 1)
        kind = m.lastgroup
        if kind == "nl":
            line += 1
            line_start = m.end()
        elif kind not in ("ws", "comment"):
            tokens.append(Token(kind, m.group(), line, m.start() - line_start + 1))
        pos = m.end()
    tokens.append(Token("eof", "", line, pos - line_start + 1))
    return tokens


class TokenStream:
    def __init__(self, tokens: list[Token]):
        self.tokens = tokens
        self.pos = 0

    @property
    def peek(self) -> Token:
        return self.tokens[self.pos]

    def peek_at(self, k: int) -> Token:
        return self.tokens[min(self.pos + k, len(self.tokens) - 1)]

    def next(self) -> Token:
        tok = self.tokens[self.pos]
        if tok.kind != "eof":
            self.pos += 1
        return tok

    def at(self, text: str) -> bool:
        tok = self.peek
        return tok.kind in ("op", "ident") and tok.text == text

    def accept(self, text: str) -> bool:
        if self.at(text):
            self.next()
            return True
        return False

    def expect(self, text: str) -> Token:
        if not self.at(text):
            self.fail(f"expected {text!r}")
        return self.next()

    def expect_kind(self, kind: str, what: str) -> Token:
        if self.peek.kind != kind:
            self.fail(f"expected {what}")
        return self.next()

    def fail(self, message: str, tok: Token | None = None):
        tok = tok or self.peek
        found = "end of input" if tok.kind == "eof" else repr(tok.text)
        raise ParseError(f"{message}, found {found}", tok.line, tok.col)


class FormulaParser:
    def __init__(self, stream: TokenStream, vocabulary: Vocabulary,
                 stop: Iterable[str] = ()):
        self.s = stream
        self.vocab = vocabulary
        self.stop = set(stop)

    def parse(self) -> Formula:
        return self.iff()

    def iff(self) -> Formula:
        left = self.implies()
        if self.s.at("<->") or self.s.at("<=>"):
            self.s.next()
            return Iff(left, self.iff())
        return left

    def implies(self) -> Formula:
        left = self.disjunction()
        if self.s.accept("->"):
            return Implies(left, self.implies())
        return left

    def disjunction(self) -> Formula:
        items = [self.conjunction()]
        while self.s.accept("|"):
            items.append(self.conjunction())
        return items[0] if len(items) == 1 else Or(tuple(items))

    def conjunction(self) -> Formula:
        items = [self.unary()]
        while self.s.accept("&"):
            items.append(self.unary())
        return items[0] if len(items) == 1 else And(tuple(items))

    def unary(self) -> Formula:
        if self.s.accept("!"):
            return Not(self.unary())
        tok = self.s.peek
        if tok.kind == "ident" and tok.text in QUANTIFIERS:
            self.s.next()
            variables = [self._variable()]
            while self.s.accept(","):
                variables.append(self._variable())
            self.s.expect(":")
            body = self.iff()
            cls = Forall if tok.text == "forall" else Exists
            for v in reversed(variables):
                body = cls(v, body)
            return body
        return self.primary()

    def _variable(self) -> str:
        tok = self.s.expect_kind("ident", "variable name")
        if tok.text in QUANTIFIERS:
            self.s.fail("expected variable name", tok)
        return tok.text

    def _term(self) -> Term:
        tok = self.s.peek
        if tok.kind == "const":
            self.s.next()
            return Const(int(tok.text[1:]))
        if tok.kind == "ident" and tok.text not in QUANTIFIERS:
            self.s.next()
            return Var(tok.text)
        self.s.fail("expected term")

    def primary(self) -> Formula:
        tok = self.s.peek
        if self.s.accept("("):
            f = self.iff()
            self.s.expect(")")
            return f
        nxt = self.s.peek_at(1)
        if tok.kind == "const" or (tok.kind == "ident" and nxt.kind == "op" and nxt.text == "="):
            left = self._term()
            self.s.expect("=")
            return Eq(left, self._term())
        if tok.kind != "ident" or tok.text in QUANTIFIERS:
            self.s.fail("expected formula")
        self.s.next()
        pred = self.vocab.get(tok.text)
        if pred is None:
            raise ParseError(f"unknown predicate {tok.text!r}", tok.line, tok.col)
        args: list[Term] = []
        if self.s.accept("("):
            if not self.s.at(")"):
                args.append(self._term())
                while self.s.accept(","):
                    args.append(self._term())
            self.s.expect(")")
        if len(args) != pred.arity:
            raise ParseError(f"predicate {pred.name} has arity {pred.arity}, "
                             f"used with {len(args)} arguments", tok.line, tok.col)
        return Atom(pred.name, tuple(args))


def parse_formula(text: str, vocabulary: Vocabulary) -> Formula:
    """Parse a whole string as one formula over ``vocabulary``."""
    s = TokenStream(tokenize(text))
    f = FormulaParser(s, vocabulary).parse()
    if s.peek.kind != "eof":
        s.fail("unexpected trailing input")
    return f


def parse_fraction(s: TokenStream) -> Fraction:
    tok = s.expect_kind("number", "probability")
    value = Fraction(tok.text)
    if s.accept("/"):
        den = s.expect_kind("number", "denominator")
        if "." in den.text or "." in tok.text:
            s.fail("fraction parts must be integers", den)
        if int(den.text) == 0:
            raise ParseError("zero denominator", den.line, den.col)
        value = Fraction(int(tok.text), int(den.text))
    return value


def parse_predicate_decl(s: TokenStream) -> tuple[Predicate, Token]:
    name = s.expect_kind("ident", "predicate name")
    s.expect("/")
    arity = s.expect_kind("number", "arity")
    if "." in arity.text:
        s.fail("arity must be an integer", arity)
    return Predicate(name.text, int(arity.text)), name


def parse_vocabulary_list(s: TokenStream) -> list[tuple[Predicate, Token]]:
    out = [parse_predicate_decl(s)]
    while s.accept(","):
        out.append(parse_predicate_decl(s))
    return out


def parse_eso(text: str) -> tuple[Vocabulary, EsoSentence]:
    """Read ``vocabulary e/2.`` followed by ``exists r/1, ...: <matrix>.``."""
    s = TokenStream(tokenize(text))
    inputs: list[Predicate] = []
    if s.accept("vocabulary"):
        inputs = [p for p, _ in parse_vocabulary_list(s)]
        s.expect(".")
    s.expect("exists")
    quantified = [p for p, _ in parse_vocabulary_list(s)]
    tok = s.expect(":")
    clash = {p.name for p in inputs} & {p.name for p in quantified}
    if clash:
        raise ParseError(f"quantified predicates also in the input vocabulary: {sorted(clash)}",
                         tok.line, tok.col)
    try:
        vocab = Vocabulary(inputs + quantified)
    except ValueError as exc:
        raise ParseError(str(exc), tok.line, tok.col) from None
    matrix = FormulaParser(s, vocab).parse()
    s.accept(".")
    if s.peek.kind != "eof":
        s.fail("unexpected trailing input")
    try:
        return Vocabulary(inputs), EsoSentence(tuple(quantified), matrix)
    except ValueError as exc:
        raise ParseError(str(exc)) from None


def _ground_lines(text: str, vocabulary: Vocabulary, need_domain: bool):
    s = TokenStream(tokenize(text))
    n = None
    if s.accept("domain"):
        tok = s.expect_kind("number", "domain size")
        n = int(tok.text)
        if n < 1:
            raise ParseError("domain size must be at least 1", tok.line, tok.col)
        s.expect(";")
    elif need_domain:
        s.fail("expected 'domain N;'")
    values: dict[tuple[str, tuple[int, ...]], bool] = {}
    while s.peek.kind != "eof":
        name = s.expect_kind("ident", "predicate name")
        pred = vocabulary.get(name.text)
        if pred is None:
            raise ParseError(f"unknown predicate {name.text!r}", name.line, name.col)
        args: list[int] = []
        if s.accept("("):
            while not s.at(")"):
                tok = s.next()
                if tok.kind == "number" and "." not in tok.text:
                    args.append(int(tok.text))
                elif tok.kind == "const":
                    args.append(int(tok.text[1:]))
                else:
                    s.fail("expected domain element", tok)
                if not s.accept(","):
                    break
            s.expect(")")
        if len(args) != pred.arity:
            raise ParseError(f"{pred.name} has arity {pred.arity}", name.line, name.col)
        if n is not None and any(a >= n for a in args):
            raise ParseError("element outside the domain", name.line, name.col)
        s.expect("=")
        val = s.expect_kind("ident", "true or false")
        if val.text not in ("true", "false"):
            s.fail("expected true or false", val)
        key = (pred.name, tuple(args))
        if key in values and values[key] != (val.text == "true"):
            raise ParseError(f"conflicting values for {pred.name}{tuple(args)}", name.line, name.col)
        values[key] = val.text == "true"
        s.expect(";")
    return n, values


def parse_structure(text: str, vocabulary: Vocabulary) -> Structure:
    """``domain N;`` then ``p(i,j) = true|false;`` lines; unlisted groundings are false."""
    n, values = _ground_lines(text, vocabulary, need_domain=True)
    rels: dict[str, set] = {p.name: set() for p in vocabulary}
    for (name, args), v in values.items():
        if v:
            rels[name].add(args)
    return Structure(n, vocabulary, rels)


def parse_evidence(text: str, vocabulary: Vocabulary,
                   n: int | None = None) -> tuple[int | None, Evidence]:
    """Same format as structures, but unlisted groundings stay unassigned.

    The ``domain`` line is optional here; when both it and ``n`` are given they
    must agree.
    """
    declared, values = _ground_lines(text, vocabulary, need_domain=False)
    if declared is not None and n is not None and declared != n:
        raise ParseError(f"file declares domain {declared}, expected {n}")
    size = declared if declared is not None else n
    if size is not None:
        for (_, args) in values:
            if any(a >= size for a in args):
                raise ParseError(f"element outside the domain of size {size}")
    return size, Evidence(values)


def format_ground_lines(n: int | None, values: dict, vocabulary: Vocabulary) -> str:
    out = [] if n is None else [f"domain {n};"]
    order = {name: i for i, name in enumerate(vocabulary.names)}
    for (name, args), v in sorted(values.items(), key=lambda kv: (order[kv[0][0]], kv[0][1])):
        atom = name if not args else f"{name}({','.join(map(str, args))})"
        out.append(f"{atom} = {'true' if v else 'false'};")
    return "\n".join(out) + "\n"
