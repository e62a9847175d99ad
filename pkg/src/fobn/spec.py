"""First-order Bayesian network specifications: data model, DSL, validation.

A specification declares root predicates, each with one probability shared by
all of its groundings, and defined predicates given by an iff-definition over
earlier predicates.  File syntax::

    vocabulary fan/1, other/2.          # optional: the input predicates
    root fan/1 = 1/5.
    root other/2 = 0.1.
    define friends(x, y) <=> x = y | (fan(x) & fan(y)) | other(x, y).
    query conditioned friends; conditioning fan.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable

import networkx as nx

from .errors import ParseError
from .logic import (And, Atom, Exists, Forall, Formula, Iff, Implies, Not, Or, Predicate,
                    Vocabulary, free_variables, predicates_in, to_text)
from .parsing import (FormulaParser, TokenStream, parse_fraction, parse_predicate_decl,
                      parse_vocabulary_list, tokenize)

__all__ = ["RootDeclaration", "Definition", "AcceptanceQuery", "NetworkSpec",
           "Diagnostic", "ValidationReport", "parse_spec", "validate_spec",
           "predicate_dependency_graph", "topological_order", "spec_to_text"]


@dataclass(frozen=True)
class RootDeclaration:
    predicate: Predicate
    alpha: Fraction

    def __post_init__(self):
        object.__setattr__(self, "alpha", Fraction(self.alpha))
        if not 0 <= self.alpha <= 1:
            raise ValueError(f"probability {self.alpha} for {self.predicate.name} outside [0, 1]")


@dataclass(frozen=True)
class Definition:
    predicate: Predicate
    head: tuple[str, ...]
    body: Formula

    def __post_init__(self):
        object.__setattr__(self, "head", tuple(self.head))


@dataclass(frozen=True)
class AcceptanceQuery:
    conditioned: tuple[str, ...]
    conditioning: tuple[str, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "conditioned", tuple(self.conditioned))
        object.__setattr__(self, "conditioning", tuple(self.conditioning))


@dataclass(frozen=True)
class NetworkSpec:
    """Roots and definitions over ``vocabulary``.

    ``inputs`` is the declared input vocabulary (the evidence predicates);
    when absent every predicate counts as an input.
    """

    vocabulary: Vocabulary
    roots: tuple[RootDeclaration, ...] = ()
    definitions: tuple[Definition, ...] = ()
    inputs: Vocabulary | None = None
    query: AcceptanceQuery | None = None
    _roots_by_name: dict = field(init=False, repr=False, compare=False)
    _defs_by_name: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "roots", tuple(self.roots))
        object.__setattr__(self, "definitions", tuple(self.definitions))
        object.__setattr__(self, "_roots_by_name", {r.predicate.name: r for r in self.roots})
        object.__setattr__(self, "_defs_by_name", {d.predicate.name: d for d in self.definitions})

    @property
    def input_vocabulary(self) -> Vocabulary:
        return self.inputs if self.inputs is not None else self.vocabulary

    def root(self, name: str) -> RootDeclaration | None:
        return self._roots_by_name.get(name)

    def definition(self, name: str) -> Definition | None:
        return self._defs_by_name.get(name)

    def is_root(self, name: str) -> bool:
        return name in self._roots_by_name


@dataclass(frozen=True)
class Diagnostic:
    severity: str      # "error" or "warning"
    message: str
    location: str = ""

    def __str__(self):
        where = f" [{self.location}]" if self.location else ""
        return f"{self.severity}: {self.message}{where}"


@dataclass(frozen=True)
class ValidationReport:
    diagnostics: tuple[Diagnostic, ...]

    @property
    def ok(self) -> bool:
        return not any(d.severity == "error" for d in self.diagnostics)

    @property
    def errors(self) -> list[Diagnostic]:
        return [d for d in self.diagnostics if d.severity == "error"]


# -- parsing ---------------------------------------------------------------------

def parse_spec(text: str) -> NetworkSpec:
    s = TokenStream(tokenize(text))
    order: list[Predicate] = []
    known: dict[str, Predicate] = {}
    roots: dict[str, RootDeclaration] = {}
    pending_defs: list[tuple[Predicate, list[str], int]] = []
    inputs: list[Predicate] | None = None
    query: AcceptanceQuery | None = None

    def declare(pred: Predicate, tok) -> None:
        old = known.get(pred.name)
        if old is None:
            known[pred.name] = pred
            order.append(pred)
        elif old.arity != pred.arity:
            raise ParseError(f"{pred.name} declared with arity {old.arity} and {pred.arity}",
                             tok.line, tok.col)

    def skip_formula() -> int:
        # bodies are parsed once every predicate is known
        start = s.pos
        depth = 0
        while not (depth == 0 and s.at(".")):
            tok = s.next()
            if tok.kind == "eof":
                s.fail("unterminated definition; expected '.'")
            if tok.text == "(":
                depth += 1
            elif tok.text == ")":
                depth -= 1
        s.next()
        return start

    while s.peek.kind != "eof":
        kw = s.expect_kind("ident", "statement keyword")
        if kw.text == "vocabulary":
            if inputs is not None:
                raise ParseError("duplicate vocabulary statement", kw.line, kw.col)
            inputs = []
            for pred, tok in parse_vocabulary_list(s):
                declare(pred, tok)
                inputs.append(pred)
            s.expect(".")
        elif kw.text == "root":
            pred, tok = parse_predicate_decl(s)
            if pred.name in roots:
                raise ParseError(f"duplicate root declaration for {pred.name}", tok.line, tok.col)
            if any(p.name == pred.name for p, _, _ in pending_defs):
                raise ParseError(f"{pred.name} is both root and defined", tok.line, tok.col)
            declare(pred, tok)
            s.expect("=")
            alpha = parse_fraction(s)
            if not 0 <= alpha <= 1:
                raise ParseError(f"probability {alpha} for {pred.name} outside [0, 1]",
                                 tok.line, tok.col)
            roots[pred.name] = RootDeclaration(pred, alpha)
            s.expect(".")
        elif kw.text == "define":
            name = s.expect_kind("ident", "predicate name")
            head: list[str] = []
            if s.accept("("):
                if not s.at(")"):
                    head.append(s.expect_kind("ident", "head variable").text)
                    while s.accept(","):
                        head.append(s.expect_kind("ident", "head variable").text)
                s.expect(")")
            pred = Predicate(name.text, len(head))
            if pred.name in roots:
                raise ParseError(f"{pred.name} is both root and defined", name.line, name.col)
            if any(p.name == pred.name for p, _, _ in pending_defs):
                raise ParseError(f"duplicate definition of {pred.name}", name.line, name.col)
            declare(pred, name)
            if not (s.accept("<=>") or s.accept("<->")):
                s.fail("expected '<=>'")
            pending_defs.append((pred, head, skip_formula()))
        elif kw.text == "query":
            if query is not None:
                raise ParseError("duplicate query block", kw.line, kw.col)
            conditioned: list[str] = []
            conditioning: list[str] = []
            while not s.at("."):
                part = s.expect_kind("ident", "'conditioned' or 'conditioning'")
                if part.text not in ("conditioned", "conditioning"):
                    s.fail("expected 'conditioned' or 'conditioning'", part)
                target = conditioned if part.text == "conditioned" else conditioning
                if s.peek.kind == "ident":
                    target.append(s.next().text)
                    while s.accept(","):
                        target.append(s.expect_kind("ident", "predicate name").text)
                if not s.accept(";"):
                    break
            s.expect(".")
            query = AcceptanceQuery(tuple(conditioned), tuple(conditioning))
        else:
            s.fail("expected 'vocabulary', 'root', 'define' or 'query'", kw)

    vocab = Vocabulary(order)
    definitions = []
    end = s.pos
    for pred, head, start in pending_defs:
        s.pos = start
        body = FormulaParser(s, vocab).parse()
        if not s.at("."):
            s.fail("expected '.' after definition")
        definitions.append(Definition(pred, tuple(head), body))
    s.pos = end
    if query is not None:
        for name in query.conditioned + query.conditioning:
            if name not in known:
                raise ParseError(f"query names unknown predicate {name!r}")
    return NetworkSpec(vocab, tuple(roots.values()), tuple(definitions),
                       Vocabulary(inputs) if inputs is not None else None, query)


# -- validation --------------------------------------------------------------------

def predicate_dependency_graph(spec: NetworkSpec) -> nx.DiGraph:
    """Edge q -> s whenever q occurs in the definition body of s."""
    g = nx.DiGraph()
    g.add_nodes_from(spec.vocabulary.names)
    for d in spec.definitions:
        for q in sorted(predicates_in(d.body)):
            g.add_edge(q, d.predicate.name)
    return g


def topological_order(spec: NetworkSpec) -> list[str]:
    """Predicates with dependencies first; ties broken by declaration order."""
    g = predicate_dependency_graph(spec)
    rank = {name: i for i, name in enumerate(spec.vocabulary.names)}
    return list(nx.lexicographical_topological_sort(g, key=rank.__getitem__))


def _atom_arity_errors(body: Formula, vocab: Vocabulary) -> Iterable[str]:
    stack = [body]
    while stack:
        f = stack.pop()
        if isinstance(f, Atom):
            p = vocab.get(f.pred)
            if p is None:
                yield f"unknown predicate {f.pred!r}"
            elif p.arity != len(f.args):
                yield f"{f.pred} has arity {p.arity} but is applied to {len(f.args)} terms"
        elif isinstance(f, (Not, Forall, Exists)):
            stack.append(f.body)
        elif isinstance(f, (And, Or)):
            stack.extend(f.items)
        elif isinstance(f, (Implies, Iff)):
            stack.extend((f.left, f.right))


def validate_spec(spec: NetworkSpec) -> ValidationReport:
    diags: list[Diagnostic] = []
    vocab = spec.vocabulary
    for p in vocab:
        is_root, d = spec.is_root(p.name), spec.definition(p.name)
        if is_root and d is not None:
            diags.append(Diagnostic("error", f"{p.name} is both root and defined", p.name))
        elif not is_root and d is None:
            diags.append(Diagnostic("error", f"{p.name} is neither root nor defined", p.name))
    for r in spec.roots:
        if r.predicate not in vocab:
            diags.append(Diagnostic("error", f"root {r.predicate} not in vocabulary", r.predicate.name))
    for d in spec.definitions:
        name = d.predicate.name
        if d.predicate not in vocab:
            diags.append(Diagnostic("error", f"definition {d.predicate} not in vocabulary", name))
        if len(d.head) != d.predicate.arity:
            diags.append(Diagnostic("error", f"head of {name} has {len(d.head)} variables, "
                                    f"arity is {d.predicate.arity}", name))
        if len(set(d.head)) != len(d.head):
            diags.append(Diagnostic("error", f"head variables of {name} are not distinct", name))
        extra = free_variables(d.body) - set(d.head)
        if extra:
            diags.append(Diagnostic("error", f"free variables {sorted(extra)} in definition of "
                                    f"{name} are not head variables", name))
        for msg in _atom_arity_errors(d.body, vocab):
            diags.append(Diagnostic("error", msg, name))
    g = predicate_dependency_graph(spec)
    for cycle in nx.simple_cycles(g):
        diags.append(Diagnostic("error", "cyclic dependency: " + " -> ".join(cycle + cycle[:1]),
                                cycle[0]))
        break
    if spec.query is not None:
        for name in spec.query.conditioned + spec.query.conditioning:
            if name not in vocab:
                diags.append(Diagnostic("error", f"query names unknown predicate {name!r}", "query"))
            elif spec.inputs is not None and name in spec.inputs:
                diags.append(Diagnostic("warning", f"query predicate {name} is also an input", "query"))
    if spec.inputs is not None:
        for p in spec.inputs:
            if p not in vocab:
                diags.append(Diagnostic("error", f"input {p} not declared", p.name))
    return ValidationReport(tuple(diags))


# -- printing ----------------------------------------------------------------------

def spec_to_text(spec: NetworkSpec) -> str:
    lines = []
    if spec.inputs is not None:
        lines.append("vocabulary " + ", ".join(map(str, spec.inputs)) + ".")
    for name in spec.vocabulary.names:
        r, d = spec.root(name), spec.definition(name)
        if r is not None:
            a = r.alpha
            lines.append(f"root {r.predicate} = {a.numerator}/{a.denominator}.")
        if d is not None:
            head = f"({', '.join(d.head)})" if d.head else ""
            lines.append(f"define {name}{head} <=> {to_text(d.body)}.")
    if spec.query is not None:
        q = spec.query
        parts = [f"conditioned {', '.join(q.conditioned)}"]
        if q.conditioning:
            parts.append(f"conditioning {', '.join(q.conditioning)}")
        lines.append("query " + "; ".join(parts) + ".")
    return "\n".join(lines) + "\n"
