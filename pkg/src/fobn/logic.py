"""Function-free first-order logic with equality: vocabulary, terms, formulas.

Formulas are immutable trees.  ``evaluate`` gives Tarskian truth in a finite
structure; ``compile_formula`` turns a formula into a reusable closure for
hot loops (ESO checking, model counting).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterable, Iterator, Mapping, Union

__all__ = [
    "Predicate", "Vocabulary", "Var", "Const", "Term",
    "Atom", "Eq", "Not", "And", "Or", "Implies", "Iff", "Forall", "Exists",
    "Formula", "free_variables", "predicates_in", "to_text",
    "compile_formula", "evaluate", "UnboundVariableError",
    "conj", "disj", "forall", "exists",
]


class UnboundVariableError(ValueError):
    pass


@dataclass(frozen=True, order=True)
class Predicate:
    name: str
    arity: int

    def __post_init__(self):
        if self.arity < 0:
            raise ValueError(f"negative arity for {self.name}")

    def __str__(self):
        return f"{self.name}/{self.arity}"


class Vocabulary:
    """Ordered set of predicates; the order fixes codec layouts."""

    __slots__ = ("_preds", "_index")

    def __init__(self, predicates: Iterable[Predicate] = ()):
        self._preds: tuple[Predicate, ...] = tuple(predicates)
        self._index: dict[str, int] = {}
        for i, p in enumerate(self._preds):
            if p.name in self._index:
                raise ValueError(f"duplicate predicate {p.name}")
            self._index[p.name] = i

    @property
    def predicates(self) -> tuple[Predicate, ...]:
        return self._preds

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(p.name for p in self._preds)

    def __iter__(self) -> Iterator[Predicate]:
        return iter(self._preds)

    def __len__(self):
        return len(self._preds)

    def __contains__(self, name) -> bool:
        if isinstance(name, Predicate):
            return self._index.get(name.name) is not None and self[name.name] == name
        return name in self._index

    def __getitem__(self, name: str) -> Predicate:
        return self._preds[self._index[name]]

    def get(self, name: str) -> Predicate | None:
        i = self._index.get(name)
        return None if i is None else self._preds[i]

    def index(self, name: str) -> int:
        return self._index[name]

    def __eq__(self, other):
        return isinstance(other, Vocabulary) and self._preds == other._preds

    def __hash__(self):
        return hash(self._preds)

    def __repr__(self):
        return "Vocabulary(" + ", ".join(map(str, self._preds)) + ")"

    def __add__(self, other: Iterable[Predicate]) -> "Vocabulary":
        return Vocabulary(self._preds + tuple(other))


# -- terms ---------------------------------------------------------------------

@dataclass(frozen=True)
class Var:
    name: str

    def __str__(self):
        return self.name


@dataclass(frozen=True)
class Const:
    value: int

    def __str__(self):
        return f"#{self.value}"


Term = Union[Var, Const]


# -- formulas ------------------------------------------------------------------

@dataclass(frozen=True)
class Atom:
    pred: str
    args: tuple[Term, ...] = ()


@dataclass(frozen=True)
class Eq:
    left: Term
    right: Term


@dataclass(frozen=True)
class Not:
    body: "Formula"


@dataclass(frozen=True)
class And:
    items: tuple["Formula", ...]


@dataclass(frozen=True)
class Or:
    items: tuple["Formula", ...]


@dataclass(frozen=True)
class Implies:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Iff:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Forall:
    var: str
    body: "Formula"


@dataclass(frozen=True)
class Exists:
    var: str
    body: "Formula"


Formula = Union[Atom, Eq, Not, And, Or, Implies, Iff, Forall, Exists]


# Builders used by code that assembles formulas programmatically.  They
# collapse singleton conjunctions/disjunctions; an empty one is rejected since
# the language has no truth constants.

def conj(*items: Formula) -> Formula:
    items = tuple(items)
    if not items:
        raise ValueError("empty conjunction")
    return items[0] if len(items) == 1 else And(items)


def disj(*items: Formula) -> Formula:
    items = tuple(items)
    if not items:
        raise ValueError("empty disjunction")
    return items[0] if len(items) == 1 else Or(items)


def forall(variables: Iterable[str], body: Formula) -> Formula:
    for v in reversed(tuple(variables)):
        body = Forall(v, body)
    return body


def exists(variables: Iterable[str], body: Formula) -> Formula:
    for v in reversed(tuple(variables)):
        body = Exists(v, body)
    return body


def _term_vars(terms: Iterable[Term]) -> set[str]:
    return {t.name for t in terms if isinstance(t, Var)}


def free_variables(formula: Formula) -> frozenset[str]:
    """Variables with at least one occurrence not bound by an enclosing quantifier."""
    if isinstance(formula, Atom):
        return frozenset(_term_vars(formula.args))
    if isinstance(formula, Eq):
        return frozenset(_term_vars((formula.left, formula.right)))
    if isinstance(formula, Not):
        return free_variables(formula.body)
    if isinstance(formula, (And, Or)):
        out: frozenset[str] = frozenset()
        for f in formula.items:
            out |= free_variables(f)
        return out
    if isinstance(formula, (Implies, Iff)):
        return free_variables(formula.left) | free_variables(formula.right)
    if isinstance(formula, (Forall, Exists)):
        return free_variables(formula.body) - {formula.var}
    raise TypeError(f"not a formula: {formula!r}")


def predicates_in(formula: Formula) -> set[str]:
    out: set[str] = set()
    stack = [formula]
    while stack:
        f = stack.pop()
        if isinstance(f, Atom):
            out.add(f.pred)
        elif isinstance(f, Not):
            stack.append(f.body)
        elif isinstance(f, (And, Or)):
            stack.extend(f.items)
        elif isinstance(f, (Implies, Iff)):
            stack.extend((f.left, f.right))
        elif isinstance(f, (Forall, Exists)):
            stack.append(f.body)
    return out


# -- printing ------------------------------------------------------------------

# Binding strength; higher binds tighter.  Quantifiers sit below everything
# because their body extends as far right as possible.
_PREC = {Iff: 1, Implies: 2, Or: 3, And: 4, Not: 5, Atom: 6, Eq: 6,
         Forall: 0, Exists: 0}


def to_text(formula: Formula) -> str:
    """Render in the ASCII DSL so that parsing the result gives back the same tree."""
    if isinstance(formula, Atom):
        if not formula.args:
            return formula.pred
        return f"{formula.pred}({', '.join(map(str, formula.args))})"
    if isinstance(formula, Eq):
        return f"{formula.left} = {formula.right}"
    if isinstance(formula, Not):
        return "!" + _wrap(formula.body, lambda c: _PREC[type(c)] < _PREC[Not])
    if isinstance(formula, (And, Or)):
        op = " & " if isinstance(formula, And) else " | "
        mine = _PREC[type(formula)]
        # same-operator children are parenthesised so the n-ary shape survives
        return op.join(_wrap(c, lambda c: _PREC[type(c)] <= mine) for c in formula.items)
    if isinstance(formula, Implies):
        left = _wrap(formula.left, lambda c: _PREC[type(c)] <= _PREC[Implies])
        right = _wrap(formula.right, lambda c: _PREC[type(c)] < _PREC[Implies])
        return f"{left} -> {right}"
    if isinstance(formula, Iff):
        left = _wrap(formula.left, lambda c: _PREC[type(c)] <= _PREC[Iff])
        right = _wrap(formula.right, lambda c: _PREC[type(c)] < _PREC[Iff])
        return f"{left} <-> {right}"
    if isinstance(formula, (Forall, Exists)):
        kw = "forall" if isinstance(formula, Forall) else "exists"
        return f"{kw} {formula.var}: {to_text(formula.body)}"
    raise TypeError(f"not a formula: {formula!r}")


def _wrap(f: Formula, needs: Callable[[Formula], bool]) -> str:
    s = to_text(f)
    return f"({s})" if needs(f) else s


# -- evaluation ----------------------------------------------------------------

Relations = Mapping[str, "frozenset[tuple[int, ...]] | set[tuple[int, ...]]"]
Compiled = Callable[[Relations, dict], bool]


def _compile_term(t: Term) -> Callable[[dict], int]:
    if isinstance(t, Const):
        v = t.value
        return lambda env: v
    name = t.name

    def look(env):
        try:
            return env[name]
        except KeyError:
            raise UnboundVariableError(f"unbound variable {name}") from None
    return look


def compile_formula(formula: Formula, n: int) -> Compiled:
    """Compile ``formula`` for domain {0..n-1}.

    The returned callable takes ``(relations, env)`` where ``relations`` maps a
    predicate name to its set of true tuples and ``env`` maps variables to
    elements.  ``env`` is mutated while quantifiers run and restored after.
    """
    dom = range(n)

    def comp(f: Formula) -> Compiled:
        if isinstance(f, Atom):
            name = f.pred
            if all(isinstance(t, Const) for t in f.args):
                key = tuple(t.value for t in f.args)
                return lambda rels, env: key in rels[name]
            terms = [_compile_term(t) for t in f.args]
            return lambda rels, env: tuple(t(env) for t in terms) in rels[name]
        if isinstance(f, Eq):
            a, b = _compile_term(f.left), _compile_term(f.right)
            return lambda rels, env: a(env) == b(env)
        if isinstance(f, Not):
            g = comp(f.body)
            return lambda rels, env: not g(rels, env)
        if isinstance(f, And):
            gs = [comp(c) for c in f.items]
            return lambda rels, env: all(g(rels, env) for g in gs)
        if isinstance(f, Or):
            gs = [comp(c) for c in f.items]
            return lambda rels, env: any(g(rels, env) for g in gs)
        if isinstance(f, Implies):
            a, b = comp(f.left), comp(f.right)
            return lambda rels, env: (not a(rels, env)) or b(rels, env)
        if isinstance(f, Iff):
            a, b = comp(f.left), comp(f.right)
            return lambda rels, env: a(rels, env) == b(rels, env)
        if isinstance(f, (Forall, Exists)):
            g = comp(f.body)
            var = f.var
            want = isinstance(f, Exists)

            def quant(rels, env):
                missing = object()
                saved = env.get(var, missing)
                try:
                    for e in dom:
                        env[var] = e
                        if g(rels, env) is want:
                            return want
                    return not want
                finally:
                    if saved is missing:
                        env.pop(var, None)
                    else:
                        env[var] = saved
            return quant
        raise TypeError(f"not a formula: {f!r}")

    return comp(formula)


def evaluate(formula: Formula, structure, binding: Mapping[str, int] | None = None) -> bool:
    """Truth of ``formula`` in ``structure`` under ``binding`` (variable -> element)."""
    binding = dict(binding or {})
    missing = free_variables(formula) - binding.keys()
    if missing:
        raise UnboundVariableError(f"unbound free variables: {sorted(missing)}")
    for v, e in binding.items():
        if not 0 <= e < structure.n:
            raise ValueError(f"element {e} bound to {v} outside domain of size {structure.n}")
    return compile_formula(formula, structure.n)(structure.relations, binding)
