"""Random specifications and formulas for property tests."""

from __future__ import annotations

import random
from fractions import Fraction

from fobn.logic import (And, Atom, Eq, Exists, Forall, Iff, Implies, Not, Or, Predicate, Var,
                        Vocabulary)
from fobn.spec import AcceptanceQuery, Definition, NetworkSpec, RootDeclaration
from fobn.structures import Evidence, enumerate_tuples

ALPHAS = [Fraction(0), Fraction(1, 5), Fraction(1, 3), Fraction(1, 2), Fraction(3, 4), Fraction(1)]


def random_formula(rng: random.Random, preds, bound: list[str], depth: int):
    if not bound:
        v = f"v{depth}{rng.randrange(100)}"
        q = Forall if rng.random() < 0.5 else Exists
        return q(v, random_formula(rng, preds, [v], depth - 1 if depth else 0))
    if depth <= 0 or rng.random() < 0.25:
        if rng.random() < 0.15:
            return Eq(Var(rng.choice(bound)), Var(rng.choice(bound)))
        p = rng.choice(preds)
        return Atom(p.name, tuple(Var(rng.choice(bound)) for _ in range(p.arity)))
    kind = rng.randrange(7)
    sub = lambda: random_formula(rng, preds, bound, depth - 1)
    if kind == 0:
        return Not(sub())
    if kind == 1:
        return And((sub(), sub()))
    if kind == 2:
        return Or((sub(), sub()))
    if kind == 3:
        return Implies(sub(), sub())
    if kind == 4:
        return Iff(sub(), sub())
    v = f"v{len(bound)}"
    q = Forall if kind == 5 else Exists
    return q(v, random_formula(rng, preds, bound + [v], depth - 1))


def random_spec(rng: random.Random, depth: int = 3) -> NetworkSpec:
    """Roots r/1, e/2; a defined d/1; then arity-0 A and B forming the query."""
    r, e = Predicate("r", 1), Predicate("e", 2)
    d, a, b = Predicate("d", 1), Predicate("A", 0), Predicate("B", 0)
    roots = (RootDeclaration(r, rng.choice(ALPHAS[1:-1])), RootDeclaration(e, rng.choice(ALPHAS)))
    defs = (Definition(d, ("x",), random_formula(rng, [r, e], ["x"], depth)),
            Definition(a, (), random_formula(rng, [r, e, d], [], depth)),
            Definition(b, (), random_formula(rng, [r, e, d], [], depth)))
    vocab = Vocabulary([r, e, d, a, b])
    return NetworkSpec(vocab, roots, defs, Vocabulary([r, e]), AcceptanceQuery(("A",), ("B",)))


def random_evidence(rng: random.Random, vocab: Vocabulary, n: int, p_assign: float = 0.4) -> Evidence:
    vals = {}
    for p in vocab:
        for t in enumerate_tuples(n, p.arity):
            if rng.random() < p_assign:
                vals[(p.name, t)] = rng.random() < 0.5
    return Evidence(vals)


def brute_force_worlds(spec: NetworkSpec, n: int):
    """(weight, full Structure) for every root assignment; definitions evaluated directly."""
    import itertools

    from fobn.logic import evaluate
    from fobn.spec import topological_order
    from fobn.structures import Structure

    slots = [(p.name, t) for p in spec.vocabulary if spec.is_root(p.name)
             for t in enumerate_tuples(n, p.arity)]
    order = [name for name in topological_order(spec) if not spec.is_root(name)]
    for bits in itertools.product((False, True), repeat=len(slots)):
        w = Fraction(1)
        rels = {p.name: set() for p in spec.vocabulary}
        for (name, t), v in zip(slots, bits):
            a = spec.root(name).alpha
            w *= a if v else 1 - a
            if v:
                rels[name].add(t)
        for name in order:
            d = spec.definition(name)
            partial = Structure(n, spec.vocabulary, rels)
            rels[name] = {t for t in enumerate_tuples(n, d.predicate.arity)
                          if evaluate(d.body, partial, dict(zip(d.head, t)))}
        yield w, Structure(n, spec.vocabulary, rels)


def brute_force_conditional(spec: NetworkSpec, n: int, target: dict, given: dict):
    """P(target | given) with events as {(pred, tuple): bool}; None when P(given) = 0."""
    num = den = Fraction(0)
    for w, s in brute_force_worlds(spec, n):
        if all(s.holds(p, t) == v for (p, t), v in given.items()):
            den += w
            if all(s.holds(p, t) == v for (p, t), v in target.items()):
                num += w
    return None if den == 0 else num / den
