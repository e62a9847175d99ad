"""Grounding a specification over {0..n-1} into an explicit Bayesian network.

Every predicate is instantiated on every tuple.  Root groundings keep the
predicate's probability; defined groundings get the definition body with the
head variables replaced by the tuple and every quantifier expanded over the
domain.  A defined node's parents are the ground atoms that occur in that
expanded body; equalities contribute none.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Iterator, Mapping, Sequence

from .errors import ResourceLimitError, SpecError
from .logic import And, Atom, Const, Eq, Exists, Forall, Formula, Iff, Implies, Not, Or, Term
from .spec import NetworkSpec, topological_order, validate_spec
from .structures import enumerate_tuples

__all__ = ["GroundAtom", "GroundNode", "GroundedNetwork", "ground", "ground_formula",
           "node_parents", "stats", "to_dot", "DEFAULT_GROUND_CAP"]

DEFAULT_GROUND_CAP = 1_000_000


@dataclass(frozen=True)
class GroundAtom:
    pred: str
    args: tuple[int, ...] = ()

    def __str__(self):
        if not self.args:
            return self.pred
        return f"{self.pred}({','.join(map(str, self.args))})"

    def relabel(self, perm: Sequence[int]) -> "GroundAtom":
        return GroundAtom(self.pred, tuple(perm[a] for a in self.args))


@dataclass(frozen=True)
class GroundNode:
    atom: GroundAtom
    alpha: Fraction | None = None        # set for root groundings
    formula: Formula | None = None       # set for defined groundings

    @property
    def is_root(self) -> bool:
        return self.formula is None


class _Budget:
    __slots__ = ("left",)

    def __init__(self, cap: int):
        self.left = cap

    def spend(self, k: int = 1):
        self.left -= k
        if self.left < 0:
            raise ResourceLimitError("grounded formulas exceed the size cap")


def _subst(t: Term, env: Mapping[str, int]) -> Const:
    if isinstance(t, Const):
        return t
    return Const(env[t.name])


def ground_formula(f: Formula, env: dict[str, int], n: int, budget: _Budget | None = None) -> Formula:
    """Replace variables by ``env`` and expand quantifiers over {0..n-1}."""
    if budget is not None:
        budget.spend()
    if isinstance(f, Atom):
        return Atom(f.pred, tuple(_subst(t, env) for t in f.args))
    if isinstance(f, Eq):
        return Eq(_subst(f.left, env), _subst(f.right, env))
    if isinstance(f, Not):
        return Not(ground_formula(f.body, env, n, budget))
    if isinstance(f, And):
        return And(tuple(ground_formula(c, env, n, budget) for c in f.items))
    if isinstance(f, Or):
        return Or(tuple(ground_formula(c, env, n, budget) for c in f.items))
    if isinstance(f, Implies):
        return Implies(ground_formula(f.left, env, n, budget), ground_formula(f.right, env, n, budget))
    if isinstance(f, Iff):
        return Iff(ground_formula(f.left, env, n, budget), ground_formula(f.right, env, n, budget))
    if isinstance(f, (Forall, Exists)):
        saved = env.get(f.var)
        parts = []
        for e in range(n):
            env[f.var] = e
            parts.append(ground_formula(f.body, env, n, budget))
        if saved is None:
            del env[f.var]
        else:
            env[f.var] = saved
        if len(parts) == 1:
            return parts[0]
        return And(tuple(parts)) if isinstance(f, Forall) else Or(tuple(parts))
    raise TypeError(f"not a formula: {f!r}")


def ground_atoms_in(f: Formula) -> Iterator[GroundAtom]:
    stack = [f]
    while stack:
        g = stack.pop()
        if isinstance(g, Atom):
            yield GroundAtom(g.pred, tuple(t.value for t in g.args))
        elif isinstance(g, Not):
            stack.append(g.body)
        elif isinstance(g, (And, Or)):
            stack.extend(reversed(g.items))
        elif isinstance(g, (Implies, Iff)):
            stack.extend((g.right, g.left))
        elif isinstance(g, (Forall, Exists)):
            raise ValueError("formula is not ground")


class GroundedNetwork:
    """Nodes in canonical order (declaration index, then lexicographic tuple)."""

    def __init__(self, n: int, spec: NetworkSpec, nodes: Sequence[GroundNode],
                 parents: Sequence[frozenset[GroundAtom]], topo: Sequence[int]):
        self.n = n
        self.spec = spec
        self.nodes = tuple(nodes)
        self.parents = tuple(parents)
        self.topo = tuple(topo)
        self.index = {node.atom: i for i, node in enumerate(self.nodes)}
        self.roots = tuple(i for i, node in enumerate(self.nodes) if node.is_root)

    def __len__(self):
        return len(self.nodes)

    def node(self, atom: GroundAtom) -> GroundNode:
        return self.nodes[self._idx(atom)]

    def _idx(self, atom: GroundAtom) -> int:
        try:
            return self.index[atom]
        except KeyError:
            raise KeyError(f"no ground atom {atom} in the network") from None

    def parents_of(self, atom: GroundAtom) -> frozenset[GroundAtom]:
        return self.parents[self._idx(atom)]

    def edges(self) -> list[tuple[GroundAtom, GroundAtom]]:
        out = []
        for i, node in enumerate(self.nodes):
            for p in self.parents[i]:
                out.append((p, node.atom))
        out.sort(key=lambda e: (self.index[e[0]], self.index[e[1]]))
        return out

    def atoms(self) -> list[GroundAtom]:
        return [node.atom for node in self.nodes]

    def sort_key(self, atom: GroundAtom) -> int:
        return self.index[atom]

    def is_acyclic(self) -> bool:
        pos = {i: k for k, i in enumerate(self.topo)}
        return all(pos[self.index[p]] < pos[i]
                   for i in range(len(self.nodes)) for p in self.parents[i])


def ground(spec: NetworkSpec, n: int, cap: int = DEFAULT_GROUND_CAP,
           check: bool = True) -> GroundedNetwork:
    """Ground ``spec`` over a domain of size ``n``.

    ``cap`` bounds both the number of nodes and the total size of the expanded
    definitions.
    """
    if n < 1:
        raise ValueError("domain size must be at least 1")
    if check:
        report = validate_spec(spec)
        if not report.ok:
            raise SpecError("; ".join(map(str, report.errors)))
    total = sum(n ** p.arity for p in spec.vocabulary)
    if total > cap:
        raise ResourceLimitError(f"grounding needs {total} nodes (cap {cap})")
    budget = _Budget(cap)
    nodes: list[GroundNode] = []
    parents: list[frozenset[GroundAtom]] = []
    for pred in spec.vocabulary:
        root = spec.root(pred.name)
        definition = spec.definition(pred.name)
        for tup in enumerate_tuples(n, pred.arity):
            atom = GroundAtom(pred.name, tup)
            if root is not None:
                nodes.append(GroundNode(atom, alpha=root.alpha))
                parents.append(frozenset())
            else:
                env = dict(zip(definition.head, tup))
                body = ground_formula(definition.body, env, n, budget)
                nodes.append(GroundNode(atom, formula=body))
                parents.append(frozenset(ground_atoms_in(body)))
    rank = {name: i for i, name in enumerate(topological_order(spec))}
    topo = sorted(range(len(nodes)), key=lambda i: (rank[nodes[i].atom.pred], i))
    return GroundedNetwork(n, spec, nodes, parents, topo)


def node_parents(network: GroundedNetwork, atom: GroundAtom) -> frozenset[GroundAtom]:
    return network.parents_of(atom)


def stats(network: GroundedNetwork) -> tuple[int, int, int]:
    """(node count, edge count, root count)."""
    edges = sum(len(p) for p in network.parents)
    return len(network.nodes), edges, len(network.roots)


def to_dot(network: GroundedNetwork, name: str = "G") -> str:
    lines = [f"digraph {name} {{"]
    for node in network.nodes:
        lines.append(f'  "{node.atom}";')
    for p, c in network.edges():
        lines.append(f'  "{p}" -> "{c}";')
    lines.append("}")
    return "\n".join(lines) + "\n"


def parse_ground_atom(text: str) -> GroundAtom:
    text = text.strip()
    if "(" not in text:
        return GroundAtom(text)
    name, rest = text.split("(", 1)
    inner = rest.rstrip(")").strip()
    args = tuple(int(a.strip().lstrip("#")) for a in inner.split(",")) if inner else ()
    return GroundAtom(name.strip(), args)


def atoms_of(network: GroundedNetwork, preds: Iterable[str]) -> list[GroundAtom]:
    wanted = set(preds)
    return [node.atom for node in network.nodes if node.atom.pred in wanted]
