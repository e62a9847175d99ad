"""Finite structures, three-valued evidence pieces, ESO checking, isomorphism."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterator, Mapping, Sequence

from .errors import ResourceLimitError
from .logic import Formula, Predicate, Vocabulary, compile_formula, free_variables

__all__ = [
    "enumerate_tuples", "Structure", "Evidence", "EsoSentence", "eso_check",
    "find_isomorphism", "permute_evidence", "permute_structure",
    "DEFAULT_ESO_CAP", "DEFAULT_ISO_CAP",
]

DEFAULT_ESO_CAP = 1 << 20
DEFAULT_ISO_CAP = 8


def enumerate_tuples(n: int, k: int) -> list[tuple[int, ...]]:
    """All k-tuples over {0..n-1} in lexicographic order (one empty tuple when k == 0)."""
    if k < 0:
        raise ValueError("arity must be non-negative")
    return list(itertools.product(range(n), repeat=k))


def _check_tuple(pred: Predicate, args: tuple[int, ...], n: int) -> None:
    if len(args) != pred.arity:
        raise ValueError(f"{pred.name} expects {pred.arity} arguments, got {len(args)}")
    for a in args:
        if not 0 <= a < n:
            raise ValueError(f"element {a} outside domain of size {n}")


@dataclass(frozen=True)
class Structure:
    """Domain {0..n-1} plus, for every predicate, the set of true tuples."""

    n: int
    vocabulary: Vocabulary
    relations: Mapping[str, frozenset] = field(compare=False)

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("domain size must be at least 1")
        rels = {}
        for p in self.vocabulary:
            tuples = frozenset(tuple(t) for t in self.relations.get(p.name, ()))
            for t in tuples:
                _check_tuple(p, t, self.n)
            rels[p.name] = tuples
        extra = set(self.relations) - set(rels)
        if extra:
            raise ValueError(f"relations for predicates outside vocabulary: {sorted(extra)}")
        object.__setattr__(self, "relations", rels)

    def holds(self, pred: str, args: Sequence[int] = ()) -> bool:
        return tuple(args) in self.relations[pred]

    def __eq__(self, other):
        return (isinstance(other, Structure) and self.n == other.n
                and self.vocabulary == other.vocabulary
                and self.relations == other.relations)

    def __hash__(self):
        return hash((self.n, self.vocabulary,
                     tuple(self.relations[p] for p in self.vocabulary.names)))


@dataclass(frozen=True)
class Evidence:
    """Partial interpretation: ``values[(pred, tuple)]`` is True or False; absent means unassigned."""

    values: Mapping[tuple[str, tuple[int, ...]], bool] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "values",
                           {(p, tuple(t)): bool(v) for (p, t), v in self.values.items()})

    def status(self, pred: str, args: Sequence[int] = ()) -> bool | None:
        return self.values.get((pred, tuple(args)))

    def predicates(self) -> set[str]:
        return {p for p, _ in self.values}

    def check(self, vocabulary: Vocabulary, n: int) -> None:
        for (p, t) in self.values:
            pred = vocabulary.get(p)
            if pred is None:
                raise ValueError(f"evidence on predicate {p!r} outside the vocabulary")
            _check_tuple(pred, t, n)

    def __len__(self):
        return len(self.values)

    def __eq__(self, other):
        return isinstance(other, Evidence) and self.values == other.values

    def __hash__(self):
        return hash(frozenset(self.values.items()))

    @classmethod
    def from_structure(cls, structure: Structure) -> "Evidence":
        return cls({(p.name, t): structure.holds(p.name, t)
                    for p in structure.vocabulary
                    for t in enumerate_tuples(structure.n, p.arity)})

    def completions(self, vocabulary: Vocabulary, n: int) -> Iterator["Evidence"]:
        """Every total evidence piece over ``vocabulary`` agreeing with this one."""
        free = [(p.name, t) for p in vocabulary for t in enumerate_tuples(n, p.arity)
                if (p.name, t) not in self.values]
        for bits in itertools.product((False, True), repeat=len(free)):
            vals = dict(self.values)
            vals.update(zip(free, bits))
            yield Evidence(vals)


def permute_evidence(evidence: Evidence, perm: Sequence[int]) -> Evidence:
    """Image of ``evidence`` under the element map ``i -> perm[i]``."""
    return Evidence({(p, tuple(perm[a] for a in t)): v for (p, t), v in evidence.values.items()})


def permute_structure(structure: Structure, perm: Sequence[int]) -> Structure:
    rels = {name: {tuple(perm[a] for a in t) for t in ts}
            for name, ts in structure.relations.items()}
    return Structure(structure.n, structure.vocabulary, rels)


# -- ESO ------------------------------------------------------------------------

@dataclass(frozen=True)
class EsoSentence:
    """``exists r1 ... exists rm: matrix`` with the r_i ranging over relations."""

    quantified: tuple[Predicate, ...]
    matrix: Formula

    def __post_init__(self):
        object.__setattr__(self, "quantified", tuple(self.quantified))
        fv = free_variables(self.matrix)
        if fv:
            raise ValueError(f"ESO matrix must be a sentence; free variables {sorted(fv)}")


def eso_check(sentence: EsoSentence, structure: Structure, cap: int = DEFAULT_ESO_CAP) -> bool:
    """Whether some interpretation of the quantified predicates makes the matrix true.

    Exhaustive over all 2^(sum n^arity) candidates; raises ResourceLimitError
    when that count exceeds ``cap``.
    """
    clash = {p.name for p in sentence.quantified} & set(structure.vocabulary.names)
    if clash:
        raise ValueError(f"quantified predicates also interpreted by the structure: {sorted(clash)}")
    n = structure.n
    slots = [(p.name, t) for p in sentence.quantified for t in enumerate_tuples(n, p.arity)]
    if len(slots) > 62 or (1 << len(slots)) > cap:
        raise ResourceLimitError(
            f"ESO check needs 2^{len(slots)} candidate interpretations (cap {cap})")
    matrix = compile_formula(sentence.matrix, n)
    rels = {name: set(ts) for name, ts in structure.relations.items()}
    for p in sentence.quantified:
        rels[p.name] = set()
    for bits in itertools.product((False, True), repeat=len(slots)):
        for p in sentence.quantified:
            rels[p.name].clear()
        for (name, t), b in zip(slots, bits):
            if b:
                rels[name].add(t)
        if matrix(rels, {}):
            return True
    return False


# -- isomorphism ------------------------------------------------------------------

def _status_profile(evidence: Evidence):
    return sorted((p, v) for (p, _), v in evidence.values.items())


def find_isomorphism(pair1: tuple[int, Evidence], pair2: tuple[int, Evidence],
                     cap: int = DEFAULT_ISO_CAP) -> tuple[int, ...] | None:
    """A bijection g with status(p, t) in pair1 == status(p, g(t)) in pair2, or None.

    All three statuses are preserved (true, false and unassigned).  The witness
    is returned as a tuple ``g`` with ``g[i]`` the image of element ``i``.
    """
    (n1, e1), (n2, e2) = pair1, pair2
    if n1 != n2:
        return None
    if n1 > cap:
        raise ResourceLimitError(f"isomorphism search over {n1}! bijections (cap n <= {cap})")
    if len(e1) != len(e2) or _status_profile(e1) != _status_profile(e2):
        return None
    target = e2.values
    for g in itertools.permutations(range(n1)):
        if all(target.get((p, tuple(g[a] for a in t))) == v for (p, t), v in e1.values.items()):
            # equal assignment counts make the map onto e2's assigned groundings
            return g
    return None
