import random

import pytest

from fobn.errors import ResourceLimitError, SpecError
from fobn.grounder import GroundAtom, ground, ground_formula, parse_ground_atom, stats, to_dot
from fobn.logic import evaluate
from fobn.spec import parse_spec
from fobn.structures import Structure, enumerate_tuples

from randomspecs import random_spec

a, b, c = 0, 1, 2
# reference edge list for the friendship network over {a, b, c}
REFERENCE_EDGES = [
    ("fan", (a,), (a, b)), ("fan", (a,), (a, c)), ("fan", (a,), (b, a)), ("fan", (a,), (c, a)),
    ("fan", (b,), (b, a)), ("fan", (b,), (b, c)), ("fan", (b,), (a, b)), ("fan", (b,), (c, b)),
    ("fan", (c,), (c, a)), ("fan", (c,), (c, b)), ("fan", (c,), (a, c)), ("fan", (c,), (b, c)),
    ("other", (a, b), (a, b)), ("other", (a, c), (a, c)), ("other", (b, a), (b, a)),
    ("other", (b, c), (b, c)), ("other", (c, a), (c, a)), ("other", (c, b), (c, b)),
    ("fan", (a,), (a, a)), ("other", (a, a), (a, a)),
    ("fan", (b,), (b, b)), ("other", (b, b), (b, b)),
    ("fan", (c,), (c, c)), ("other", (c, c), (c, c)),
]


def test_friends_matches_reference_edges(friends):
    net = ground(friends, 3)
    assert stats(net) == (21, 24, 12)
    expected = {(GroundAtom(p, s), GroundAtom("friends", t)) for p, s, t in REFERENCE_EDGES}
    assert len(expected) == 24
    assert set(net.edges()) == expected
    assert all(not net.parents[i] for i in net.roots)
    assert net.is_acyclic()


def test_self_friendship_parents(friends):
    net = ground(friends, 3)
    assert net.parents_of(GroundAtom("friends", (1, 1))) == {GroundAtom("fan", (1,)),
                                                             GroundAtom("other", (1, 1))}


def test_single_element_domain(friends):
    net = ground(friends, 1)
    assert stats(net) == (3, 2, 2)
    assert [str(x) for x in net.atoms()] == ["fan(0)", "friends(0,0)", "other(0,0)"]


def test_canonical_order_is_declaration_then_tuple(friends):
    net = ground(friends, 2)
    assert [str(x) for x in net.atoms()] == [
        "fan(0)", "fan(1)", "friends(0,0)", "friends(0,1)", "friends(1,0)", "friends(1,1)",
        "other(0,0)", "other(0,1)", "other(1,0)", "other(1,1)"]
    pos = {net.topo[k]: k for k in range(len(net))}
    assert pos[net.index[GroundAtom("other", (1, 1))]] < pos[net.index[GroundAtom("friends", (0, 0))]]


def test_equivariance_under_relabeling():
    rng = random.Random(3)
    for _ in range(20):
        spec = random_spec(rng)
        net = ground(spec, 3)
        perm = list(range(3))
        rng.shuffle(perm)
        relabeled = {(p.relabel(perm), q.relabel(perm)) for p, q in net.edges()}
        assert relabeled == set(net.edges())


def test_grounding_preserves_semantics():
    rng = random.Random(11)
    for _ in range(20):
        spec = random_spec(rng)
        n = rng.randint(1, 3)
        net = ground(spec, n)
        roots = {p.name for p in spec.vocabulary if spec.is_root(p.name)}
        rels = {p.name: {t for t in enumerate_tuples(n, p.arity) if rng.random() < 0.5}
                for p in spec.vocabulary}
        s = Structure(n, spec.vocabulary, rels)
        for i, node in enumerate(net.nodes):
            if node.is_root or node.atom.pred in roots:
                continue
            d = spec.definition(node.atom.pred)
            want = evaluate(d.body, s, dict(zip(d.head, node.atom.args)))
            assert evaluate(node.formula, s) == want


def test_ground_formula_expands_quantifiers(friends):
    spec = parse_spec("root r/1 = 1/2. define q <=> forall x: r(x).")
    net = ground(spec, 2)
    assert net.node(GroundAtom("q")).formula == ground_formula(spec.definition("q").body, {}, 2)
    assert set(net.parents_of(GroundAtom("q"))) == {GroundAtom("r", (0,)), GroundAtom("r", (1,))}


def test_dot_output(friends):
    dot = to_dot(ground(friends, 3))
    lines = dot.splitlines()
    assert lines[0] == "digraph G {" and lines[-1] == "}"
    assert sum(1 for l in lines if "->" in l) == 24
    assert sum(1 for l in lines if l.strip().endswith(";") and "->" not in l) == 21
    assert '  "fan(0)" -> "friends(0,0)";' in lines
    assert to_dot(ground(friends, 3)) == dot


def test_caps_and_invalid_specs(friends):
    with pytest.raises(ResourceLimitError):
        ground(friends, 3, cap=10)
    with pytest.raises(ValueError):
        ground(friends, 0)
    with pytest.raises(SpecError):
        ground(parse_spec("define p <=> p."), 2)


def test_unknown_atom_lookup(friends):
    net = ground(friends, 2)
    with pytest.raises(KeyError):
        net.node(GroundAtom("fan", (5,)))
    assert parse_ground_atom("friends(0, 1)") == GroundAtom("friends", (0, 1))
    assert parse_ground_atom("a") == GroundAtom("a")
