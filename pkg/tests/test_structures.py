import random

import pytest
from hypothesis import given, settings, strategies as st

from fobn.errors import ParseError, ResourceLimitError
from fobn.logic import Predicate, Vocabulary
from fobn.parsing import parse_eso, parse_evidence, parse_structure
from fobn.structures import (Evidence, Structure, enumerate_tuples, eso_check, find_isomorphism,
                             permute_evidence, permute_structure)

from randomspecs import random_evidence

BIPARTITE = """
vocabulary edge/2.
exists partition/1: forall x, y: edge(x, y) -> (partition(x) <-> !partition(y)).
"""
G = Vocabulary([Predicate("edge", 2)])


def test_enumerate_tuples():
    assert enumerate_tuples(3, 0) == [()]
    assert enumerate_tuples(2, 2) == [(0, 0), (0, 1), (1, 0), (1, 1)]
    assert len(enumerate_tuples(3, 3)) == 27
    assert enumerate_tuples(3, 2) == sorted(enumerate_tuples(3, 2))


def test_structure_rejects_out_of_domain():
    with pytest.raises(ValueError):
        Structure(2, G, {"edge": {(0, 2)}})


def test_structure_equality_ignores_container_type():
    assert Structure(2, G, {"edge": [(0, 1)]}) == Structure(2, G, {"edge": {(0, 1)}})


def test_evidence_completions():
    v = Vocabulary([Predicate("r", 1)])
    ev = Evidence({("r", (0,)): True})
    comps = list(ev.completions(v, 3))
    assert len(comps) == 4
    assert all(c.status("r", (0,)) is True and len(c) == 3 for c in comps)
    assert len(set(comps)) == 4


def test_two_colouring_examples():
    vocab, sentence = parse_eso(BIPARTITE)
    assert vocab == G
    square = Structure(4, G, {"edge": {(0, 1), (1, 2), (2, 3), (3, 0)}})
    triangle = Structure(3, G, {"edge": {(0, 1), (1, 2), (2, 0)}})
    loop = Structure(1, G, {"edge": {(0, 0)}})
    assert eso_check(sentence, square)
    assert not eso_check(sentence, triangle)
    assert not eso_check(sentence, loop)
    assert eso_check(sentence, Structure(2, G, {"edge": set()}))


def test_eso_cap_and_clash():
    _, sentence = parse_eso(BIPARTITE)
    with pytest.raises(ResourceLimitError):
        eso_check(sentence, Structure(4, G, {"edge": set()}), cap=8)
    with pytest.raises(ParseError):
        parse_eso("vocabulary edge/2. exists edge/2: forall x: edge(x, x).")
    _, other = parse_eso("exists edge/2: forall x: edge(x, x).")
    with pytest.raises(ValueError):
        eso_check(other, Structure(2, G, {"edge": set()}))


def test_eso_requires_sentence():
    with pytest.raises(ParseError):
        parse_eso("vocabulary edge/2. exists s/1: s(x).")


def _random_pair(rng, n):
    v = Vocabulary([Predicate("r", 1), Predicate("e", 2)])
    return v, random_evidence(rng, v, n)


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 10 ** 9), st.integers(1, 4))
def test_permuted_pairs_are_isomorphic(seed, n):
    rng = random.Random(seed)
    _, ev = _random_pair(rng, n)
    perm = list(range(n))
    rng.shuffle(perm)
    image = permute_evidence(ev, perm)
    g = find_isomorphism((n, ev), (n, image))
    assert g is not None
    assert permute_evidence(ev, g) == image
    back = find_isomorphism((n, image), (n, ev))
    assert permute_evidence(image, back) == ev


def test_isomorphism_respects_unassigned_status():
    # same true/false atoms up to relabeling, but one side leaves a grounding open
    a = Evidence({("r", (0,)): True, ("r", (1,)): False})
    b = Evidence({("r", (1,)): True})
    assert find_isomorphism((2, a), (2, b)) is None
    c = Evidence({("r", (1,)): True, ("r", (0,)): False})
    assert find_isomorphism((2, a), (2, c)) == (1, 0)


def test_isomorphism_size_mismatch_and_cap():
    assert find_isomorphism((2, Evidence()), (3, Evidence())) is None
    with pytest.raises(ResourceLimitError):
        find_isomorphism((9, Evidence()), (9, Evidence()))


def test_permute_structure_is_relabeling():
    s = Structure(3, G, {"edge": {(0, 1), (1, 2)}})
    t = permute_structure(s, (2, 0, 1))
    assert t.relations["edge"] == {(2, 0), (0, 1)}
    assert permute_structure(t, (1, 2, 0)) == s


def test_structure_and_evidence_files():
    s = parse_structure("domain 3; edge(0,1) = true; edge(2, 2) = false;", G)
    assert s.n == 3 and s.relations["edge"] == {(0, 1)}
    n, ev = parse_evidence("edge(1,0) = false;", G, 2)
    assert n == 2 and ev == Evidence({("edge", (1, 0)): False})
    with pytest.raises(ParseError):
        parse_structure("edge(0,1) = true;", G)
    with pytest.raises(ParseError):
        parse_evidence("domain 2; edge(0,3) = true;", G)
    with pytest.raises(ParseError):
        parse_evidence("edge(0,1) = true; edge(0,1) = false;", G)
