import random
from fractions import Fraction

import pytest

from fobn.grounder import GroundAtom, ground
from fobn.inference import (InconsistentEventError, Outcome, complete_from_roots,
                            conditional_probability, count_models, decide_acceptance,
                            event_probability, joint_and_marginal)
from fobn.spec import AcceptanceQuery, parse_spec
from fobn.structures import Evidence, permute_evidence

from randomspecs import brute_force_conditional, random_evidence, random_spec


def F(atom, *args):
    return GroundAtom(atom, tuple(args))


@pytest.mark.parametrize("method", ["search", "exhaustive"])
def test_friends_marginals(friends, method):
    net = ground(friends, 3)
    assert event_probability(net, {F("friends", 0, 1): True}, method=method) == Fraction(17, 125)
    assert event_probability(net, {F("friends", 0, 0): True}, method=method) == 1
    assert event_probability(net, {}, method=method) == 1


def test_friends_conditionals(friends):
    net = ground(friends, 3)
    p = conditional_probability(net, {F("friends", 0, 1): True}, {F("other", 0, 1): False})
    assert p == Fraction(1, 25)
    p = conditional_probability(net, {F("friends", 0, 1): True}, {F("fan", 0): True, F("fan", 1): True})
    assert p == 1
    # friendship is evidence for fandom
    p = conditional_probability(net, {F("fan", 0): True}, {F("friends", 0, 1): True})
    assert p > Fraction(1, 5)


def test_against_brute_force_on_random_specs():
    rng = random.Random(7)
    for _ in range(30):
        spec = random_spec(rng)
        n = rng.randint(1, 2)
        net = ground(spec, n)
        target = {("A", ()): True}
        given = {("B", ()): True}
        given.update(random_evidence(rng, spec.inputs, n, 0.3).values)
        want = brute_force_conditional(spec, n, target, given)
        tgt = {GroundAtom(p, t): v for (p, t), v in target.items()}
        giv = {GroundAtom(p, t): v for (p, t), v in given.items()}
        for method in ("search", "exhaustive"):
            assert conditional_probability(net, tgt, giv, method=method) == want


def test_normalization_and_complement(friends):
    net = ground(friends, 3)
    atom = F("friends", 1, 2)
    for given in ({}, {F("fan", 1): True}, {F("other", 2, 1): True}):
        pt = conditional_probability(net, {atom: True}, given)
        pf = conditional_probability(net, {atom: False}, given)
        assert pt + pf == 1
    z, j = joint_and_marginal(net, {atom: True}, {F("fan", 1): True})
    assert z == Fraction(1, 5) and j == z * conditional_probability(net, {atom: True}, {F("fan", 1): True})


def test_monotone_in_root_probability():
    values = []
    for alpha in ("0", "1/10", "1/5", "1/2", "1"):
        spec = parse_spec(f"root fan/1 = {alpha}. root other/2 = 0.1. "
                          "define friends(x, y) <=> x = y | (fan(x) & fan(y)) | other(x, y).")
        net = ground(spec, 2)
        values.append(event_probability(net, {F("friends", 0, 1): True}))
    assert values == sorted(values)
    assert values[0] == Fraction(1, 10) and values[-1] == 1


def test_degenerate_and_inconsistent_events(friends):
    net = ground(friends, 2)
    assert conditional_probability(net, {F("fan", 0): True}, {F("friends", 0, 0): False}) is None
    with pytest.raises(InconsistentEventError):
        conditional_probability(net, {F("fan", 0): True}, {F("fan", 0): False})
    with pytest.raises(KeyError):
        event_probability(net, {F("fan", 7): True})


def test_complete_from_roots(friends):
    net = ground(friends, 2)
    roots = {net.nodes[i].atom: False for i in net.roots}
    roots[F("other", 1, 0)] = True
    s = complete_from_roots(net, roots)
    assert s.relations["friends"] == {(0, 0), (1, 1), (1, 0)}


def test_count_models():
    spec = parse_spec("root r/1 = 0.9. define q <=> exists x: r(x).")
    net = ground(spec, 3)
    assert count_models(net, {F("q"): True}) == 7
    assert count_models(net, {}) == 8


QUERY_SPEC = """
vocabulary r/1.
root r/1 = 1/2.
root coin/0 = 1/2.
define a <=> coin.
define b <=> forall x: r(x) | !r(x).
query conditioned a; conditioning b.
"""


def test_tie_rejects():
    spec = parse_spec(QUERY_SPEC)
    d = decide_acceptance(spec, spec.query, 2, Evidence())
    assert d.outcome == Outcome.REJECT and d.probability == Fraction(1, 2)


def test_undefined_when_conditioning_impossible():
    spec = parse_spec(QUERY_SPEC.replace("r(x) | !r(x)", "r(x)"))
    d = decide_acceptance(spec, spec.query, 2, Evidence({("r", (0,)): False}))
    assert d.outcome == Outcome.UNDEFINED and d.probability is None
    d = decide_acceptance(spec, spec.query, 2, Evidence({("r", (0,)): True}))
    assert d.probability == Fraction(1, 2)


def test_decide_rejects_foreign_evidence(friends):
    spec = parse_spec(QUERY_SPEC)
    with pytest.raises(ValueError):
        decide_acceptance(spec, spec.query, 2, Evidence({("zzz", (0,)): True}))


def test_friends_query_accept_reject(friends):
    q = AcceptanceQuery(("fan",), ())
    d = decide_acceptance(friends, q, 3, Evidence())
    assert d.outcome == Outcome.REJECT and d.probability == Fraction(1, 125)
    d = decide_acceptance(friends, AcceptanceQuery(("friends",), ()), 1, Evidence())
    assert d.outcome == Outcome.ACCEPT and d.probability == 1


def test_isomorphism_invariance_random():
    rng = random.Random(13)
    for _ in range(25):
        spec = random_spec(rng)
        n = rng.randint(1, 3)
        ev = random_evidence(rng, spec.inputs, n)
        perm = list(range(n))
        rng.shuffle(perm)
        d1 = decide_acceptance(spec, spec.query, n, ev)
        d2 = decide_acceptance(spec, spec.query, n, permute_evidence(ev, perm))
        assert d1 == d2


def test_parallel_matches_serial(friends):
    net = ground(friends, 3)
    tgt = {F("friends", 0, 1): True, F("friends", 1, 2): True}
    giv = {F("other", 2, 0): False}
    serial = joint_and_marginal(net, tgt, giv, jobs=1)
    assert joint_and_marginal(net, tgt, giv, jobs=8) == serial
    assert joint_and_marginal(net, tgt, giv, jobs=3) == serial


def test_root_forced_by_two_constraints_weighed_once():
    # branching x=false makes both definitions force r at once
    spec = parse_spec("root x/0 = 1/3. root r/0 = 1/4. define a <=> x | r. define b <=> r | x.")
    net = ground(spec, 1)
    want = 1 - Fraction(2, 3) * Fraction(3, 4)
    ev = {F("a"): True, F("b"): True}
    assert event_probability(net, ev) == want
    assert event_probability(net, ev, method="exhaustive") == want
