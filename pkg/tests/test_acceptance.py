"""Acceptance criteria 1-9, one pass/fail line each.

Run under pytest (lines appear in the terminal even with output capture on)
or directly with ``python3 tests/test_acceptance.py``.
"""

from __future__ import annotations

import itertools
import math
import random
import sys
import time
from fractions import Fraction
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).resolve().parent))

from fobn.capture import (bundled_machine, build_order_formula, compile_machine,
                          normalize_machine, structured_conditional, verify_capture)
from fobn.capture.compile import all_evidence
from fobn.codec import (decode_pair, decode_structure, encode_pair, encode_structure)
from fobn.errors import DecodeError
from fobn.grounder import GroundAtom, ground, stats
from fobn.inference import (Outcome, conditional_probability, decide_acceptance, evidence_event,
                            event_probability, joint_and_marginal)
from fobn.logic import Predicate, Vocabulary, evaluate
from fobn.parsing import parse_eso
from fobn.spec import parse_spec
from fobn.structures import Structure, enumerate_tuples, eso_check, permute_evidence

from randomspecs import random_evidence, random_spec

FRIENDS = """
root fan/1 = 0.2.
define friends(x, y) <=> x = y | (fan(x) & fan(y)) | other(x, y).
root other/2 = 0.1.
"""
MARK = Vocabulary([Predicate("mark", 1)])

_capsys_ref = {}


@pytest.fixture(autouse=True)
def _keep_capsys(capsys):
    _capsys_ref["c"] = capsys
    yield
    _capsys_ref.clear()


def report(number: int, ok: bool, detail: str) -> None:
    line = f"criterion {number}: {'PASS' if ok else 'FAIL'}  {detail}"
    c = _capsys_ref.get("c")
    if c is None:
        print(line)
    else:
        with c.disabled():
            print("\n" + line)
    assert ok, line


class Timer:
    def __enter__(self):
        self.start = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.seconds = time.perf_counter() - self.start


# reference edge list for the friendship network over {a, b, c} = {0, 1, 2}
REFERENCE_EDGES = (
    [("fan", (x,), (x, y)) for x in range(3) for y in range(3) if x != y]
    + [("fan", (y,), (x, y)) for x in range(3) for y in range(3) if x != y]
    + [("other", (x, y), (x, y)) for x in range(3) for y in range(3)]
    + [("fan", (x,), (x, x)) for x in range(3)]
)


def test_criterion_1_friends_network():
    with Timer() as t:
        net = ground(parse_spec(FRIENDS), 3)
        counts = stats(net)
        edges = set(net.edges())
    want = {(GroundAtom(p, s), GroundAtom("friends", d)) for p, s, d in REFERENCE_EDGES}
    ok = counts == (21, 24, 12) and edges == want and t.seconds < 1
    report(1, ok, f"nodes/edges/roots={counts}, edge list matches={edges == want}, "
                  f"{t.seconds:.3f}s (< 1s)")


def _brute_force_friends(x: int, y: int) -> Fraction:
    """Independent enumeration of all 2^12 root assignments at n=3."""
    fan_a, other_a = Fraction(1, 5), Fraction(1, 10)
    total = Fraction(0)
    for bits in itertools.product((0, 1), repeat=12):
        fan, other = bits[:3], bits[3:]
        w = Fraction(1)
        for b in fan:
            w *= fan_a if b else 1 - fan_a
        for b in other:
            w *= other_a if b else 1 - other_a
        if x == y or (fan[x] and fan[y]) or other[3 * x + y]:
            total += w
    return total


def test_criterion_2_exact_inference():
    with Timer() as t:
        net = ground(parse_spec(FRIENDS), 3)
        p01 = event_probability(net, {GroundAtom("friends", (0, 1)): True})
        p00 = event_probability(net, {GroundAtom("friends", (0, 0)): True})
        b01, b00 = _brute_force_friends(0, 1), _brute_force_friends(0, 0)
    ok = (p01 == b01 == Fraction(17, 125) and p00 == b00 == 1 and t.seconds < 1)
    report(2, ok, f"engine {p01}, {p00}; brute force {b01}, {b00}; {t.seconds:.3f}s (< 1s)")


def _two_colourable(n: int, edges) -> bool:
    for colours in itertools.product((0, 1), repeat=n):
        if all(colours[u] != colours[v] for u, v in edges):
            return True
    return False


def test_criterion_3_eso_oracle():
    vocab, sentence = parse_eso("vocabulary edge/2.\n"
                                "exists partition/1: forall x, y: "
                                "edge(x, y) -> (partition(x) <-> !partition(y)).")
    pairs = enumerate_tuples(4, 2)
    disagreements = 0
    yes = 0
    with Timer() as t:
        for mask in range(1 << 16):
            rel = [pairs[b] for b in range(16) if mask >> b & 1]
            got = eso_check(sentence, Structure(4, vocab, {"edge": rel}))
            yes += got
            disagreements += got != _two_colourable(4, rel)
    ok = disagreements == 0 and t.seconds < 120
    report(3, ok, f"65536 relations, {yes} bipartite, {disagreements} disagreements, "
                  f"{t.seconds:.1f}s (< 120s)")


def test_criterion_4_codecs():
    vocab = Vocabulary([Predicate("a", 0), Predicate("r", 1), Predicate("e", 2)])
    rng = random.Random(2024)
    bad = 0
    with Timer() as t:
        for _ in range(1000):
            n = rng.randint(1, 4)
            s = Structure(n, vocab, {p.name: [u for u in enumerate_tuples(n, p.arity)
                                              if rng.random() < 0.5] for p in vocab})
            bits = encode_structure(s)
            bad += len(bits) != n + 1 + sum(n ** p.arity for p in vocab)
            bad += decode_structure(bits, vocab) != s
        for _ in range(1000):
            n = rng.randint(1, 4)
            ev = random_evidence(rng, vocab, n, rng.random())
            bits = encode_pair(n, ev, vocab)
            bad += len(bits) != n + 1 + 2 * sum(n ** p.arity for p in vocab)
            bad += decode_pair(bits, vocab) != (n, ev)
        rejected = 0
        for bits, decode in [("01" + "10" + "00" + "00", decode_pair), ("0000", decode_pair),
                             ("1" + "0" * 7, decode_pair), ("0000", decode_structure),
                             ("1011", decode_structure)]:
            try:
                decode(bits, vocab)
            except DecodeError:
                rejected += 1
    ok = bad == 0 and rejected == 5 and t.seconds < 10
    report(4, ok, f"2000 round trips, {bad} failures; {rejected}/5 malformed inputs rejected; "
                  f"{t.seconds:.2f}s (< 10s)")


def test_criterion_5_order_sentence():
    lt = Predicate("less_than", 2)
    f = build_order_formula(lt)
    counts = {}
    with Timer() as t:
        for n in (1, 2, 3):
            pairs = enumerate_tuples(n, 2)
            counts[n] = sum(
                evaluate(f, Structure(n, Vocabulary([lt]),
                                      {"less_than": [u for u, b in zip(pairs, bits) if b]}))
                for bits in itertools.product((0, 1), repeat=len(pairs)))
    ok = all(counts[n] == math.factorial(n) for n in counts) and t.seconds < 1
    report(5, ok, f"model counts {counts} vs n! = {[math.factorial(n) for n in counts]}, "
                  f"{t.seconds:.3f}s (< 1s)")


def test_criterion_6_capture_equivalence():
    results = {}
    with Timer() as t:
        for name in ("coin_or", "coin_and", "tie"):
            results[name] = verify_capture(bundled_machine(name), MARK, 2)
    mismatches = {k: len(r.mismatches) for k, r in results.items()}
    pieces = {k: len(r.rows) for k, r in results.items()}
    tie_rejected = all(r.machine_decision == r.structured_decision == Outcome.REJECT
                       for r in results["tie"].rows)
    ok = (all(v == 0 for v in mismatches.values()) and all(v == 3 + 9 for v in pieces.values())
          and tie_rejected and t.seconds < 300)
    report(6, ok, f"mismatches {mismatches} over {pieces} pairs; tie rejected on both sides: "
                  f"{tie_rejected}; {t.seconds:.1f}s (< 300s)")


def test_criterion_7_cross_check():
    compared = differing = 0
    with Timer() as t:
        for name in ("coin_or", "coin_and", "tie"):
            c = compile_machine(normalize_machine(bundled_machine(name)), MARK)
            assert c.layout.kt == 1          # T = 2 at n = 2
            net = ground(c.spec, 2)
            for ev in all_evidence(MARK, 2):
                given = {GroundAtom("valid"): True, **evidence_event(ev)}
                generic = conditional_probability(net, {GroundAtom("accepting"): True}, given)
                compared += 1
                differing += generic != structured_conditional(c, 2, ev)
    ok = compared == 27 and differing == 0 and t.seconds < 300
    report(7, ok, f"{compared} (machine, evidence) instances at n=2, T=2; {differing} differ; "
                  f"{t.seconds:.1f}s (< 300s)")


def test_criterion_8_isomorphism_invariance():
    rng = random.Random(8)
    differing = 0
    with Timer() as t:
        for _ in range(200):
            spec = random_spec(rng)
            n = rng.randint(1, 3)
            ev = random_evidence(rng, spec.inputs, n)
            perm = list(range(n))
            rng.shuffle(perm)
            a = decide_acceptance(spec, spec.query, n, ev)
            b = decide_acceptance(spec, spec.query, n, permute_evidence(ev, perm))
            differing += a != b
    ok = differing == 0 and t.seconds < 60
    report(8, ok, f"200 (spec, pair, permutation) triples, {differing} differ; "
                  f"{t.seconds:.1f}s (< 60s)")


def test_criterion_9_parallel_determinism():
    rng = random.Random(9)
    jobs = []
    net = ground(parse_spec(FRIENDS), 3)
    jobs.append((net, {GroundAtom("friends", (0, 1)): True}, {}))
    jobs.append((net, {GroundAtom("fan", (0,)): True}, {GroundAtom("friends", (0, 1)): True}))
    for _ in range(4):
        spec = random_spec(rng)
        n = 3
        g = ground(spec, n)
        given = {GroundAtom("B"): True, **evidence_event(random_evidence(rng, spec.inputs, n))}
        jobs.append((g, {GroundAtom("A"): True}, given))
    c = compile_machine(normalize_machine(bundled_machine("coin_or")), MARK)
    jobs.append((ground(c.spec, 2), {GroundAtom("accepting"): True}, {GroundAtom("valid"): True}))
    differing = 0
    for network, target, given in jobs:
        one = joint_and_marginal(network, target, given, jobs=1)
        eight = joint_and_marginal(network, target, given, jobs=8)
        differing += one != eight
    report(9, differing == 0, f"{len(jobs)} queries, jobs=1 vs jobs=8, {differing} differ")


if __name__ == "__main__":
    failed = 0
    for name, fn in sorted(globals().items()):
        if name.startswith("test_criterion_"):
            try:
                fn()
            except AssertionError:
                failed += 1
    sys.exit(1 if failed else 0)
