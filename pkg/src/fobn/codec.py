"""Bit-string codecs for structures and domain/evidence pairs.

Both start with ``0^n 1``.  A structure then lists one bit per grounding
(predicates in vocabulary order, tuples lexicographically); a pair lists two:
``00`` false, ``11`` true, ``01`` unassigned.  ``10`` is not a valid code.
"""

from __future__ import annotations

from .errors import DecodeError
from .logic import Vocabulary
from .structures import Evidence, Structure, enumerate_tuples

__all__ = ["encode_structure", "decode_structure", "encode_pair", "decode_pair",
           "structure_length", "pair_length", "pair_layout", "PAIR_CODES"]

PAIR_CODES = {False: "00", True: "11", None: "01"}
_DECODE_PAIR = {"00": False, "11": True, "01": None}


def structure_length(vocabulary: Vocabulary, n: int) -> int:
    return n + 1 + sum(n ** p.arity for p in vocabulary)


def pair_length(vocabulary: Vocabulary, n: int) -> int:
    return n + 1 + 2 * sum(n ** p.arity for p in vocabulary)


def pair_layout(vocabulary: Vocabulary, n: int) -> dict[str, int]:
    """Offset of each predicate's first code in a pair encoding."""
    offsets, pos = {}, n + 1
    for p in vocabulary:
        offsets[p.name] = pos
        pos += 2 * n ** p.arity
    return offsets


def encode_structure(structure: Structure) -> str:
    bits = ["0" * structure.n, "1"]
    for p in structure.vocabulary:
        rel = structure.relations[p.name]
        bits.extend("1" if t in rel else "0" for t in enumerate_tuples(structure.n, p.arity))
    return "".join(bits)


def _header(bits: str) -> int:
    if set(bits) - {"0", "1"}:
        raise DecodeError("bit strings may contain only '0' and '1'")
    n = bits.find("1")
    if n < 0:
        raise DecodeError("malformed header: no '1' terminating the leading zeros")
    if n == 0:
        raise DecodeError("malformed header: empty domain")
    return n


def decode_structure(bits: str, vocabulary: Vocabulary) -> Structure:
    n = _header(bits)
    want = structure_length(vocabulary, n)
    if len(bits) != want:
        raise DecodeError(f"length {len(bits)} does not match {want} for domain size {n}")
    pos = n + 1
    rels = {}
    for p in vocabulary:
        tuples = enumerate_tuples(n, p.arity)
        rels[p.name] = {t for t, b in zip(tuples, bits[pos:pos + len(tuples)]) if b == "1"}
        pos += len(tuples)
    return Structure(n, vocabulary, rels)


def encode_pair(n: int, evidence: Evidence, vocabulary: Vocabulary) -> str:
    if n < 1:
        raise ValueError("domain size must be at least 1")
    stray = evidence.predicates() - set(vocabulary.names)
    if stray:
        raise ValueError(f"evidence on predicates outside the input vocabulary: {sorted(stray)}")
    evidence.check(vocabulary, n)
    bits = ["0" * n, "1"]
    for p in vocabulary:
        bits.extend(PAIR_CODES[evidence.status(p.name, t)] for t in enumerate_tuples(n, p.arity))
    return "".join(bits)


def decode_pair(bits: str, vocabulary: Vocabulary) -> tuple[int, Evidence]:
    n = _header(bits)
    want = pair_length(vocabulary, n)
    if len(bits) != want:
        raise DecodeError(f"length {len(bits)} does not match {want} for domain size {n}")
    pos = n + 1
    values = {}
    for p in vocabulary:
        for t in enumerate_tuples(n, p.arity):
            code = bits[pos:pos + 2]
            if code not in _DECODE_PAIR:
                raise DecodeError(f"code {code} at position {pos} has no meaning")
            v = _DECODE_PAIR[code]
            if v is not None:
                values[(p.name, t)] = v
            pos += 2
    return n, Evidence(values)
