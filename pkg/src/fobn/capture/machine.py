"""Single-tape nondeterministic machines and majority-of-paths decisions.

Tape symbols are ``0``, ``1`` and ``_`` (blank).  After normalization every
(state, symbol) pair has exactly two ordered choices; choice bit 0 takes the
first, bit 1 the second, so a run of ``T`` steps is a choice string of length
``T`` and there are exactly ``2^T`` paths.

Machine file format::

    state q0 initial
    state qa accept
    state qr reject
    trans q0,* -> qa,*,S        # '*' reads any symbol / writes back the one read
    bounds kt=1 kp=auto
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass, field, replace
from fractions import Fraction
from functools import lru_cache
from typing import Iterator, Sequence

from ..errors import MachineError, ParseError, ResourceLimitError
from ..inference import Outcome

__all__ = ["SYMBOLS", "BLANK", "Transition", "NTMachine", "PathCount", "parse_machine",
           "machine_to_text", "normalize_machine", "is_normalized", "initial_tape", "step",
           "simulate", "count_paths", "majority_decision", "minimal_space_exponent",
           "DEFAULT_PATH_CAP"]

SYMBOLS = ("0", "1", "_")
BLANK = "_"
MOVES = {"L": -1, "R": 1, "S": 0}
DEFAULT_PATH_CAP = 1 << 22

_IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_]*$")


@dataclass(frozen=True)
class Transition:
    state: str
    write: str
    move: str

    def __str__(self):
        return f"{self.state},{self.write},{self.move}"


@dataclass(frozen=True)
class NTMachine:
    states: tuple[str, ...]
    initial: str
    accept: str
    reject: str
    transitions: dict = field(hash=False)   # (state, symbol) -> tuple[Transition, ...]
    kt: int = 1
    kp: int | None = None                   # None: chosen from the input length

    def __post_init__(self):
        object.__setattr__(self, "states", tuple(self.states))
        object.__setattr__(self, "transitions",
                           {k: tuple(v) for k, v in self.transitions.items()})
        for q in (self.initial, self.accept, self.reject):
            if q not in self.states:
                raise MachineError(f"state {q!r} is not declared")
        if self.accept == self.reject:
            raise MachineError("accept and reject states must differ")
        for (q, s), opts in self.transitions.items():
            if q not in self.states or s not in SYMBOLS:
                raise MachineError(f"transition from unknown pair ({q}, {s})")
            for t in opts:
                if t.state not in self.states or t.write not in SYMBOLS or t.move not in MOVES:
                    raise MachineError(f"bad transition from ({q}, {s}): {t}")
        if self.kt < 1 or (self.kp is not None and self.kp < 1):
            raise MachineError("time and space exponents must be positive")

    def time_bound(self, n: int) -> int:
        return n ** self.kt


@dataclass(frozen=True)
class PathCount:
    accepting: int
    total: int

    def __post_init__(self):
        if not 0 <= self.accepting <= self.total:
            raise ValueError("need 0 <= accepting <= total")

    @property
    def ratio(self) -> Fraction:
        return Fraction(self.accepting, self.total)

    def __add__(self, other: "PathCount") -> "PathCount":
        return PathCount(self.accepting + other.accepting, self.total + other.total)


# -- file format ----------------------------------------------------------------------

def parse_machine(text: str) -> NTMachine:
    states: list[str] = []
    roles: dict[str, str] = {}
    trans: dict[tuple[str, str], list[Transition]] = {}
    kt, kp = 1, None
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        words = line.split()
        try:
            if words[0] == "state":
                if len(words) not in (2, 3) or not _IDENT.match(words[1]):
                    raise ValueError("expected 'state NAME [initial|accept|reject]'")
                if words[1] in states:
                    raise ValueError(f"duplicate state {words[1]}")
                states.append(words[1])
                if len(words) == 3:
                    if words[2] not in ("initial", "accept", "reject"):
                        raise ValueError(f"unknown state role {words[2]!r}")
                    if words[2] in roles:
                        raise ValueError(f"second {words[2]} state")
                    roles[words[2]] = words[1]
            elif words[0] == "trans":
                m = re.fullmatch(r"trans\s+(\w+)\s*,\s*([01_*])\s*->\s*(\w+)\s*,\s*([01_*])\s*,\s*([LRS])",
                                 line)
                if m is None:
                    raise ValueError("expected 'trans q,s -> q2,s2,L|R|S'")
                q, s, q2, s2, mv = m.groups()
                for sym in (SYMBOLS if s == "*" else (s,)):
                    out = sym if s2 == "*" else s2
                    trans.setdefault((q, sym), []).append(Transition(q2, out, mv))
            elif words[0] == "bounds":
                for w in words[1:]:
                    key, _, value = w.partition("=")
                    if key == "kt":
                        kt = int(value)
                    elif key == "kp":
                        kp = None if value == "auto" else int(value)
                    else:
                        raise ValueError(f"unknown bound {key!r}")
            else:
                raise ValueError(f"unknown statement {words[0]!r}")
        except ValueError as exc:
            raise ParseError(str(exc), lineno, 1) from None
    for role in ("initial", "accept", "reject"):
        if role not in roles:
            raise ParseError(f"no {role} state declared")
    for (q, _), opts in trans.items():
        for t in opts:
            if t.state not in states or q not in states:
                raise ParseError(f"transition mentions undeclared state in {q} -> {t}")
    try:
        return NTMachine(tuple(states), roles["initial"], roles["accept"], roles["reject"],
                         {k: tuple(v) for k, v in trans.items()}, kt, kp)
    except MachineError as exc:
        raise ParseError(str(exc)) from None


def machine_to_text(m: NTMachine) -> str:
    lines = []
    role = {m.initial: " initial", m.accept: " accept", m.reject: " reject"}
    for q in m.states:
        lines.append(f"state {q}{role.get(q, '')}")
    for q in m.states:
        for s in SYMBOLS:
            for t in m.transitions.get((q, s), ()):
                lines.append(f"trans {q},{s} -> {t.state},{t.write},{t.move}")
    lines.append(f"bounds kt={m.kt} kp={'auto' if m.kp is None else m.kp}")
    return "\n".join(lines) + "\n"


# -- normalization ----------------------------------------------------------------------

def normalize_machine(m: NTMachine) -> NTMachine:
    """Exactly two ordered choices everywhere; halting states become absorbing.

    A singleton choice is duplicated.  A non-halting pair without transitions
    moves to the reject state in place.  More than two choices is an error:
    split such branches into a binary tree by hand.
    """
    out: dict[tuple[str, str], tuple[Transition, Transition]] = {}
    for q in m.states:
        for s in SYMBOLS:
            if q in (m.accept, m.reject):
                t = Transition(q, s, "S")
                out[(q, s)] = (t, t)
                continue
            opts = m.transitions.get((q, s), ())
            if len(opts) > 2:
                raise MachineError(f"({q}, {s}) has {len(opts)} choices; split it into "
                                   "binary branches before loading")
            if not opts:
                t = Transition(m.reject, s, "S")
                out[(q, s)] = (t, t)
            elif len(opts) == 1:
                out[(q, s)] = (opts[0], opts[0])
            else:
                out[(q, s)] = (opts[0], opts[1])
    return replace(m, transitions=out)


def is_normalized(m: NTMachine) -> bool:
    for q in m.states:
        for s in SYMBOLS:
            opts = m.transitions.get((q, s))
            if opts is None or len(opts) != 2:
                return False
            if q in (m.accept, m.reject) and any(t != Transition(q, s, "S") for t in opts):
                return False
    return True


def _normalized(m: NTMachine) -> NTMachine:
    return m if is_normalized(m) else normalize_machine(m)


# -- running ------------------------------------------------------------------------------

def minimal_space_exponent(length: int, n: int) -> int:
    """Smallest k >= 1 with n^k >= length (1 when n == 1: a single cell is all there is)."""
    if n == 1:
        return 1
    k = 1
    while n ** k < length:
        k += 1
    return k


def initial_tape(input_bits: str, cells: int) -> tuple[str, ...]:
    bits = input_bits[:cells]
    return tuple(bits) + (BLANK,) * (cells - len(bits))


def step(m: NTMachine, state: str, head: int, tape: tuple[str, ...], bit: int,
         mode: str = "reject") -> tuple[str, int, tuple[str, ...]]:
    """One transition.  Moving off either end rejects in place (``mode='reject'``)
    or keeps the head at the edge (``mode='clamp'``)."""
    t = m.transitions[(state, tape[head])][bit]
    tape = tape[:head] + (t.write,) + tape[head + 1:]
    new = head + MOVES[t.move]
    if 0 <= new < len(tape):
        return t.state, new, tape
    if mode == "reject":
        return m.reject, head, tape
    if mode == "clamp":
        return t.state, head, tape
    raise ValueError(f"unknown boundary mode {mode!r}")


def simulate(m: NTMachine, tape: Sequence[str], choices: Sequence[int],
             mode: str = "reject") -> list[tuple[str, int, tuple[str, ...]]]:
    """Configurations (state, head, tape) at times 0..len(choices)."""
    m = _normalized(m)
    conf = (m.initial, 0, tuple(tape))
    trace = [conf]
    for bit in choices:
        conf = step(m, *conf, bit, mode)
        trace.append(conf)
    return trace


def choice_strings(T: int) -> Iterator[tuple[int, ...]]:
    return itertools.product((0, 1), repeat=T)


def count_paths(machine: NTMachine, n: int, input_bits: str, *, kp: int | None = None,
                mode: str = "reject", cap: int = DEFAULT_PATH_CAP) -> PathCount:
    """Accepting paths among all 2^T choice strings, T = n^kt.

    The tape has n^kp cells; ``kp`` defaults to the machine's own exponent,
    else the smallest one that fits ``input_bits``.
    """
    m = _normalized(machine)
    if n < 1:
        raise ValueError("domain size must be at least 1")
    T = m.time_bound(n)
    if T > 62 or (1 << T) > cap:
        raise ResourceLimitError(f"2^{T} computation paths exceed the cap {cap}")
    if kp is None:
        kp = m.kp if m.kp is not None else minimal_space_exponent(len(input_bits), n)
    cells = n ** kp

    @lru_cache(maxsize=None)
    def accepting(state: str, head: int, tape: tuple[str, ...], left: int) -> int:
        if state == m.accept:
            return 1 << left
        if state == m.reject:
            return 0
        if left == 0:
            return 0
        return sum(accepting(*step(m, state, head, tape, b, mode), left - 1) for b in (0, 1))

    acc = accepting(m.initial, 0, initial_tape(input_bits, cells), T)
    return PathCount(acc, 1 << T)


def majority_decision(count: PathCount) -> Outcome:
    """Accept iff strictly more than half of the paths accept."""
    if count.total <= 0:
        raise ValueError("no computation paths")
    return Outcome.ACCEPT if 2 * count.accepting > count.total else Outcome.REJECT
