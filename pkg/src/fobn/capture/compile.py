"""Compiling a machine into a specification whose acceptance query counts its paths.

Every input predicate and every auxiliary predicate is a root with
probability 1/2.  Two arity-0 predicates are defined:

* ``valid`` holds when ``less_than`` is a strict linear order and the
  auxiliaries spell out one run of the machine on the pair encoding of the
  input, read through that order;
* ``accepting`` holds when the run ends in the accept state.

Time points and tape cells are tuples of length ``kt`` and ``kp``, ranked
lexicographically under ``less_than``.  Given an order, a complete input and
a choice string, exactly one assignment of the remaining auxiliaries makes
``valid`` true, so P(accepting | valid, E) is the fraction of accepting
(order, completion, choice string) triples.

The initial-tape axiom is instantiated separately for each supported
domain size; on other sizes ``valid`` is unsatisfiable.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from ..codec import encode_pair, pair_layout, pair_length
from ..errors import ResourceLimitError, SpecError
from ..logic import (And, Atom, Eq, Exists, Forall, Formula, Iff, Implies, Not, Predicate, Var,
                     Vocabulary, compile_formula, conj, disj, exists, forall)
from ..spec import AcceptanceQuery, Definition, NetworkSpec, RootDeclaration, validate_spec
from ..structures import Evidence, Structure, enumerate_tuples, permute_evidence
from .machine import (SYMBOLS, NTMachine, choice_strings, initial_tape, is_normalized,
                      minimal_space_exponent, simulate)

__all__ = ["CaptureLayout", "CompiledCapture", "build_order_formula", "compile_machine",
           "structured_conditional", "per_order_ratios", "witness_structure",
           "DEFAULT_STRUCTURED_CAP"]

DEFAULT_STRUCTURED_CAP = 1 << 22
HALF = Fraction(1, 2)
_SYMBOL_NAMES = {"0": "0", "1": "1", "_": "blank"}


@dataclass(frozen=True)
class CaptureLayout:
    sigma: Vocabulary
    kt: int
    kp: int
    sizes: tuple[int, ...]
    mode: str
    states: dict = field(hash=False)       # machine state -> predicate name
    tape: dict = field(hash=False)         # symbol -> predicate name
    order: str = "less_than"
    choice: str = "choice"
    head: str = "head"
    valid: str = "valid"
    accepting: str = "accepting"

    def auxiliary(self) -> list[Predicate]:
        kt, kp = self.kt, self.kp
        preds = [Predicate(self.order, 2), Predicate(self.choice, kt)]
        preds += [Predicate(name, kt) for name in self.states.values()]
        preds.append(Predicate(self.head, kt + kp))
        preds += [Predicate(self.tape[s], kt + kp) for s in SYMBOLS]
        return preds

    def root_vocabulary(self) -> Vocabulary:
        return self.sigma + self.auxiliary()

    def root_count(self, n: int) -> int:
        kt, kp = self.kt, self.kp
        return (sum(n ** p.arity for p in self.sigma) + n ** 2 + (1 + len(self.states)) * n ** kt
                + 4 * n ** (kt + kp))


@dataclass(frozen=True)
class CompiledCapture:
    spec: NetworkSpec
    query: AcceptanceQuery
    layout: CaptureLayout
    machine: NTMachine = field(hash=False)


class _Builder:
    """Formula macros over the layout's ``less_than`` predicate."""

    def __init__(self, layout: CaptureLayout):
        self.L = layout
        self._k = 0

    def fresh(self, base: str = "z") -> str:
        self._k += 1
        return f"{base}{self._k}"

    def fresh_tuple(self, base: str, k: int) -> list[str]:
        return [self.fresh(base) for _ in range(k)]

    def lt(self, x: str, y: str) -> Formula:
        return Atom(self.L.order, (Var(x), Var(y)))

    def first(self, x: str) -> Formula:
        z = self.fresh()
        return Not(Exists(z, self.lt(z, x)))

    def last(self, x: str) -> Formula:
        z = self.fresh()
        return Not(Exists(z, self.lt(x, z)))

    def succ(self, x: str, y: str) -> Formula:
        z = self.fresh()
        return And((self.lt(x, y), Not(Exists(z, And((self.lt(x, z), self.lt(z, y)))))))

    def tfirst(self, xs: Sequence[str]) -> Formula:
        return conj(*(self.first(x) for x in xs))

    def tlast(self, xs: Sequence[str]) -> Formula:
        return conj(*(self.last(x) for x in xs))

    def teq(self, xs: Sequence[str], ys: Sequence[str]) -> Formula:
        return conj(*(Eq(Var(x), Var(y)) for x, y in zip(xs, ys)))

    def tsucc(self, xs: Sequence[str], ys: Sequence[str]) -> Formula:
        """ys is the lexicographic successor of xs."""
        k = len(xs)
        options = []
        for j in range(k):
            parts = [Eq(Var(xs[i]), Var(ys[i])) for i in range(j)]
            parts.append(self.succ(xs[j], ys[j]))
            for i in range(j + 1, k):
                parts.append(self.last(xs[i]))
                parts.append(self.first(ys[i]))
            options.append(conj(*parts))
        return disj(*options)

    def rank_el(self, x: str, d: int) -> Formula:
        """x has exactly d predecessors."""
        if d == 0:
            return self.first(x)
        y = self.fresh("y")
        return Exists(y, And((self.succ(y, x), self.rank_el(y, d - 1))))

    def rank_tuple(self, xs: Sequence[str], c: int, n: int) -> Formula | None:
        """Tuple xs has lexicographic rank c; None stands for 'true' (empty tuple)."""
        if not xs:
            return None
        digits = []
        for _ in xs:
            digits.append(c % n)
            c //= n
        digits.reverse()
        return conj(*(self.rank_el(x, d) for x, d in zip(xs, digits)))

    def size_is(self, n: int) -> Formula:
        xs = self.fresh_tuple("e", n)
        y = self.fresh("y")
        distinct = [Not(Eq(Var(a), Var(b))) for a, b in itertools.combinations(xs, 2)]
        cover = Forall(y, disj(*(Eq(Var(y), Var(x)) for x in xs)))
        return exists(xs, conj(*distinct, cover))

    def atom(self, name: str, *groups: Sequence[str]) -> Formula:
        return Atom(name, tuple(Var(v) for g in groups for v in g))


def build_order_formula(order: Predicate) -> Formula:
    """Closed formula satisfied exactly by the strict linear orders."""
    if order.arity != 2:
        raise ValueError("the order predicate must be binary")

    def lt(a, b):
        return Atom(order.name, (Var(a), Var(b)))
    irreflexive = Forall("x", Not(lt("x", "x")))
    transitive = forall("xyz", Implies(And((lt("x", "y"), lt("y", "z"))), lt("x", "z")))
    total = forall("xy", Implies(Not(Eq(Var("x"), Var("y"))), disj(lt("x", "y"), lt("y", "x"))))
    return And((irreflexive, transitive, total))


def _space_exponent(machine: NTMachine, sigma: Vocabulary, sizes: Sequence[int]) -> int:
    if machine.kp is not None:
        return machine.kp
    return max([minimal_space_exponent(pair_length(sigma, n), n) for n in sizes if n >= 2] or [1])


def compile_machine(machine: NTMachine, sigma: Vocabulary, *, sizes: Sequence[int] = (1, 2),
                    mode: str = "reject") -> CompiledCapture:
    """Specification, query and layout for ``machine`` over input vocabulary ``sigma``.

    ``sizes`` are the domain sizes the initial-tape axiom covers; the space
    exponent, unless fixed by the machine, is the least one whose tape holds
    the pair encoding at every such size.
    """
    if not is_normalized(machine):
        raise ValueError("compile_machine needs a normalized machine")
    if not len(sigma):
        raise ValueError("the input vocabulary must be non-empty")
    if mode not in ("reject", "clamp"):
        raise ValueError(f"unknown boundary mode {mode!r}")
    sizes = tuple(sorted(set(sizes)))
    if not sizes or sizes[0] < 1:
        raise ValueError("sizes must be positive")
    kp = _space_exponent(machine, sigma, sizes)
    layout = CaptureLayout(sigma, machine.kt, kp, sizes, mode,
                           {q: f"state_{q}" for q in machine.states},
                           {s: f"tape_{_SYMBOL_NAMES[s]}" for s in SYMBOLS})
    aux = layout.auxiliary()
    names = [p.name for p in aux] + [layout.valid, layout.accepting]
    if len(set(names)) != len(names):
        raise SpecError("machine state names collide with auxiliary predicates")
    clash = set(names) & set(sigma.names)
    if clash:
        raise SpecError(f"input predicates collide with auxiliary names: {sorted(clash)}")

    b = _Builder(layout)
    valid_body = _valid_formula(b, machine, layout)
    accept_body = _accept_formula(b, machine, layout)
    vocab = sigma + aux + [Predicate(layout.valid, 0), Predicate(layout.accepting, 0)]
    roots = [RootDeclaration(p, HALF) for p in list(sigma) + aux]
    defs = [Definition(Predicate(layout.valid, 0), (), valid_body),
            Definition(Predicate(layout.accepting, 0), (), accept_body)]
    query = AcceptanceQuery((layout.accepting,), (layout.valid,))
    spec = NetworkSpec(vocab, tuple(roots), tuple(defs), sigma, query)
    report = validate_spec(spec)
    if not report.ok:     # pragma: no cover - construction bug
        raise SpecError("; ".join(map(str, report.errors)))
    return CompiledCapture(spec, query, layout, machine)


def _cell_condition(b: _Builder, layout: CaptureLayout, n: int, c: int,
                    T: Sequence[str], P: Sequence[str]) -> Formula:
    tape = layout.tape
    sigma = layout.sigma
    if c < n:
        return b.atom(tape["0"], T, P)
    if c == n:
        return b.atom(tape["1"], T, P)
    if c >= pair_length(sigma, n):
        return b.atom(tape["_"], T, P)
    offsets = pair_layout(sigma, n)
    for p in sigma:
        o = offsets[p.name]
        if o <= c < o + 2 * n ** p.arity:
            rho = (c - o) // 2
            us = b.fresh_tuple("a", p.arity)
            hit = b.atom(p.name, us)
            rank = b.rank_tuple(us, rho, n)
            bit = hit if rank is None else exists(us, And((rank, hit)))
            return And((Implies(bit, b.atom(tape["1"], T, P)),
                        Implies(Not(bit), b.atom(tape["0"], T, P))))
    raise AssertionError("cell outside every block")


def _valid_formula(b: _Builder, m: NTMachine, layout: CaptureLayout) -> Formula:
    kt, kp = layout.kt, layout.kp
    T = ["t"] if kt == 1 else [f"t{i}" for i in range(1, kt + 1)]
    U = ["u"] if kt == 1 else [f"u{i}" for i in range(1, kt + 1)]
    P = [f"p{i}" for i in range(1, kp + 1)]
    Q = [f"q{i}" for i in range(1, kp + 1)]
    st = lambda q, ts: b.atom(layout.states[q], ts)
    head = lambda ts, ps: b.atom(layout.head, ts, ps)
    tape = lambda s, ts, ps: b.atom(layout.tape[s], ts, ps)
    choice = lambda ts: b.atom(layout.choice, ts)

    order = build_order_formula(Predicate(layout.order, 2))
    supported = disj(*(b.size_is(n) for n in layout.sizes))

    one_state = forall(T, conj(disj(*(st(q, T) for q in m.states)),
                               *(Not(And((st(q, T), st(r, T))))
                                 for q, r in itertools.combinations(m.states, 2))))
    one_head = forall(T, And((exists(P, head(T, P)),
                              forall(P + Q, Implies(And((head(T, P), head(T, Q))), b.teq(P, Q))))))
    one_symbol = forall(T + P, conj(disj(*(tape(s, T, P) for s in SYMBOLS)),
                                    *(Not(And((tape(s, T, P), tape(r, T, P))))
                                      for s, r in itertools.combinations(SYMBOLS, 2))))

    init_cases = []
    for n in layout.sizes:
        cells = [forall(P, Implies(b.rank_tuple(P, c, n), _cell_condition(b, layout, n, c, T, P)))
                 for c in range(n ** kp)]
        init_cases.append(Implies(b.size_is(n), conj(*cells)))
    initial = forall(T, Implies(b.tfirst(T), conj(
        st(m.initial, T),
        forall(P, Iff(head(T, P), b.tfirst(P))),
        *init_cases)))

    local = []
    moving = {"S": [], "R": [], "L": []}
    for q in m.states:
        for s in SYMBOLS:
            for bit, t in enumerate(m.transitions[(q, s)]):
                cond = conj(st(q, T), tape(s, T, P), choice(T) if bit else Not(choice(T)))
                local.append(Implies(cond, tape(t.write, U, P)))
                moving[t.move].append(cond)
                if t.move == "S" or layout.mode == "clamp":
                    local.append(Implies(cond, st(t.state, U)))
                else:
                    edge = b.tlast(P) if t.move == "R" else b.tfirst(P)
                    local.append(Implies(And((cond, Not(edge))), st(t.state, U)))
                    local.append(Implies(And((cond, edge)), st(m.reject, U)))
    if moving["S"]:
        local.append(Implies(disj(*moving["S"]), head(U, P)))
    if moving["R"]:
        local.append(Implies(disj(*moving["R"]), And((
            Implies(Not(b.tlast(P)), forall(Q, Implies(b.tsucc(P, Q), head(U, Q)))),
            Implies(b.tlast(P), head(U, P))))))
    if moving["L"]:
        local.append(Implies(disj(*moving["L"]), And((
            Implies(Not(b.tfirst(P)), forall(Q, Implies(b.tsucc(Q, P), head(U, Q)))),
            Implies(b.tfirst(P), head(U, P))))))
    frame = conj(*(Iff(tape(s, U, P), tape(s, T, P)) for s in SYMBOLS))
    steps = forall(T + U, Implies(b.tsucc(T, U), And((
        forall(P, Implies(head(T, P), conj(*local))),
        forall(P, Implies(Not(head(T, P)), frame))))))

    return And((order, supported, initial, one_state, one_head, one_symbol, steps))


def _accept_formula(b: _Builder, m: NTMachine, layout: CaptureLayout) -> Formula:
    kt, kp = layout.kt, layout.kp
    T = ["t"] if kt == 1 else [f"t{i}" for i in range(1, kt + 1)]
    P = [f"p{i}" for i in range(1, kp + 1)]
    options = []
    for q in m.states:
        for s in SYMBOLS:
            for bit, t in enumerate(m.transitions[(q, s)]):
                if t.state != m.accept:
                    continue
                c = b.atom(layout.choice, T)
                cond = [b.atom(layout.states[q], T), b.atom(layout.tape[s], T, P),
                        c if bit else Not(c)]
                if layout.mode == "reject" and t.move == "R":
                    cond.append(Not(b.tlast(P)))
                elif layout.mode == "reject" and t.move == "L":
                    cond.append(Not(b.tfirst(P)))
                options.append(conj(*cond))
    if not options:
        options = [Not(Eq(Var(P[0]), Var(P[0])))]
    return exists(T, And((b.tlast(T), exists(P, And((b.atom(layout.head, T, P), disj(*options)))))))


# -- direct counting -----------------------------------------------------------------------

def _digits(c: int, n: int, k: int) -> list[int]:
    out = []
    for _ in range(k):
        out.append(c % n)
        c //= n
    return out[::-1]


def witness_structure(compiled: CompiledCapture, n: int, order: Sequence[int],
                      completion: Evidence, choices: Sequence[int]) -> Structure:
    """The root interpretation encoding the run fixed by (order, completion, choices).

    ``order[i]`` is the element of rank i.
    """
    L = compiled.layout
    m = compiled.machine
    rank = [0] * n
    for i, e in enumerate(order):
        rank[e] = i
    cells = n ** L.kp
    bits = encode_pair(n, permute_evidence(completion, rank), L.sigma)
    trace = simulate(m, initial_tape(bits, cells), choices, L.mode)

    def tup(c: int, k: int) -> tuple[int, ...]:
        return tuple(order[d] for d in _digits(c, n, k))

    rels: dict[str, set] = {p.name: set() for p in L.root_vocabulary()}
    for (p, t), v in completion.values.items():
        if v:
            rels[p].add(t)
    rels[L.order] = {(order[i], order[j]) for i in range(n) for j in range(i + 1, n)}
    for i in range(n ** L.kt):
        ts = tup(i, L.kt)
        state, head, tape = trace[i]
        if choices[i]:
            rels[L.choice].add(ts)
        rels[L.states[state]].add(ts)
        rels[L.head].add(ts + tup(head, L.kp))
        for c in range(cells):
            rels[L.tape[tape[c]]].add(ts + tup(c, L.kp))
    return Structure(n, L.root_vocabulary(), rels)


def _runs(compiled: CompiledCapture, n: int, evidence: Evidence, cap: int):
    L = compiled.layout
    T = n ** L.kt
    free = sum(n ** p.arity for p in L.sigma) - len(evidence)
    work = math.factorial(n) * (1 << free) * (1 << T) if T < 63 else cap + 1
    if work > cap:
        raise ResourceLimitError(f"structured count needs {work} runs (cap {cap})")
    cells = n ** L.kp
    for order in itertools.permutations(range(n)):
        rank = [0] * n
        for i, e in enumerate(order):
            rank[e] = i
        for comp in evidence.completions(L.sigma, n):
            tape = initial_tape(encode_pair(n, permute_evidence(comp, rank), L.sigma), cells)
            for ch in choice_strings(T):
                yield order, comp, ch, simulate(compiled.machine, tape, ch, L.mode)


def structured_conditional(compiled: CompiledCapture, n: int, evidence: Evidence, *,
                           check_witness: bool = False,
                           cap: int = DEFAULT_STRUCTURED_CAP) -> Fraction | None:
    """P(accepting | valid, evidence) by counting (order, completion, choices) triples.

    Each triple is simulated forward to its run; with ``check_witness`` the
    run's root interpretation is also checked against the compiled formulas.
    None when no triple is consistent (unsupported domain size).
    """
    L = compiled.layout
    evidence.check(L.sigma, n)
    if n not in L.sizes:
        return None
    accepted = total = 0
    if check_witness:
        valid = compile_formula(compiled.spec.definition(L.valid).body, n)
        accepting = compile_formula(compiled.spec.definition(L.accepting).body, n)
    for order, comp, ch, trace in _runs(compiled, n, evidence, cap):
        total += 1
        ok = trace[-1][0] == compiled.machine.accept
        accepted += ok
        if check_witness:
            rels = witness_structure(compiled, n, order, comp, ch).relations
            if not valid(rels, {}):
                raise AssertionError(f"witness for order {order}, choices {ch} is not valid")
            if accepting(rels, {}) != ok:
                raise AssertionError(f"acceptance disagrees for order {order}, choices {ch}")
    return Fraction(accepted, total) if total else None


def per_order_ratios(compiled: CompiledCapture, n: int, evidence: Evidence,
                     cap: int = DEFAULT_STRUCTURED_CAP) -> dict[tuple[int, ...], Fraction]:
    """Accepting fraction for each linear order separately."""
    acc: dict[tuple[int, ...], list[int]] = {}
    for order, _, _, trace in _runs(compiled, n, evidence, cap):
        a = acc.setdefault(order, [0, 0])
        a[0] += trace[-1][0] == compiled.machine.accept
        a[1] += 1
    return {o: Fraction(a, t) for o, (a, t) in acc.items()}


def all_evidence(sigma: Vocabulary, n: int):
    """All 3^(sum n^arity) evidence pieces over ``sigma``."""
    slots = [(p.name, t) for p in sigma for t in enumerate_tuples(n, p.arity)]
    for statuses in itertools.product((None, False, True), repeat=len(slots)):
        yield Evidence({k: v for k, v in zip(slots, statuses) if v is not None})
