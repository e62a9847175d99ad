"""Exact inference over grounded networks.

Defined atoms are deterministic functions of the root atoms, so every
probability is a sum over root assignments of the product of the root weights.
Two engines compute that sum:

* ``exhaustive`` walks all 2^r root assignments and completes each one;
* ``search`` walks the same assignment tree depth first but evaluates the
  event in three-valued logic on partial assignments.  A subtree whose event
  is already false contributes nothing; one whose event is already true
  contributes its prefix weight (the remaining roots sum to one).  Roots
  forced by a constraint with a single open root are assigned directly.

Both return identical rationals; the search engine is the default.
"""

from __future__ import annotations

import enum
import itertools
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

from .errors import FobnError, ResourceLimitError
from .grounder import GroundAtom, GroundedNetwork, ground
from .logic import And, Atom, Eq, Formula, Iff, Implies, Not, Or
from .spec import AcceptanceQuery, NetworkSpec
from .structures import Evidence, Structure

__all__ = ["InconsistentEventError", "Outcome", "AcceptanceDecision", "complete_from_roots",
           "event_probability", "conditional_probability", "joint_and_marginal",
           "decide_acceptance", "count_models", "DEFAULT_ENUM_CAP", "DEFAULT_EXHAUSTIVE_CAP"]

DEFAULT_EXHAUSTIVE_CAP = 1 << 20
DEFAULT_ENUM_CAP = 5_000_000     # search-tree nodes

Event = Mapping[GroundAtom, bool]


class InconsistentEventError(FobnError, ValueError):
    pass


class Outcome(enum.Enum):
    ACCEPT = "accept"
    REJECT = "reject"
    UNDEFINED = "undefined"


@dataclass(frozen=True)
class AcceptanceDecision:
    outcome: Outcome
    probability: Fraction | None = None


# -- compiled ground expressions -------------------------------------------------------
#
# ('v', i) node i; ('not', e); ('and', (e, ...)); ('or', (e, ...)); ('iff', a, b);
# TRUE / FALSE constants.

TRUE = ("const", True)
FALSE = ("const", False)


def _compile_ground(f: Formula, index: Mapping[GroundAtom, int]):
    if isinstance(f, Atom):
        return ("v", index[GroundAtom(f.pred, tuple(t.value for t in f.args))])
    if isinstance(f, Eq):
        return TRUE if f.left.value == f.right.value else FALSE
    if isinstance(f, Not):
        return ("not", _compile_ground(f.body, index))
    if isinstance(f, And):
        return ("and", tuple(_compile_ground(c, index) for c in f.items))
    if isinstance(f, Or):
        return ("or", tuple(_compile_ground(c, index) for c in f.items))
    if isinstance(f, Implies):
        return ("or", (("not", _compile_ground(f.left, index)), _compile_ground(f.right, index)))
    if isinstance(f, Iff):
        return ("iff", _compile_ground(f.left, index), _compile_ground(f.right, index))
    raise TypeError(f"not a ground formula: {f!r}")


class _Compiled:
    """Per-network compiled definitions, cached on the network object."""

    def __init__(self, network: GroundedNetwork):
        self.network = network
        self.exprs = [None if node.is_root else _compile_ground(node.formula, network.index)
                      for node in network.nodes]
        self.alpha = [node.alpha for node in network.nodes]
        self._support: dict[int, frozenset[int]] = {}

    def root_support(self, i: int) -> frozenset[int]:
        """Root nodes that node ``i`` depends on."""
        got = self._support.get(i)
        if got is None:
            e = self.exprs[i]
            got = frozenset((i,)) if e is None else self.expr_support(e)
            self._support[i] = got
        return got

    def expr_support(self, e) -> frozenset[int]:
        out: set[int] = set()
        stack = [e]
        while stack:
            x = stack.pop()
            tag = x[0]
            if tag == "v":
                out |= self.root_support(x[1])
            elif tag == "not":
                stack.append(x[1])
            elif tag in ("and", "or"):
                stack.extend(x[1])
            elif tag == "iff":
                stack.extend((x[1], x[2]))
        return frozenset(out)


def _compiled(network: GroundedNetwork) -> _Compiled:
    c = getattr(network, "_compiled", None)
    if c is None:
        c = _Compiled(network)
        network._compiled = c
    return c


def _eval2(e, val: list, exprs) -> bool:
    tag = e[0]
    if tag == "v":
        i = e[1]
        v = val[i]
        if v is None:
            v = _eval2(exprs[i], val, exprs)
            val[i] = v
        return v
    if tag == "not":
        return not _eval2(e[1], val, exprs)
    if tag == "and":
        return all(_eval2(x, val, exprs) for x in e[1])
    if tag == "or":
        return any(_eval2(x, val, exprs) for x in e[1])
    if tag == "iff":
        return _eval2(e[1], val, exprs) == _eval2(e[2], val, exprs)
    return e[1]


def _eval3(e, val: list, exprs):
    """Kleene evaluation; ``None`` is unknown.  Defined nodes are recomputed."""
    tag = e[0]
    if tag == "v":
        i = e[1]
        ex = exprs[i]
        return val[i] if ex is None else _eval3(ex, val, exprs)
    if tag == "not":
        v = _eval3(e[1], val, exprs)
        return None if v is None else not v
    if tag == "and":
        out = True
        for x in e[1]:
            v = _eval3(x, val, exprs)
            if v is False:
                return False
            if v is None:
                out = None
        return out
    if tag == "or":
        out = False
        for x in e[1]:
            v = _eval3(x, val, exprs)
            if v is True:
                return True
            if v is None:
                out = None
        return out
    if tag == "iff":
        a = _eval3(e[1], val, exprs)
        if a is None:
            return None
        b = _eval3(e[2], val, exprs)
        return None if b is None else a == b
    return e[1]


def _negate(e):
    if e[0] == "not":
        return e[1]
    if e[0] == "const":
        return FALSE if e[1] else TRUE
    return ("not", e)


def _split(e, exprs) -> list:
    """Break a required-true expression into a list of required-true pieces."""
    out: list = []
    stack = [e]
    while stack:
        x = stack.pop()
        tag = x[0]
        if tag == "const":
            if not x[1]:
                out.append(FALSE)
            continue
        if tag == "and":
            stack.extend(reversed(x[1]))
            continue
        if tag == "v" and exprs[x[1]] is not None:
            stack.append(exprs[x[1]])
            continue
        if tag == "not":
            y = x[1]
            if y[0] == "not":
                stack.append(y[1])
                continue
            if y[0] == "or":
                stack.extend(reversed([_negate(z) for z in y[1]]))
                continue
            if y[0] == "v" and exprs[y[1]] is not None:
                stack.append(_negate(exprs[y[1]]))
                continue
            if y[0] == "const":
                stack.append(_negate(y))
                continue
        if tag == "or":
            ands = [k for k, z in enumerate(x[1]) if z[0] == "and"]
            if len(ands) == 1:
                k = ands[0]
                rest = x[1][:k] + x[1][k + 1:]
                # a | (b1 & b2) == (a | b1) & (a | b2)
                stack.extend(reversed([("or", rest + (b,)) for b in x[1][k][1]]))
                continue
        if tag == "iff":
            a, b = x[1], x[2]
            stack.extend((("or", (_negate(b), a)), ("or", (_negate(a), b))))
            continue
        out.append(x)
    return out


def _literal_exprs(event: Event, network: GroundedNetwork) -> list:
    exprs = []
    for atom, value in event.items():
        i = network._idx(atom)
        exprs.append(("v", i) if value else ("not", ("v", i)))
    return exprs


# -- complete interpretations -----------------------------------------------------------

def complete_from_roots(network: GroundedNetwork, root_assignment: Mapping[GroundAtom, bool]) -> Structure:
    """The total interpretation fixed by a full root assignment."""
    comp = _compiled(network)
    val: list = [None] * len(network.nodes)
    for atom, v in root_assignment.items():
        i = network._idx(atom)
        if not network.nodes[i].is_root:
            raise ValueError(f"{atom} is not a root atom")
        val[i] = bool(v)
    missing = [network.nodes[i].atom for i in network.roots if val[i] is None]
    if missing:
        raise ValueError(f"root assignment misses {', '.join(map(str, missing[:5]))}")
    for i in network.topo:
        if val[i] is None:
            val[i] = _eval2(comp.exprs[i], val, comp.exprs)
    rels: dict[str, set] = {p.name: set() for p in network.spec.vocabulary}
    for node, v in zip(network.nodes, val):
        if v:
            rels[node.atom.pred].add(node.atom.args)
    return Structure(network.n, network.spec.vocabulary, rels)


def _weight(alpha: Fraction, v: bool) -> Fraction:
    return alpha if v else 1 - alpha


def _exhaustive(network: GroundedNetwork, given: list, target: list,
                cap: int) -> tuple[Fraction, Fraction]:
    comp = _compiled(network)
    roots = network.roots
    if (1 << len(roots)) > cap:
        raise ResourceLimitError(f"exhaustive enumeration over 2^{len(roots)} root assignments "
                                 f"(cap {cap})")
    z_given = Fraction(0)
    z_joint = Fraction(0)
    for bits in itertools.product((True, False), repeat=len(roots)):
        val: list = [None] * len(network.nodes)
        w = Fraction(1)
        for i, b in zip(roots, bits):
            val[i] = b
            w *= _weight(comp.alpha[i], b)
        if not w:
            continue
        if all(_eval2(e, val, comp.exprs) for e in given):
            z_given += w
            if all(_eval2(e, val, comp.exprs) for e in target):
                z_joint += w
    return z_given, z_joint


# -- pruned search ----------------------------------------------------------------------

class _Search:
    def __init__(self, network: GroundedNetwork, given: list, target: list, cap: int):
        comp = _compiled(network)
        self.exprs = comp.exprs
        self.alpha = comp.alpha
        self.cap = cap
        self.visited = 0
        cons = []
        for e in given:
            cons.extend(_split(e, self.exprs))
        self.n_given = len(cons)
        for e in target:
            cons.extend(_split(e, self.exprs))
        self.cons = cons
        self.support = [sorted(comp.expr_support(c)) for c in cons]
        self.watch: dict[int, list[int]] = {}
        for c, sup in enumerate(self.support):
            for r in sup:
                self.watch.setdefault(r, []).append(c)
        self.val: list = [None] * len(network.nodes)
        self.status: list = [None] * len(cons)
        self.trail: list[int] = []       # assigned roots
        self.strail: list[int] = []      # constraints whose status got fixed
        self.given_open = self.n_given
        self.target_open = len(cons) - self.n_given
        self.target_failed = False
        self.next_given = 0
        self.next_target = self.n_given

    # status bookkeeping

    def _settle(self, c: int, s: bool) -> bool:
        """Record constraint ``c`` as decided; returns False on a given-side conflict."""
        self.status[c] = s
        self.strail.append(c)
        if c < self.n_given:
            self.given_open -= 1
            return s
        self.target_open -= 1
        if not s:
            self.target_failed = True
        return True

    def _undo(self, mark):
        tmark, smark, ng, nt, failed = mark
        while len(self.trail) > tmark:
            self.val[self.trail.pop()] = None
        while len(self.strail) > smark:
            c = self.strail.pop()
            self.status[c] = None
            if c < self.n_given:
                self.given_open += 1
            else:
                self.target_open += 1
        self.next_given, self.next_target, self.target_failed = ng, nt, failed

    def _mark(self):
        return (len(self.trail), len(self.strail), self.next_given, self.next_target,
                self.target_failed)

    def assign(self, r: int, v: bool) -> Fraction:
        """Assign and propagate.  Returns the weight of every forced assignment, 0 on conflict."""
        w = Fraction(1)
        queue = [(r, v)]
        val, exprs = self.val, self.exprs
        while queue:
            r, v = queue.pop()
            cur = val[r]
            if cur is not None:
                if cur != v:
                    return Fraction(0)
                continue
            # weigh at assignment time: a root may be queued by several constraints
            w *= _weight(self.alpha[r], v)
            if not w:
                return w
            val[r] = v
            self.trail.append(r)
            for c in self.watch.get(r, ()):
                if self.status[c] is not None:
                    continue
                s = _eval3(self.cons[c], val, exprs)
                if s is not None:
                    if not self._settle(c, s):
                        return Fraction(0)
                    continue
                if c >= self.n_given:
                    continue
                free = [u for u in self.support[c] if val[u] is None]
                if len(free) != 1:
                    continue
                u = free[0]
                val[u] = True
                s_true = _eval3(self.cons[c], val, exprs)
                val[u] = False
                s_false = _eval3(self.cons[c], val, exprs)
                val[u] = None
                if s_true is False and s_false is False:
                    return Fraction(0)
                if s_true is False or s_false is False:
                    queue.append((u, s_false is False))
        return w

    def _pick(self) -> int | None:
        status, val = self.status, self.val
        if self.given_open:
            c = self.next_given
            while status[c] is not None:
                c += 1
            self.next_given = c
        else:
            c = self.next_target
            while status[c] is not None:
                c += 1
            self.next_target = c
        for r in self.support[c]:
            if val[r] is None:
                return r
        raise AssertionError("open constraint with fully assigned support")

    def solve(self) -> tuple[Fraction, Fraction]:
        self.visited += 1
        if self.visited > self.cap:
            raise ResourceLimitError(f"search exceeded {self.cap} nodes")
        if not self.given_open:
            if self.target_failed:
                return Fraction(1), Fraction(0)
            if not self.target_open:
                return Fraction(1), Fraction(1)
        r = self._pick()
        zg = Fraction(0)
        zj = Fraction(0)
        for v in (True, False):
            mark = self._mark()
            w = self.assign(r, v)
            if w:
                g, j = self.solve()
                zg += w * g
                zj += w * j
            self._undo(mark)
        return zg, zj

    def start(self, preset: Sequence[tuple[int, bool]] = ()) -> tuple[Fraction, Fraction]:
        w = Fraction(1)
        for c in range(len(self.cons)):
            if not self.support[c]:
                s = _eval3(self.cons[c], self.val, self.exprs)
                if not self._settle(c, s):
                    return Fraction(0), Fraction(0)
        for r, v in preset:
            fw = self.assign(r, v)
            if not fw:
                return Fraction(0), Fraction(0)
            w *= fw
        g, j = self.solve()
        return w * g, w * j

    def split_roots(self, k: int) -> list[int]:
        seen: list[int] = []
        for sup in self.support:
            for r in sup:
                if r not in seen:
                    seen.append(r)
                    if len(seen) == k:
                        return seen
        return seen


def _search_job(args):
    network, given, target, cap, preset = args
    return _Search(network, given, target, cap).start(preset)


def _search(network: GroundedNetwork, given: list, target: list, cap: int,
            jobs: int) -> tuple[Fraction, Fraction]:
    if jobs <= 1:
        return _Search(network, given, target, cap).start()
    probe = _Search(network, given, target, cap)
    split = probe.split_roots(max(1, (jobs * 4 - 1).bit_length()))
    tasks = [(network, given, target, cap, tuple(zip(split, bits)))
             for bits in itertools.product((True, False), repeat=len(split))]
    # the compiled cache is rebuilt in each worker
    network.__dict__.pop("_compiled", None)
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        parts = list(pool.map(_search_job, tasks))
    return sum((p[0] for p in parts), Fraction(0)), sum((p[1] for p in parts), Fraction(0))


def _check_event(network: GroundedNetwork, event: Event) -> None:
    for atom in event:
        network._idx(atom)


def joint_and_marginal(network: GroundedNetwork, target: Event, given: Event, *,
                       method: str = "search", jobs: int = 1,
                       cap: int | None = None) -> tuple[Fraction, Fraction]:
    """(P(given), P(target and given)) in one pass."""
    _check_event(network, target)
    _check_event(network, given)
    g = _literal_exprs(given, network)
    t = _literal_exprs(target, network)
    if method == "exhaustive":
        return _exhaustive(network, g, t, cap or DEFAULT_EXHAUSTIVE_CAP)
    if method == "search":
        return _search(network, g, t, cap or DEFAULT_ENUM_CAP, jobs)
    raise ValueError(f"unknown method {method!r}")


def event_probability(network: GroundedNetwork, event: Event, *, method: str = "search",
                      jobs: int = 1, cap: int | None = None) -> Fraction:
    """P(event), an exact rational; the empty event has probability 1."""
    z, _ = joint_and_marginal(network, {}, event, method=method, jobs=jobs, cap=cap)
    return z


def _merge(a: Event, b: Event) -> dict[GroundAtom, bool] | None:
    out = dict(a)
    for atom, v in b.items():
        if out.setdefault(atom, v) != v:
            return None
    return out


def conditional_probability(network: GroundedNetwork, target: Event, given: Event, *,
                            method: str = "search", jobs: int = 1,
                            cap: int | None = None) -> Fraction | None:
    """P(target | given), or None when P(given) is 0."""
    if _merge(target, given) is None:
        raise InconsistentEventError("target and given assign an atom different values")
    z_given, z_joint = joint_and_marginal(network, target, given, method=method, jobs=jobs, cap=cap)
    if z_given == 0:
        return None
    return z_joint / z_given


def count_models(network: GroundedNetwork, event: Event, *, cap: int | None = None) -> int:
    """Number of root assignments whose completion satisfies ``event``.

    Computed with the search engine on the same network with every root
    weight replaced by 1/2.
    """
    halves = GroundedNetwork(network.n, network.spec,
                             [type(nd)(nd.atom, Fraction(1, 2), None) if nd.is_root else nd
                              for nd in network.nodes],
                             network.parents, network.topo)
    p = event_probability(halves, event, cap=cap)
    return int(p * (1 << len(network.roots)))


def all_true(network: GroundedNetwork, preds: Iterable[str]) -> dict[GroundAtom, bool]:
    wanted = set(preds)
    return {node.atom: True for node in network.nodes if node.atom.pred in wanted}


def evidence_event(evidence: Evidence) -> dict[GroundAtom, bool]:
    return {GroundAtom(p, t): v for (p, t), v in evidence.values.items()}


def decide_acceptance(spec: NetworkSpec, query: AcceptanceQuery, n: int, evidence: Evidence,
                      *, network: GroundedNetwork | None = None, method: str = "search",
                      jobs: int = 1, cap: int | None = None) -> AcceptanceDecision:
    """Accept iff P(all conditioned true | all conditioning true, evidence) > 1/2."""
    for p in evidence.predicates():
        if p not in spec.vocabulary:
            raise ValueError(f"evidence mentions {p!r}, which the specification does not declare")
    evidence.check(spec.vocabulary, n)
    if network is None:
        network = ground(spec, n)
    a = all_true(network, query.conditioned)
    given = _merge(all_true(network, query.conditioning), evidence_event(evidence))
    if given is None:
        return AcceptanceDecision(Outcome.UNDEFINED)
    joint_target = a if _merge(a, given) is not None else None
    if joint_target is None:
        z_given = event_probability(network, given, method=method, jobs=jobs, cap=cap)
        if z_given == 0:
            return AcceptanceDecision(Outcome.UNDEFINED)
        return AcceptanceDecision(Outcome.REJECT, Fraction(0))
    z_given, z_joint = joint_and_marginal(network, a, given, method=method, jobs=jobs, cap=cap)
    if z_given == 0:
        return AcceptanceDecision(Outcome.UNDEFINED)
    p = z_joint / z_given
    return AcceptanceDecision(Outcome.ACCEPT if p > Fraction(1, 2) else Outcome.REJECT, p)
