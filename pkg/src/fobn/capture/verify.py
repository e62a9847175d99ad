"""Checking that a compiled machine and the machine itself decide the same pairs."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from ..codec import encode_pair
from ..errors import ResourceLimitError
from ..grounder import ground
from ..inference import Outcome, decide_acceptance
from ..logic import Vocabulary
from ..structures import Evidence, enumerate_tuples
from .compile import CompiledCapture, all_evidence, compile_machine, structured_conditional
from .machine import PathCount, count_paths, majority_decision, normalize_machine

__all__ = ["CaptureRow", "CaptureReport", "machine_count", "verify_capture",
           "DEFAULT_EVIDENCE_CAP"]

DEFAULT_EVIDENCE_CAP = 100_000


@dataclass(frozen=True)
class CaptureRow:
    n: int
    evidence: Evidence
    machine: PathCount
    machine_decision: Outcome
    structured: Fraction | None
    structured_decision: Outcome
    generic: Fraction | None = None       # only when cross-checking

    @property
    def agrees(self) -> bool:
        if self.machine_decision != self.structured_decision:
            return False
        return self.generic is None or self.generic == self.structured

    def pair_bits(self, sigma: Vocabulary) -> str:
        return encode_pair(self.n, self.evidence, sigma)


@dataclass
class CaptureReport:
    compiled: CompiledCapture
    rows: list[CaptureRow] = field(default_factory=list)

    @property
    def mismatches(self) -> list[CaptureRow]:
        return [r for r in self.rows if not r.agrees]

    @property
    def ok(self) -> bool:
        return not self.mismatches

    def summary(self) -> str:
        sigma = self.compiled.layout.sigma
        lines = [f"pairs checked: {len(self.rows)}", f"mismatches: {len(self.mismatches)}"]
        for r in self.mismatches:
            lines.append(f"  n={r.n} pair={r.pair_bits(sigma)} machine={r.machine.ratio} "
                         f"spec={r.structured} generic={r.generic}")
        return "\n".join(lines)


def machine_count(compiled: CompiledCapture, n: int, evidence: Evidence) -> PathCount:
    """Paths summed over every completion of the evidence's unassigned groundings."""
    L = compiled.layout
    total = PathCount(0, 0)
    for comp in evidence.completions(L.sigma, n):
        total = total + count_paths(compiled.machine, n, encode_pair(n, comp, L.sigma),
                                    kp=L.kp, mode=L.mode)
    return total


def verify_capture(machine, sigma: Vocabulary, max_n: int = 2, *, mode: str = "reject",
                   cross_check: Sequence[int] = (), evidence_cap: int = DEFAULT_EVIDENCE_CAP,
                   jobs: int = 1) -> CaptureReport:
    """Compare the machine's majority decision with the compiled query on every pair.

    Every domain size 1..max_n and every evidence piece over ``sigma`` is
    tried.  Sizes listed in ``cross_check`` are also grounded and solved by
    the generic inference engine, whose probability must match exactly.
    """
    if max_n < 1:
        raise ValueError("max_n must be at least 1")
    machine = normalize_machine(machine)
    sizes = tuple(range(1, max_n + 1))
    compiled = compile_machine(machine, sigma, sizes=sizes, mode=mode)
    report = CaptureReport(compiled)
    for n in sizes:
        slots = sum(len(enumerate_tuples(n, p.arity)) for p in sigma)
        if 3 ** slots > evidence_cap:
            raise ResourceLimitError(f"3^{slots} evidence pieces at n={n} exceed the cap "
                                     f"{evidence_cap}")
        network = ground(compiled.spec, n, check=False) if n in cross_check else None
        for ev in all_evidence(sigma, n):
            count = machine_count(compiled, n, ev)
            ratio = structured_conditional(compiled, n, ev)
            decision = (Outcome.UNDEFINED if ratio is None
                        else Outcome.ACCEPT if ratio > Fraction(1, 2) else Outcome.REJECT)
            generic = None
            if network is not None:
                generic = decide_acceptance(compiled.spec, compiled.query, n, ev,
                                            network=network, jobs=jobs).probability
            report.rows.append(CaptureRow(n, ev, count, majority_decision(count), ratio,
                                          decision, generic))
    return report
